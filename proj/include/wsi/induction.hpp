#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wsi/graph.hpp"
#include "wsi/index.hpp"
#include "wsi/louvain.hpp"
#include "wsi/vocab.hpp"

namespace wsi {

struct SenseCluster {
    SenseId id = 0;
    /// Community members by descending intra-community weighted degree,
    /// ties by ascending lemma id.
    std::vector<LemmaId> representatives;
    std::uint64_t support = 0;

    bool operator==(const SenseCluster&) const = default;
};

struct LemmaSenses {
    LemmaId lemma = 0;
    std::vector<SenseCluster> senses;
    /// Too few occurrences to cluster; a single default sense was emitted.
    bool fallback = false;

    bool operator==(const LemmaSenses&) const = default;
};

using SenseInventory = std::map<LemmaId, LemmaSenses>;

struct InductionConfig {
    std::size_t sample_cap = 1000;
    std::size_t min_occurrences = 20;
    std::size_t representatives_cap = 100;
    std::size_t fallback_representatives = 5;
    std::uint64_t seed = 0;
    double resolution = 1.0;
    double min_gain = 1e-7;
    std::size_t max_passes = 50;
};

std::vector<SenseCluster> extract_representatives(const SubstituteGraph& graph, const Partition& partition,
                                                  std::size_t cap = 100);

/// Samples, clusters, and orders one lemma's senses by descending support.
LemmaSenses induce_senses(LemmaId lemma, const InvertedIndex& index, const InductionConfig& cfg);

/// Induces every indexed lemma. Each lemma's result depends only on its own
/// postings and the seed, so the inventory is identical for any thread count.
SenseInventory induce_all(const InvertedIndex& index, const InductionConfig& cfg, std::size_t threads = 1);

/// Replaces support counts with full-corpus tag counts (sense ids unchanged).
void update_support(SenseInventory& inventory, const std::map<LemmaId, std::vector<std::uint64_t>>& counts);

/// JSONL: {"lemma":id,"senses":[{"id":k,"support":n,"reps":[ids]}]}.
std::string inventory_to_jsonl(const SenseInventory& inventory);
void save_inventory(const SenseInventory& inventory, const std::string& path);
SenseInventory load_inventory(const std::string& path);

/// Column-per-sense table of the top `rows` representatives as strings.
std::string format_sense_table(const LemmaSenses& senses, const VocabTable& vocab, std::size_t rows = 5);

}  // namespace wsi

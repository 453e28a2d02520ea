#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsi/records.hpp"
#include "wsi/sentence_store.hpp"
#include "wsi/vocab.hpp"

namespace wsi {

/// A target word with hand-specified substitute pools, one per sense.
struct PlantedWord {
    std::string surface;
    std::vector<std::vector<std::string>> pools;
};

/// Parameters of the planted-sense corpus generator.
struct SynthSpec {
    std::size_t num_words = 100;
    std::size_t senses_min = 2;
    std::size_t senses_max = 4;
    std::size_t pool_size = 20;
    double noise_rate = 0.1;
    std::size_t instances_per_word = 1000;
    std::size_t noise_pool_size = 10;
    /// Context tokens drawn from the sense pool for each sentence.
    std::size_t context_tokens = 6;
    std::size_t sentences_per_doc = 10;
    std::uint64_t seed = 1;
    /// When non-empty, replaces the generated words.
    std::vector<PlantedWord> words;
};

struct PlantedSense {
    LemmaId word = 0;
    std::vector<std::vector<LemmaId>> pools;
};

struct SynthCorpus {
    VocabTable vocab;
    SentenceStore sentences;
    std::vector<SubstituteRecord> records;
    /// Planted sense of records[i].
    std::vector<SenseId> gold;
    std::vector<PlantedSense> planted;
};

void validate(const SynthSpec& spec);
SynthCorpus generate_synth_corpus(const SynthSpec& spec);

SynthSpec synth_spec_from_json(const std::string& json_text);
std::string synth_spec_to_json(const SynthSpec& spec);

/// Gold labels as JSONL {doc, sent, tok, target, gold}.
void save_gold(const SynthCorpus& corpus, const std::string& path);

}  // namespace wsi

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wsi/records.hpp"
#include "wsi/types.hpp"

namespace wsi {

struct Posting {
    Occurrence occ;
    SubstituteList substitutes;

    auto operator<=>(const Posting&) const = default;
    bool operator==(const Posting&) const = default;
};

/// lemma id -> postings sorted by corpus position. Immutable once built;
/// concurrent readers need no locking.
class InvertedIndex {
public:
    InvertedIndex() = default;
    explicit InvertedIndex(std::size_t vocab_size) : lists_(vocab_size) {}

    std::size_t vocab_size() const noexcept { return lists_.size(); }
    /// Empty span for unseen or out-of-range lemmas.
    std::span<const Posting> lookup(LemmaId lemma) const noexcept;
    std::size_t count(LemmaId lemma) const noexcept { return lookup(lemma).size(); }
    std::size_t total_postings() const noexcept;
    /// Lemmas with at least one posting, ascending.
    std::vector<LemmaId> lemmas() const;

    bool operator==(const InvertedIndex&) const = default;

private:
    friend InvertedIndex build_index(std::span<const SubstituteRecord>, std::size_t);
    friend InvertedIndex merge_indexes(const InvertedIndex&, const InvertedIndex&);
    friend InvertedIndex parse_index(std::string_view);

    std::vector<std::vector<Posting>> lists_;
};

/// Throws IndexBuildError on any record that violates the record invariants.
InvertedIndex build_index(std::span<const SubstituteRecord> records, std::size_t vocab_size);
/// Builds each shard on its own thread (at most `threads` at a time) and merges.
InvertedIndex build_index_sharded(const std::vector<std::vector<SubstituteRecord>>& shards,
                                  std::size_t vocab_size, std::size_t threads = 0);
InvertedIndex merge_indexes(const InvertedIndex& a, const InvertedIndex& b);

/// min(count, cap) postings, uniform without replacement, in index order.
/// The stream depends only on (lemma, seed).
std::vector<Posting> sample_occurrences(const InvertedIndex& index, LemmaId lemma, std::size_t cap,
                                        std::uint64_t seed);

/// Layout: "WSIX1", u32 vocab_size, u32 entry count, then entry directory
/// (u32 lemma, u64 byte offset, u32 count), then fixed 36-byte postings
/// (u64 doc, u32 sent, u16 tok, u8 n_subs, u8 0, 5 x u32 subs). All LE.
std::string serialize_index(const InvertedIndex& index);
void save_index(const InvertedIndex& index, const std::string& path);
InvertedIndex parse_index(std::string_view bytes);
InvertedIndex load_index(const std::string& path);

}  // namespace wsi

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wsi/index.hpp"
#include "wsi/induction.hpp"
#include "wsi/sentence_store.hpp"

namespace wsi {

/// |A ∩ B| / |A ∪ B| over the distinct elements; 0 when both are empty.
double jaccard(std::span<const LemmaId> a, std::span<const LemmaId> b);

struct SenseAssignment {
    SenseId sense = 0;
    double score = 0.0;
    /// False when no sense shares a lemma with the substitutes.
    bool confident = false;
};

/// One lemma's senses prepared for repeated Jaccard queries.
class SenseMatcher {
public:
    explicit SenseMatcher(const LemmaSenses& entry);
    SenseAssignment assign(const SubstituteList& substitutes) const;
    std::size_t sense_count() const noexcept { return reps_.size(); }

private:
    std::vector<std::vector<LemmaId>> reps_;
};

/// Jaccard argmax against each sense's representatives. Ties go to the
/// lowest sense id; zero overlap everywhere falls back to sense 0.
SenseAssignment assign_sense(const SubstituteList& substitutes, const LemmaSenses& entry);

struct TagEntry {
    Occurrence occ;
    LemmaId lemma = 0;
    SenseId sense = 0;
    bool confident = false;

    bool operator==(const TagEntry&) const = default;
};

struct TaggedCorpus {
    /// Sorted by corpus position.
    std::vector<TagEntry> tags;
    /// lemma -> occurrences per sense id.
    std::map<LemmaId, std::vector<std::uint64_t>> counts;
};

/// Tags every indexed occurrence. Throws TagError for a lemma without an
/// inventory entry or an occurrence missing from the sentence store.
TaggedCorpus tag_corpus(const InvertedIndex& index, const SenseInventory& inventory, const SentenceStore& sentences,
                        std::size_t threads = 1);

/// Doubles every literal '@'.
std::string escape_surface(std::string_view surface);
std::string sense_token(std::string_view surface, SenseId sense);

struct ParsedToken {
    std::string surface;
    std::optional<SenseId> sense;
};
ParsedToken parse_token(std::string_view token);

/// One line per sentence, tokens space-separated, tagged ones as surface@k.
std::string render_tagged_text(const SentenceStore& sentences, std::span<const TagEntry> tags);

void save_sidecar(std::span<const TagEntry> tags, const std::string& path);
std::vector<TagEntry> load_sidecar(const std::string& path);

}  // namespace wsi

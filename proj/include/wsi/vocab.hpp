#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wsi/types.hpp"

namespace wsi {

/// Dense, case-sensitive lemma table. Line number in the vocab file is the id.
class VocabTable {
public:
    VocabTable() = default;
    explicit VocabTable(std::vector<std::string> entries);

    /// Appends a new lemma, or returns the existing id.
    LemmaId intern(std::string_view lemma);

    std::optional<LemmaId> find(std::string_view lemma) const;
    LemmaId at(std::string_view lemma) const;
    const std::string& lemma(LemmaId id) const { return entries_.at(id); }

    std::size_t size() const noexcept { return entries_.size(); }
    bool contains(LemmaId id) const noexcept { return id < entries_.size(); }
    const std::vector<std::string>& entries() const noexcept { return entries_; }

    /// FNV-1a over the serialized form; used to check that artifacts agree.
    std::uint64_t fingerprint() const;

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept {
            return std::hash<std::string_view>{}(s);
        }
    };
    std::vector<std::string> entries_;
    std::unordered_map<std::string, LemmaId, Hash, std::equal_to<>> ids_;
};

VocabTable load_vocab(const std::string& path);
void save_vocab(const VocabTable& vocab, const std::string& path);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t file_fingerprint(const std::string& path);
std::string hex64(std::uint64_t v);

}  // namespace wsi

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace wsi {

/// Token surfaces keyed by (doc, sent), iterated in position order.
class SentenceStore {
public:
    using Key = std::pair<std::uint64_t, std::uint32_t>;

    void add(std::uint64_t doc, std::uint32_t sent, std::vector<std::string> tokens);
    const std::vector<std::string>* find(std::uint64_t doc, std::uint32_t sent) const;
    const std::string* token(std::uint64_t doc, std::uint32_t sent, std::uint32_t tok) const;

    std::size_t size() const noexcept { return rows_.size(); }
    auto begin() const { return rows_.begin(); }
    auto end() const { return rows_.end(); }

private:
    std::map<Key, std::vector<std::string>> rows_;
};

SentenceStore load_sentences(const std::string& path);
void save_sentences(const SentenceStore& store, const std::string& path);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace wsi

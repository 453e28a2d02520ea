#include "wsi/vocab.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "wsi/error.hpp"

namespace wsi {

namespace detail {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_file(const std::string& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace detail

VocabTable::VocabTable(std::vector<std::string> entries) {
    entries_.reserve(entries.size());
    for (auto& e : entries) {
        if (e.empty()) throw MalformedVocab("empty lemma at id " + std::to_string(entries_.size()));
        if (ids_.count(e)) throw DuplicateLemma("duplicate lemma '" + e + "'");
        ids_.emplace(e, static_cast<LemmaId>(entries_.size()));
        entries_.push_back(std::move(e));
    }
}

LemmaId VocabTable::intern(std::string_view lemma) {
    if (auto it = ids_.find(lemma); it != ids_.end()) return it->second;
    if (lemma.empty()) throw MalformedVocab("empty lemma");
    auto id = static_cast<LemmaId>(entries_.size());
    entries_.emplace_back(lemma);
    ids_.emplace(entries_.back(), id);
    return id;
}

std::optional<LemmaId> VocabTable::find(std::string_view lemma) const {
    if (auto it = ids_.find(lemma); it != ids_.end()) return it->second;
    return std::nullopt;
}

LemmaId VocabTable::at(std::string_view lemma) const {
    if (auto id = find(lemma)) return *id;
    throw OovError("lemma not in vocabulary: " + std::string(lemma));
}

std::uint64_t VocabTable::fingerprint() const {
    std::uint64_t h = fnv1a64("");
    for (const auto& e : entries_) {
        h = fnv1a64(e, h);
        h = fnv1a64("\n", h);
    }
    return h;
}

VocabTable load_vocab(const std::string& path) {
    std::string data = detail::read_file(path);
    std::vector<std::string> entries;
    std::size_t pos = 0;
    std::size_t line = 1;
    while (pos < data.size()) {
        std::size_t nl = data.find('\n', pos);
        if (nl == std::string::npos) nl = data.size();
        std::string entry = data.substr(pos, nl - pos);
        if (!entry.empty() && entry.back() == '\r') entry.pop_back();
        if (entry.empty()) throw MalformedVocab(path + ": empty line " + std::to_string(line));
        entries.push_back(std::move(entry));
        pos = nl + 1;
        ++line;
    }
    try {
        return VocabTable(std::move(entries));
    } catch (const DuplicateLemma& e) {
        throw DuplicateLemma(path + ": " + e.what());
    }
}

void save_vocab(const VocabTable& vocab, const std::string& path) {
    std::string out;
    for (const auto& e : vocab.entries()) {
        out += e;
        out += '\n';
    }
    detail::write_file(path, out);
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t h) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t file_fingerprint(const std::string& path) { return fnv1a64(detail::read_file(path)); }

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace wsi

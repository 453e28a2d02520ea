#include "wsi/sentence_store.hpp"

#include <fstream>

#include <json.hpp>

#include "wsi/error.hpp"

namespace wsi {

void SentenceStore::add(std::uint64_t doc, std::uint32_t sent, std::vector<std::string> tokens) {
    rows_[{doc, sent}] = std::move(tokens);
}

const std::vector<std::string>* SentenceStore::find(std::uint64_t doc, std::uint32_t sent) const {
    auto it = rows_.find({doc, sent});
    return it == rows_.end() ? nullptr : &it->second;
}

const std::string* SentenceStore::token(std::uint64_t doc, std::uint32_t sent, std::uint32_t tok) const {
    const auto* row = find(doc, sent);
    if (!row || tok >= row->size()) return nullptr;
    return &(*row)[tok];
}

SentenceStore load_sentences(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    SentenceStore store;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = nlohmann::json::parse(line);
            store.add(j.at("doc").get<std::uint64_t>(), j.at("sent").get<std::uint32_t>(),
                      j.at("tokens").get<std::vector<std::string>>());
        } catch (const nlohmann::json::exception& e) {
            throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return store;
}

void save_sentences(const SentenceStore& store, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& [key, tokens] : store) {
        nlohmann::ordered_json j;
        j["doc"] = key.first;
        j["sent"] = key.second;
        j["tokens"] = tokens;
        out << j.dump() << '\n';
    }
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string s;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) s += ' ';
        s += tokens[i];
    }
    return s;
}

}  // namespace wsi

#include "wsi/normalize.hpp"

#include <fstream>

#include "wsi/error.hpp"

namespace wsi {

StopwordSet load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stopword list " + path);
    StopwordSet out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        out.insert(line);
    }
    return out;
}

std::string default_stopwords_path() { return std::string(WSI_ASSET_DIR) + "/stopwords_en.txt"; }

StopwordSet default_stopwords() { return load_stopwords(default_stopwords_path()); }

std::size_t utf8_length(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xc0) != 0x80) ++n;
    return n;
}

std::vector<std::string> normalize_substitutes(const std::vector<std::string>& raw,
                                               std::string_view target,
                                               const StopwordSet& stopwords) {
    std::vector<std::string> out;
    for (const auto& cand : raw) {
        if (out.size() == 5) break;
        if (cand == target || utf8_length(cand) <= 1 || stopwords.count(cand)) continue;
        bool seen = false;
        for (const auto& kept : out)
            if (kept == cand) {
                seen = true;
                break;
            }
        if (!seen) out.push_back(cand);
    }
    return out;
}

}  // namespace wsi

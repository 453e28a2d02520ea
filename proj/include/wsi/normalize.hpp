#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace wsi {

using StopwordSet = std::unordered_set<std::string>;

/// One stopword per line; blank lines and lines starting with '#' are skipped.
StopwordSet load_stopwords(const std::string& path);
/// The checked-in English list under assets/.
StopwordSet default_stopwords();
std::string default_stopwords_path();

/// Number of UTF-8 code points.
std::size_t utf8_length(std::string_view s);

/// Filters an already-lemmatized candidate list (descending probability):
/// drops repeats (first position wins), stopwords, single-character entries
/// and the target, then keeps the first five survivors.
std::vector<std::string> normalize_substitutes(const std::vector<std::string>& raw,
                                               std::string_view target,
                                               const StopwordSet& stopwords);

}  // namespace wsi

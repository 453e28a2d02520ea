#include "wsi/tagger.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "binary_io.hpp"
#include "wsi/error.hpp"

namespace wsi {

namespace {

std::vector<LemmaId> sorted_unique(std::span<const LemmaId> xs) {
    std::vector<LemmaId> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::size_t intersection_size(const std::vector<LemmaId>& a, const std::vector<LemmaId>& b) {
    std::size_t n = 0;
    for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
        if (a[i] < b[j])
            ++i;
        else if (b[j] < a[i])
            ++j;
        else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

}  // namespace

double jaccard(std::span<const LemmaId> a, std::span<const LemmaId> b) {
    const auto sa = sorted_unique(a), sb = sorted_unique(b);
    const std::size_t inter = intersection_size(sa, sb);
    const std::size_t uni = sa.size() + sb.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

SenseMatcher::SenseMatcher(const LemmaSenses& entry) {
    reps_.reserve(entry.senses.size());
    for (const auto& s : entry.senses) reps_.push_back(sorted_unique(s.representatives));
}

SenseAssignment SenseMatcher::assign(const SubstituteList& substitutes) const {
    const auto subs = sorted_unique(substitutes.span());
    // Compare inter/union as exact fractions so ties are recognized exactly.
    std::size_t best_inter = 0, best_union = 1;
    SenseId best = 0;
    for (std::size_t s = 0; s < reps_.size(); ++s) {
        const std::size_t inter = intersection_size(subs, reps_[s]);
        const std::size_t uni = subs.size() + reps_[s].size() - inter;
        if (inter * best_union > best_inter * uni) {
            best_inter = inter;
            best_union = uni;
            best = static_cast<SenseId>(s);
        }
    }
    if (best_inter == 0) return {0, 0.0, false};
    return {best, static_cast<double>(best_inter) / static_cast<double>(best_union), true};
}

SenseAssignment assign_sense(const SubstituteList& substitutes, const LemmaSenses& entry) {
    if (entry.senses.empty()) throw std::invalid_argument("assign_sense: empty inventory entry");
    return SenseMatcher(entry).assign(substitutes);
}

TaggedCorpus tag_corpus(const InvertedIndex& index, const SenseInventory& inventory, const SentenceStore& sentences,
                        std::size_t threads) {
    const auto lemmas = index.lemmas();
    for (LemmaId l : lemmas) {
        auto it = inventory.find(l);
        if (it == inventory.end() || it->second.senses.empty())
            throw TagError("no sense inventory for lemma id " + std::to_string(l));
    }

    std::vector<std::vector<TagEntry>> per_lemma(lemmas.size());
    std::vector<std::vector<std::uint64_t>> per_counts(lemmas.size());
    std::vector<std::exception_ptr> errors(lemmas.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < lemmas.size();) {
            try {
                const LemmaId l = lemmas[i];
                const auto& entry = inventory.at(l);
                const SenseMatcher matcher(entry);
                auto& counts = per_counts[i];
                counts.assign(entry.senses.size(), 0);
                for (const auto& p : index.lookup(l)) {
                    if (!sentences.token(p.occ.doc_id, p.occ.sent_idx, p.occ.token_idx))
                        throw TagError("occurrence (" + std::to_string(p.occ.doc_id) + "," +
                                       std::to_string(p.occ.sent_idx) + "," + std::to_string(p.occ.token_idx) +
                                       ") is missing from the sentence store");
                    const auto a = matcher.assign(p.substitutes);
                    per_lemma[i].push_back({p.occ, l, a.sense, a.confident});
                    ++counts[a.sense];
                }
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    TaggedCorpus out;
    for (std::size_t i = 0; i < lemmas.size(); ++i) {
        out.tags.insert(out.tags.end(), per_lemma[i].begin(), per_lemma[i].end());
        out.counts.emplace(lemmas[i], std::move(per_counts[i]));
    }
    std::sort(out.tags.begin(), out.tags.end(), [](const TagEntry& a, const TagEntry& b) {
        return a.occ != b.occ ? a.occ < b.occ : a.lemma < b.lemma;
    });
    return out;
}

std::string escape_surface(std::string_view surface) {
    std::string out;
    out.reserve(surface.size());
    for (char c : surface) {
        out.push_back(c);
        if (c == '@') out.push_back('@');
    }
    return out;
}

std::string sense_token(std::string_view surface, SenseId sense) {
    return escape_surface(surface) + "@" + std::to_string(sense);
}

ParsedToken parse_token(std::string_view token) {
    ParsedToken out;
    std::size_t i = 0;
    while (i < token.size()) {
        if (token[i] != '@') {
            out.surface.push_back(token[i++]);
            continue;
        }
        if (i + 1 < token.size() && token[i + 1] == '@') {
            out.surface.push_back('@');
            i += 2;
            continue;
        }
        // A single '@' must be followed by the decimal sense id to the end.
        std::string_view digits = token.substr(i + 1);
        if (!digits.empty() && digits.size() <= 9 &&
            std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            out.sense = static_cast<SenseId>(std::stoul(std::string(digits)));
            return out;
        }
        out.surface.push_back('@');
        ++i;
    }
    return out;
}

std::string render_tagged_text(const SentenceStore& sentences, std::span<const TagEntry> tags) {
    std::string out;
    std::size_t t = 0;
    for (const auto& [key, tokens] : sentences) {
        while (t < tags.size() && std::pair(tags[t].occ.doc_id, tags[t].occ.sent_idx) < key) ++t;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i) out += ' ';
            while (t < tags.size() && std::pair(tags[t].occ.doc_id, tags[t].occ.sent_idx) == key &&
                   tags[t].occ.token_idx < i)
                ++t;
            if (t < tags.size() && std::pair(tags[t].occ.doc_id, tags[t].occ.sent_idx) == key &&
                tags[t].occ.token_idx == i)
                out += sense_token(tokens[i], tags[t].sense);
            else
                out += escape_surface(tokens[i]);
        }
        out += '\n';
    }
    return out;
}

void save_sidecar(std::span<const TagEntry> tags, const std::string& path) {
    std::string out;
    for (const auto& t : tags) {
        out += "{\"doc\":" + std::to_string(t.occ.doc_id) + ",\"sent\":" + std::to_string(t.occ.sent_idx) +
               ",\"tok\":" + std::to_string(t.occ.token_idx) + ",\"lemma\":" + std::to_string(t.lemma) +
               ",\"sense\":" + std::to_string(t.sense) + ",\"confident\":" + (t.confident ? "true" : "false") + "}\n";
    }
    detail::write_file(path, out);
}

std::vector<TagEntry> load_sidecar(const std::string& path) {
    std::istringstream in(detail::read_file(path));
    std::vector<TagEntry> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = nlohmann::json::parse(line);
            TagEntry t;
            t.occ.doc_id = j.at("doc").get<std::uint64_t>();
            t.occ.sent_idx = j.at("sent").get<std::uint32_t>();
            t.occ.token_idx = j.at("tok").get<std::uint16_t>();
            t.lemma = j.at("lemma").get<LemmaId>();
            t.sense = j.at("sense").get<SenseId>();
            t.confident = j.at("confident").get<bool>();
            out.push_back(t);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace wsi

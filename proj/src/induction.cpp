#include "wsi/induction.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "binary_io.hpp"
#include "wsi/error.hpp"
#include "wsi/rng.hpp"
#include "wsi/tagger.hpp"

namespace wsi {

namespace {

constexpr std::uint64_t kLouvainSeedSalt = 0x6c6f757661696eULL;

LemmaId min_rep(const SenseCluster& c) {
    return *std::min_element(c.representatives.begin(), c.representatives.end());
}

LemmaSenses fallback_senses(LemmaId lemma, std::span<const Posting> postings, std::size_t keep) {
    std::unordered_map<LemmaId, std::uint64_t> freq;
    for (const auto& p : postings)
        for (LemmaId s : p.substitutes) ++freq[s];
    std::vector<std::pair<LemmaId, std::uint64_t>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    SenseCluster only;
    for (std::size_t i = 0; i < ranked.size() && i < keep; ++i) only.representatives.push_back(ranked[i].first);
    only.support = postings.size();
    return {lemma, {std::move(only)}, true};
}

}  // namespace

std::vector<SenseCluster> extract_representatives(const SubstituteGraph& graph, const Partition& partition,
                                                  std::size_t cap) {
    const auto& g = graph.graph();
    std::vector<std::vector<std::pair<double, LemmaId>>> ranked(partition.count);
    for (std::uint32_t u = 0; u < g.size(); ++u) {
        const auto cu = partition.community[u];
        double intra = 0.0;
        for (const auto& a : g.neighbors(u))
            if (a.to != u && partition.community[a.to] == cu) intra += a.weight;
        ranked[cu].emplace_back(intra, graph.nodes()[u]);
    }
    std::vector<SenseCluster> out;
    out.reserve(partition.count);
    for (std::uint32_t c = 0; c < partition.count; ++c) {
        auto& r = ranked[c];
        std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        SenseCluster sc;
        sc.id = c;
        for (std::size_t i = 0; i < r.size() && i < cap; ++i) sc.representatives.push_back(r[i].second);
        out.push_back(std::move(sc));
    }
    return out;
}

LemmaSenses induce_senses(LemmaId lemma, const InvertedIndex& index, const InductionConfig& cfg) {
    const auto postings = index.lookup(lemma);
    if (postings.empty()) throw std::invalid_argument("lemma " + std::to_string(lemma) + " has no postings");
    if (postings.size() < cfg.min_occurrences) return fallback_senses(lemma, postings, cfg.fallback_representatives);

    const auto sample = sample_occurrences(index, lemma, cfg.sample_cap, cfg.seed);
    std::vector<SubstituteList> sets;
    sets.reserve(sample.size());
    for (const auto& p : sample) sets.push_back(p.substitutes);

    const SubstituteGraph graph = build_graph(sets);
    const LouvainConfig lc{derive_seed(cfg.seed ^ kLouvainSeedSalt, lemma), cfg.resolution, cfg.min_gain, cfg.max_passes};
    const Partition partition = louvain(graph.graph(), lc);

    LemmaSenses out;
    out.lemma = lemma;
    out.senses = extract_representatives(graph, partition, cfg.representatives_cap);
    std::sort(out.senses.begin(), out.senses.end(),
              [](const SenseCluster& a, const SenseCluster& b) { return min_rep(a) < min_rep(b); });
    for (std::size_t i = 0; i < out.senses.size(); ++i) out.senses[i].id = static_cast<SenseId>(i);

    const SenseMatcher matcher(out);
    for (const auto& s : sets) {
        const auto a = matcher.assign(s);
        if (a.confident) ++out.senses[a.sense].support;
    }
    std::stable_sort(out.senses.begin(), out.senses.end(), [](const SenseCluster& a, const SenseCluster& b) {
        return a.support != b.support ? a.support > b.support : min_rep(a) < min_rep(b);
    });
    for (std::size_t i = 0; i < out.senses.size(); ++i) out.senses[i].id = static_cast<SenseId>(i);
    return out;
}

SenseInventory induce_all(const InvertedIndex& index, const InductionConfig& cfg, std::size_t threads) {
    const auto lemmas = index.lemmas();
    std::vector<LemmaSenses> results(lemmas.size());
    std::vector<std::exception_ptr> errors(lemmas.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < lemmas.size();) {
            try {
                results[i] = induce_senses(lemmas[i], index, cfg);
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
    SenseInventory inv;
    for (auto& r : results) inv.emplace(r.lemma, std::move(r));
    return inv;
}

void update_support(SenseInventory& inventory, const std::map<LemmaId, std::vector<std::uint64_t>>& counts) {
    for (auto& [lemma, entry] : inventory) {
        auto it = counts.find(lemma);
        for (std::size_t s = 0; s < entry.senses.size(); ++s)
            entry.senses[s].support = (it != counts.end() && s < it->second.size()) ? it->second[s] : 0;
    }
}

std::string inventory_to_jsonl(const SenseInventory& inventory) {
    std::string out;
    for (const auto& [lemma, entry] : inventory) {
        nlohmann::ordered_json j;
        j["lemma"] = lemma;
        j["senses"] = nlohmann::ordered_json::array();
        for (const auto& s : entry.senses)
            j["senses"].push_back({{"id", s.id}, {"support", s.support}, {"reps", s.representatives}});
        if (entry.fallback) j["fallback"] = true;
        out += j.dump();
        out += '\n';
    }
    return out;
}

void save_inventory(const SenseInventory& inventory, const std::string& path) {
    detail::write_file(path, inventory_to_jsonl(inventory));
}

SenseInventory load_inventory(const std::string& path) {
    std::istringstream in(detail::read_file(path));
    SenseInventory inv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = nlohmann::json::parse(line);
            LemmaSenses e;
            e.lemma = j.at("lemma").get<LemmaId>();
            e.fallback = j.value("fallback", false);
            for (const auto& s : j.at("senses")) {
                SenseCluster c;
                c.id = s.at("id").get<SenseId>();
                c.support = s.at("support").get<std::uint64_t>();
                c.representatives = s.at("reps").get<std::vector<LemmaId>>();
                if (c.id != e.senses.size()) throw IoError("sense ids must be dense and ordered");
                if (c.representatives.empty()) throw IoError("sense without representatives");
                e.senses.push_back(std::move(c));
            }
            if (e.senses.empty()) throw IoError("lemma without senses");
            inv[e.lemma] = std::move(e);
        } catch (const nlohmann::json::exception& ex) {
            throw IoError(path + ":" + std::to_string(line_no) + ": " + ex.what());
        } catch (const IoError& ex) {
            throw IoError(path + ":" + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return inv;
}

std::string format_sense_table(const LemmaSenses& senses, const VocabTable& vocab, std::size_t rows) {
    std::vector<std::vector<std::string>> cols;
    const std::string& word = vocab.lemma(senses.lemma);
    for (const auto& s : senses.senses) {
        std::vector<std::string> col{word + "_" + std::to_string(s.id)};
        for (std::size_t i = 0; i < rows && i < s.representatives.size(); ++i)
            col.push_back(vocab.lemma(s.representatives[i]));
        cols.push_back(std::move(col));
    }
    std::vector<std::size_t> width;
    std::size_t height = 0;
    for (const auto& c : cols) {
        std::size_t w = 0;
        for (const auto& cell : c) w = std::max(w, cell.size());
        width.push_back(w);
        height = std::max(height, c.size());
    }
    std::string out = word + "\n";
    for (std::size_t r = 0; r < height; ++r) {
        std::string line;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            std::string cell = r < cols[c].size() ? cols[c][r] : "";
            if (c + 1 < cols.size()) cell.resize(width[c] + 2, ' ');
            line += cell;
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
        if (r == 0) out += std::string(line.size(), '-') + "\n";
    }
    return out;
}

}  // namespace wsi

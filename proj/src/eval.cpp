#include "wsi/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "wsi/error.hpp"
#include "wsi/tagger.hpp"

namespace wsi {

// ---------------------------------------------------------------- WiC

std::optional<std::size_t> resolve_context_token(const EmbeddingMatrix& emb, const std::string& word) {
    if (auto i = emb.find(escape_surface(word))) return i;
    const auto& senses = emb.senses_of(word);
    if (!senses.empty()) return senses.front().second;
    return std::nullopt;
}

namespace {

std::optional<std::vector<double>> context_without_target(const EmbeddingMatrix& emb,
                                                          const std::vector<std::string>& ctx, std::size_t target) {
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        if (i == target) continue;
        if (auto idx = resolve_context_token(emb, ctx[i])) tokens.push_back(emb.token(*idx));
    }
    if (tokens.empty()) return std::nullopt;
    return context_vector(emb, tokens);
}

}  // namespace

std::optional<double> wic_similarity(const EmbeddingMatrix& emb, const WicInstance& inst, WicComparison comparison) {
    if (emb.senses_of(inst.target).empty()) return std::nullopt;
    const auto c1 = context_without_target(emb, inst.context1, inst.index1);
    const auto c2 = context_without_target(emb, inst.context2, inst.index2);
    if (!c1 || !c2) return std::nullopt;
    const std::string s1 = select_sense(emb, inst.target, *c1);
    if (comparison == WicComparison::SenseToContext) return cosine(*c2, emb.vector(s1));
    const std::string s2 = select_sense(emb, inst.target, *c2);
    return cosine(emb.vector(s1), emb.vector(s2));
}

WicDecision wic_classify(const EmbeddingMatrix& emb, const WicInstance& inst, const WicOptions& opts) {
    const auto sim = wic_similarity(emb, inst, opts.comparison);
    if (!sim) return {opts.abstain_prediction, true, 0.0};
    return {*sim >= opts.threshold, false, *sim};
}

double wic_tune_threshold(std::span<const std::optional<double>> similarities, std::span<const bool> gold,
                          bool abstain_prediction) {
    if (similarities.empty() || similarities.size() != gold.size())
        throw std::invalid_argument("wic_tune_threshold: need a non-empty dev set with gold labels");
    double best_theta = -1.0;
    std::size_t best_correct = 0;
    bool first = true;
    for (int step = -100; step <= 100; ++step) {
        const double theta = step / 100.0;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < similarities.size(); ++i) {
            const bool pred = similarities[i] ? (*similarities[i] >= theta) : abstain_prediction;
            if (pred == gold[i]) ++correct;
        }
        if (first || correct > best_correct) {
            best_correct = correct;
            best_theta = theta;
            first = false;
        }
    }
    return best_theta;
}

double wic_tune_threshold(const EmbeddingMatrix& emb, std::span<const WicInstance> dev, const WicOptions& opts) {
    std::vector<std::optional<double>> sims;
    std::vector<bool> gold_v;
    for (const auto& inst : dev) {
        if (!inst.gold) throw std::invalid_argument("dev instance without gold label");
        sims.push_back(wic_similarity(emb, inst, opts.comparison));
        gold_v.push_back(*inst.gold);
    }
    std::unique_ptr<bool[]> gold(new bool[gold_v.size()]);
    for (std::size_t i = 0; i < gold_v.size(); ++i) gold[i] = gold_v[i];
    return wic_tune_threshold(sims, std::span<const bool>(gold.get(), gold_v.size()), opts.abstain_prediction);
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> split_words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

}  // namespace

std::vector<WicInstance> load_wic(const std::string& data_path, const std::string& gold_path) {
    std::istringstream data(detail::read_file(data_path));
    std::vector<WicInstance> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(data, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cols = split(line, '\t');
        if (cols.size() != 5) throw IoError(data_path + ":" + std::to_string(line_no) + ": expected 5 columns");
        WicInstance inst;
        inst.target = cols[0];
        inst.pos = cols[1];
        const auto idx = split(cols[2], '-');
        if (idx.size() != 2) throw IoError(data_path + ":" + std::to_string(line_no) + ": bad index column");
        try {
            inst.index1 = std::stoul(idx[0]);
            inst.index2 = std::stoul(idx[1]);
        } catch (const std::exception&) {
            throw IoError(data_path + ":" + std::to_string(line_no) + ": bad index column");
        }
        inst.context1 = split_words(cols[3]);
        inst.context2 = split_words(cols[4]);
        out.push_back(std::move(inst));
    }
    if (!gold_path.empty()) {
        std::istringstream gold(detail::read_file(gold_path));
        std::size_t i = 0;
        while (std::getline(gold, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (i >= out.size()) throw IoError(gold_path + ": more labels than instances");
            if (line != "T" && line != "F") throw IoError(gold_path + ": labels must be T or F");
            out[i++].gold = (line == "T");
        }
        if (i != out.size()) throw IoError(gold_path + ": fewer labels than instances");
    }
    return out;
}

// ---------------------------------------------------------------- outliers

std::vector<std::string> resolve_prototypes(const EmbeddingMatrix& emb, std::span<const std::string> words,
                                            std::size_t max_sweeps) {
    const std::size_t n = words.size();
    std::vector<std::vector<std::size_t>> cands(n);
    for (std::size_t i = 0; i < n; ++i) {
        cands[i] = emb.candidates(words[i]);
        if (cands[i].empty()) throw OovError("no embedding for " + words[i]);
    }
    std::vector<double> centroid(emb.dim(), 0.0);
    for (const auto& c : cands) {
        const auto v = emb.vector(c.front());
        for (std::size_t d = 0; d < centroid.size(); ++d) centroid[d] += v[d];
    }
    for (auto& x : centroid) x /= static_cast<double>(n);

    std::vector<std::size_t> choice(n);
    for (std::size_t i = 0; i < n; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (auto idx : cands[i]) {
            const double s = cosine(centroid, emb.vector(idx));
            if (s > best) {
                best = s;
                choice[i] = idx;
            }
        }
    }
    if (n > 1) {
        auto mean_to_others = [&](std::size_t i, std::size_t idx) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) s += cosine(emb.vector(idx), emb.vector(choice[j]));
            return s / static_cast<double>(n - 1);
        };
        for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (cands[i].size() < 2) continue;
                std::size_t best_idx = choice[i];
                double best = mean_to_others(i, choice[i]);
                for (auto idx : cands[i]) {
                    const double s = mean_to_others(i, idx);
                    if (s > best) {
                        best = s;
                        best_idx = idx;
                    }
                }
                if (best_idx != choice[i]) {
                    choice[i] = best_idx;
                    changed = true;
                }
            }
            if (!changed) break;
        }
    }
    std::vector<std::string> out;
    out.reserve(n);
    for (auto idx : choice) out.push_back(emb.token(idx));
    return out;
}

std::vector<double> compactness(std::span<const std::vector<float>> vectors) {
    const std::size_t n = vectors.size();
    if (n < 3) throw std::invalid_argument("compactness needs at least 3 elements");
    std::vector<double> row(n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = cosine(vectors[i], vectors[j]);
            row[i] += s;
            row[j] += s;
            total += 2.0 * s;
        }
    // Ordered pairs of W \ {w}: all ordered pairs minus the 2 * row(w) touching w.
    const double pairs = static_cast<double>((n - 1) * (n - 2));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (total - 2.0 * row[i]) / pairs;
    return out;
}

std::vector<double> compactness(const EmbeddingMatrix& emb, std::span<const std::string> resolved_tokens) {
    std::vector<std::vector<float>> vecs;
    for (const auto& t : resolved_tokens) {
        auto v = emb.vector(t);
        vecs.emplace_back(v.begin(), v.end());
    }
    return compactness(vecs);
}

OutlierResult detect_outlier(const EmbeddingMatrix& emb, const OutlierCase& c) {
    std::vector<std::string> all = c.elements;
    all.push_back(c.outlier);
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) throw GroupError("group elements must be distinct");
    if (all.size() < 3) throw GroupError("group needs at least 3 words");

    std::vector<std::pair<std::string, double>> scored;
    for (std::size_t w = 0; w < all.size(); ++w) {
        std::vector<std::string> rest;
        for (std::size_t i = 0; i < all.size(); ++i)
            if (i != w) rest.push_back(all[i]);
        std::vector<std::string> tokens;
        try {
            tokens = resolve_prototypes(emb, rest);
        } catch (const OovError& e) {
            throw GroupError(e.what());
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < tokens.size(); ++i)
            for (std::size_t j = 0; j < tokens.size(); ++j)
                if (i != j) sum += cosine(emb.vector(tokens[i]), emb.vector(tokens[j]));
        const double n = static_cast<double>(tokens.size());
        scored.emplace_back(all[w], sum / (n * n - n));
    }
    // An element whose removal leaves a more compact set is more outlying, so
    // the most compact set (highest c) is ranked last.
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.second != b.second ? a.second < b.second : a.first < b.first; });
    OutlierResult r;
    r.group_size = all.size();
    r.predicted = scored.back().first;
    for (std::size_t i = 0; i < scored.size(); ++i)
        if (scored[i].first == c.outlier) r.outlier_position = i;
    r.ranking = std::move(scored);
    return r;
}

OutlierSummary opp_and_accuracy(std::span<const OutlierResult> results) {
    if (results.empty()) throw std::invalid_argument("opp_and_accuracy: no results");
    double opp = 0.0;
    std::size_t correct = 0;
    for (const auto& r : results) {
        opp += static_cast<double>(r.outlier_position) / static_cast<double>(r.group_size - 1);
        if (r.outlier_position == r.group_size - 1) ++correct;
    }
    const double n = static_cast<double>(results.size());
    return {opp / n * 100.0, static_cast<double>(correct) / n * 100.0};
}

std::vector<OutlierCase> expand_groups(std::span<const OutlierGroup> groups) {
    std::vector<OutlierCase> out;
    for (const auto& g : groups) {
        std::vector<std::string> elements = g.ingroup;
        elements.push_back(g.distractor);
        for (const auto& o : g.outliers) out.push_back({elements, o});
    }
    return out;
}

std::vector<OutlierGroup> load_outlier_groups(const std::string& path) {
    std::vector<OutlierGroup> out;
    try {
        auto j = nlohmann::json::parse(detail::read_file(path));
        for (const auto& g : j) {
            OutlierGroup og{g.at("ingroup").get<std::vector<std::string>>(), g.at("distractor").get<std::string>(),
                            g.at("outliers").get<std::vector<std::string>>()};
            if (og.ingroup.size() != 7 || og.outliers.size() != 8)
                throw IoError(path + ": each group needs 7 in-group words, 1 distractor and 8 outliers");
            std::set<std::string> seen(og.ingroup.begin(), og.ingroup.end());
            seen.insert(og.distractor);
            seen.insert(og.outliers.begin(), og.outliers.end());
            if (seen.size() != 16) throw IoError(path + ": group words must be distinct");
            out.push_back(std::move(og));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    return out;
}

// ---------------------------------------------------------------- clustering

namespace {

double pairs(double n) { return n * (n - 1.0) / 2.0; }

struct Contingency {
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> joint;
    std::map<std::uint32_t, double> gold, pred;
    double n = 0.0;
};

Contingency contingency(std::span<const std::uint32_t> gold, std::span<const std::uint32_t> predicted) {
    if (gold.size() != predicted.size()) throw std::invalid_argument("gold and predicted sizes differ");
    Contingency c;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        c.joint[{gold[i], predicted[i]}] += 1.0;
        c.gold[gold[i]] += 1.0;
        c.pred[predicted[i]] += 1.0;
    }
    c.n = static_cast<double>(gold.size());
    return c;
}

double entropy(const std::map<std::uint32_t, double>& counts, double n) {
    double h = 0.0;
    for (const auto& [_, c] : counts) h -= c / n * std::log(c / n);
    return h;
}

}  // namespace

PairedScore paired_fscore(std::span<const std::uint32_t> gold, std::span<const std::uint32_t> predicted) {
    const auto c = contingency(gold, predicted);
    double tp = 0.0, gold_pairs = 0.0, pred_pairs = 0.0;
    for (const auto& [_, v] : c.joint) tp += pairs(v);
    for (const auto& [_, v] : c.gold) gold_pairs += pairs(v);
    for (const auto& [_, v] : c.pred) pred_pairs += pairs(v);
    PairedScore s;
    s.precision = pred_pairs > 0 ? tp / pred_pairs : (gold_pairs == 0 ? 1.0 : 0.0);
    s.recall = gold_pairs > 0 ? tp / gold_pairs : (pred_pairs == 0 ? 1.0 : 0.0);
    s.fscore = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

VMeasure v_measure(std::span<const std::uint32_t> gold, std::span<const std::uint32_t> predicted) {
    const auto c = contingency(gold, predicted);
    VMeasure m;
    if (c.n == 0) return {1.0, 1.0, 1.0};
    double h_gold_given_pred = 0.0, h_pred_given_gold = 0.0;
    for (const auto& [key, v] : c.joint) {
        h_gold_given_pred -= v / c.n * std::log(v / c.pred.at(key.second));
        h_pred_given_gold -= v / c.n * std::log(v / c.gold.at(key.first));
    }
    const double h_gold = entropy(c.gold, c.n), h_pred = entropy(c.pred, c.n);
    m.homogeneity = h_gold == 0.0 ? 1.0 : 1.0 - h_gold_given_pred / h_gold;
    m.completeness = h_pred == 0.0 ? 1.0 : 1.0 - h_pred_given_gold / h_pred;
    const double s = m.homogeneity + m.completeness;
    m.v = s > 0 ? 2.0 * m.homogeneity * m.completeness / s : 0.0;
    return m;
}

std::map<std::uint32_t, std::string> best_many_to_one_map(std::span<const std::string> gold,
                                                          std::span<const std::uint32_t> predicted) {
    if (gold.size() != predicted.size()) throw std::invalid_argument("gold and predicted sizes differ");
    std::map<std::uint32_t, std::map<std::string, std::size_t>> votes;
    for (std::size_t i = 0; i < gold.size(); ++i) ++votes[predicted[i]][gold[i]];
    std::map<std::uint32_t, std::string> out;
    for (const auto& [cluster, labels] : votes) {
        const std::string* best = nullptr;
        std::size_t best_n = 0;
        for (const auto& [label, n] : labels)
            if (n > best_n) {
                best_n = n;
                best = &label;
            }
        out[cluster] = *best;
    }
    return out;
}

double tagging_f1(std::span<const std::string> gold, std::span<const std::uint32_t> predicted,
                  const std::map<std::uint32_t, std::string>& cluster_to_label) {
    if (gold.size() != predicted.size()) throw std::invalid_argument("gold and predicted sizes differ");
    if (gold.empty()) return 0.0;
    std::map<std::string, std::array<double, 3>> per_label;  // tp, fp, fn
    for (std::size_t i = 0; i < gold.size(); ++i) {
        auto it = cluster_to_label.find(predicted[i]);
        if (it == cluster_to_label.end())
            throw std::invalid_argument("cluster " + std::to_string(predicted[i]) + " has no label mapping");
        if (it->second == gold[i]) {
            per_label[gold[i]][0] += 1;
        } else {
            per_label[it->second][1] += 1;
            per_label[gold[i]][2] += 1;
        }
    }
    double tp = 0, fp = 0, fn = 0;
    for (const auto& [_, c] : per_label) {
        tp += c[0];
        fp += c[1];
        fn += c[2];
    }
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

}  // namespace wsi

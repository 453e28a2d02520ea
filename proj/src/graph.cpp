#include "wsi/graph.hpp"

#include <algorithm>

#include "wsi/error.hpp"

namespace wsi {

WeightedGraph WeightedGraph::Builder::build() && {
    WeightedGraph g;
    g.rows_ = std::move(rows_);
    g.degrees_.assign(g.rows_.size(), 0.0);
    for (std::size_t u = 0; u < g.rows_.size(); ++u) {
        auto& row = g.rows_[u];
        std::sort(row.begin(), row.end(), [](const Arc& a, const Arc& b) { return a.to < b.to; });
        std::size_t out = 0;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (out > 0 && row[out - 1].to == row[i].to)
                row[out - 1].weight += row[i].weight;
            else
                row[out++] = row[i];
        }
        row.resize(out);
        for (const auto& a : row) g.degrees_[u] += a.weight;
        g.two_m_ += g.degrees_[u];
    }
    return g;
}

double WeightedGraph::weight(std::uint32_t u, std::uint32_t v) const noexcept {
    const auto& row = rows_[u];
    auto it = std::lower_bound(row.begin(), row.end(), v, [](const Arc& a, std::uint32_t x) { return a.to < x; });
    return (it != row.end() && it->to == v) ? it->weight : 0.0;
}

Partition Partition::singletons(std::size_t n) {
    Partition p;
    p.community.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.community[i] = static_cast<std::uint32_t>(i);
    p.count = static_cast<std::uint32_t>(n);
    return p;
}

Partition Partition::all_in_one(std::size_t n) {
    Partition p;
    p.community.assign(n, 0);
    p.count = n ? 1 : 0;
    return p;
}

Partition Partition::from_labels(std::span<const std::uint32_t> labels) {
    Partition p;
    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    p.community.reserve(labels.size());
    for (auto l : labels) {
        auto [it, fresh] = remap.emplace(l, p.count);
        if (fresh) ++p.count;
        p.community.push_back(it->second);
    }
    return p;
}

std::vector<std::vector<std::uint32_t>> Partition::members() const {
    std::vector<std::vector<std::uint32_t>> out(count);
    for (std::size_t u = 0; u < community.size(); ++u) out[community[u]].push_back(static_cast<std::uint32_t>(u));
    return out;
}

double modularity(const WeightedGraph& g, const Partition& p, double resolution) {
    const double two_m = 2.0 * g.total_weight();
    if (two_m <= 0.0) throw ModularityUndefined("modularity is undefined on a graph with no edges");
    std::vector<double> inside(p.count, 0.0), total(p.count, 0.0);
    for (std::uint32_t u = 0; u < g.size(); ++u) {
        const auto cu = p.community[u];
        total[cu] += g.degree(u);
        for (const auto& a : g.neighbors(u))
            if (p.community[a.to] == cu) inside[cu] += a.weight;
    }
    double q = 0.0;
    for (std::uint32_t c = 0; c < p.count; ++c) q += inside[c] - resolution * total[c] * total[c] / two_m;
    return q / two_m;
}

std::int64_t SubstituteGraph::node_of(LemmaId lemma) const {
    auto it = index_.find(lemma);
    return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

double SubstituteGraph::weight(LemmaId u, LemmaId v) const {
    auto a = node_of(u), b = node_of(v);
    if (a < 0 || b < 0) return 0.0;
    return graph_.weight(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
}

double SubstituteGraph::degree(LemmaId u) const {
    auto a = node_of(u);
    return a < 0 ? 0.0 : graph_.degree(static_cast<std::uint32_t>(a));
}

SubstituteGraph build_graph(std::span<const SubstituteList> instances) {
    SubstituteGraph sg;
    for (const auto& set : instances)
        for (LemmaId l : set) sg.nodes_.push_back(l);
    std::sort(sg.nodes_.begin(), sg.nodes_.end());
    sg.nodes_.erase(std::unique(sg.nodes_.begin(), sg.nodes_.end()), sg.nodes_.end());
    for (std::size_t i = 0; i < sg.nodes_.size(); ++i) sg.index_.emplace(sg.nodes_[i], static_cast<std::uint32_t>(i));

    WeightedGraph::Builder b(sg.nodes_.size());
    std::uint32_t idx[kMaxSubstitutes];
    for (const auto& set : instances) {
        for (std::size_t i = 0; i < set.size(); ++i) idx[i] = sg.index_.at(set[i]);
        for (std::size_t i = 0; i < set.size(); ++i)
            for (std::size_t j = i + 1; j < set.size(); ++j)
                if (idx[i] != idx[j]) b.add_edge(idx[i], idx[j], 1.0);
    }
    sg.graph_ = std::move(b).build();
    return sg;
}

}  // namespace wsi

#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "wsi/types.hpp"

namespace wsi {

/// Symmetric weighted adjacency over dense node ids 0..n-1. Row u holds
/// (v, A_uv) sorted by v; a self-loop appears once with its full A_uu, so
/// degree(u) = sum of the row and 2m = sum of all degrees.
class WeightedGraph {
public:
    struct Arc {
        std::uint32_t to;
        double weight;
    };

    class Builder {
    public:
        explicit Builder(std::size_t n) : rows_(n) {}
        /// Adds w to A_uv only. Call twice (u,v) and (v,u) for an undirected edge.
        void add_arc(std::uint32_t u, std::uint32_t v, double w) { rows_[u].push_back({v, w}); }
        void add_edge(std::uint32_t u, std::uint32_t v, double w) {
            add_arc(u, v, w);
            if (u != v) add_arc(v, u, w);
        }
        WeightedGraph build() &&;

    private:
        std::vector<std::vector<Arc>> rows_;
    };

    WeightedGraph() = default;

    std::size_t size() const noexcept { return rows_.size(); }
    std::span<const Arc> neighbors(std::uint32_t u) const noexcept { return rows_[u]; }
    double degree(std::uint32_t u) const noexcept { return degrees_[u]; }
    /// m: half the sum of all degrees.
    double total_weight() const noexcept { return two_m_ / 2.0; }
    double weight(std::uint32_t u, std::uint32_t v) const noexcept;

private:
    std::vector<std::vector<Arc>> rows_;
    std::vector<double> degrees_;
    double two_m_ = 0.0;
};

/// node -> community, ids dense in 0..count-1.
struct Partition {
    std::vector<std::uint32_t> community;
    std::uint32_t count = 0;

    static Partition singletons(std::size_t n);
    static Partition all_in_one(std::size_t n);
    /// Relabels to dense ids in order of first appearance.
    static Partition from_labels(std::span<const std::uint32_t> labels);
    std::vector<std::vector<std::uint32_t>> members() const;
};

/// Q = (1/2m) sum_{u,v} [A_uv - resolution * k_u k_v / 2m] delta(c_u, c_v) over
/// ordered pairs. Throws ModularityUndefined when m = 0.
double modularity(const WeightedGraph& g, const Partition& p, double resolution = 1.0);

/// Substitute co-occurrence graph of one lemma. Nodes are the distinct
/// substitutes in ascending lemma-id order; W(u,v) counts the instances whose
/// set holds both u and v.
class SubstituteGraph {
public:
    SubstituteGraph() = default;

    const WeightedGraph& graph() const noexcept { return graph_; }
    std::span<const LemmaId> nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    /// Dense node index, or -1.
    std::int64_t node_of(LemmaId lemma) const;
    double weight(LemmaId u, LemmaId v) const;
    double degree(LemmaId u) const;
    double total_weight() const noexcept { return graph_.total_weight(); }

private:
    friend SubstituteGraph build_graph(std::span<const SubstituteList> instances);
    std::vector<LemmaId> nodes_;
    std::unordered_map<LemmaId, std::uint32_t> index_;
    WeightedGraph graph_;
};

SubstituteGraph build_graph(std::span<const SubstituteList> instances);

}  // namespace wsi

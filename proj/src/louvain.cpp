#include "wsi/louvain.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "wsi/error.hpp"
#include "wsi/rng.hpp"

namespace wsi {

namespace {

constexpr double kTieEps = 1e-12;

class LocalMover {
public:
    LocalMover(const WeightedGraph& g, double resolution, std::vector<std::uint32_t> init)
        : g_(g), resolution_(resolution), two_m_(2.0 * g.total_weight()), comm_(std::move(init)),
          total_(g.size(), 0.0), size_(g.size(), 0), neigh_w_(g.size(), 0.0) {
        for (std::uint32_t u = 0; u < g.size(); ++u) {
            total_[comm_[u]] += g.degree(u);
            ++size_[comm_[u]];
        }
        for (std::uint32_t c = 0; c < g.size(); ++c)
            if (size_[c] == 0) free_.insert(c);
    }

    /// One pass over `order`; returns the number of moved nodes.
    std::size_t sweep(const std::vector<std::uint32_t>& order) {
        std::size_t moves = 0;
        for (auto u : order)
            if (move_node(u)) ++moves;
        return moves;
    }

    const std::vector<std::uint32_t>& communities() const noexcept { return comm_; }

private:
    bool move_node(std::uint32_t u) {
        const double k_u = g_.degree(u);
        const std::uint32_t own = comm_[u];

        touched_.clear();
        for (const auto& a : g_.neighbors(u)) {
            if (a.to == u) continue;
            const auto c = comm_[a.to];
            if (neigh_w_[c] == 0.0) touched_.push_back(c);
            neigh_w_[c] += a.weight;
        }

        total_[own] -= k_u;
        --size_[own];
        auto gain = [&](std::uint32_t c) { return neigh_w_[c] - resolution_ * total_[c] * k_u / two_m_; };

        const double own_gain = gain(own);
        double best_gain = -std::numeric_limits<double>::infinity();
        std::uint32_t best = own;
        auto consider = [&](std::uint32_t c, double gc) {
            if (gc > best_gain + kTieEps || (gc >= best_gain - kTieEps && c < best)) {
                best_gain = std::max(best_gain, gc);
                best = c;
            }
        };
        for (auto c : touched_)
            if (c != own) consider(c, gain(c));
        // Empty community: gain 0. Only distinct from staying if `own` keeps members.
        if (size_[own] > 0 && !free_.empty()) consider(*free_.begin(), 0.0);

        std::uint32_t target = own;
        if (best != own && best_gain > own_gain + kTieEps) target = best;

        for (auto c : touched_) neigh_w_[c] = 0.0;

        total_[target] += k_u;
        if (size_[target]++ == 0) free_.erase(target);
        if (size_[own] == 0) free_.insert(own);
        comm_[u] = target;
        return target != own;
    }

    const WeightedGraph& g_;
    double resolution_;
    double two_m_;
    std::vector<std::uint32_t> comm_;
    std::vector<double> total_;
    std::vector<std::uint32_t> size_;
    std::vector<double> neigh_w_;
    std::vector<std::uint32_t> touched_;
    std::set<std::uint32_t> free_;
};

std::vector<std::uint32_t> shuffled_order(std::size_t n, Rng& rng) {
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform(i)]);
    return order;
}

Partition to_partition(const std::vector<std::uint32_t>& labels) { return Partition::from_labels(labels); }

WeightedGraph aggregate(const WeightedGraph& g, const Partition& p) {
    WeightedGraph::Builder b(p.count);
    for (std::uint32_t u = 0; u < g.size(); ++u)
        for (const auto& a : g.neighbors(u)) b.add_arc(p.community[u], p.community[a.to], a.weight);
    return std::move(b).build();
}

}  // namespace

Partition louvain(const WeightedGraph& g, const LouvainConfig& cfg) {
    const std::size_t n = g.size();
    if (n == 0) throw std::invalid_argument("louvain on an empty graph");
    if (g.total_weight() <= 0.0) return Partition::singletons(n);

    Rng rng(cfg.seed);
    std::vector<std::uint32_t> membership(n);
    std::iota(membership.begin(), membership.end(), 0u);

    WeightedGraph level = g;
    for (std::size_t pass = 0; pass < cfg.max_passes; ++pass) {
        const Partition start = Partition::singletons(level.size());
        const double q_start = modularity(level, start, cfg.resolution);
        LocalMover mover(level, cfg.resolution, start.community);
        const auto order = shuffled_order(level.size(), rng);
        double q_prev = q_start;
        for (std::size_t s = 0; s < 1000; ++s) {
            if (mover.sweep(order) == 0) break;
            const double q = modularity(level, to_partition(mover.communities()), cfg.resolution);
            const double gained = q - q_prev;
            q_prev = q;
            if (gained < cfg.min_gain) break;
        }
        const Partition found = to_partition(mover.communities());
        for (auto& m : membership) m = found.community[m];
        if (found.count == level.size() || q_prev - q_start < cfg.min_gain) break;
        level = aggregate(level, found);
    }

    // Refine on the original nodes so the result is a local optimum under
    // single-node moves, not only at the coarsest level.
    LocalMover refine(g, cfg.resolution, to_partition(membership).community);
    const auto order = shuffled_order(n, rng);
    for (std::size_t s = 0; s < 1000; ++s)
        if (refine.sweep(order) == 0) break;
    return to_partition(refine.communities());
}

double best_single_move_gain(const WeightedGraph& g, const Partition& p, double resolution) {
    const double q0 = modularity(g, p, resolution);
    double best = -std::numeric_limits<double>::infinity();
    Partition trial = p;
    for (std::uint32_t u = 0; u < g.size(); ++u) {
        const auto own = p.community[u];
        for (std::uint32_t c = 0; c <= p.count; ++c) {
            if (c == own) continue;
            trial.community[u] = c;
            trial.count = std::max(p.count, c + 1);
            best = std::max(best, modularity(g, Partition::from_labels(trial.community), resolution) - q0);
        }
        trial.community[u] = own;
        trial.count = p.count;
    }
    return best;
}

}  // namespace wsi

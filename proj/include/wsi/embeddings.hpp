#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wsi/types.hpp"

namespace wsi {

enum class TrainMode { Cbow, SkipGram };

struct EmbeddingConfig {
    std::size_t dim = 100;
    std::size_t window = 5;
    TrainMode mode = TrainMode::Cbow;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    double learning_rate = 0.025;
    double min_learning_rate = 1e-4;
    /// Frequent-token subsampling threshold; 0 disables.
    double sample = 1e-3;
    std::size_t min_count = 5;
    std::uint64_t seed = 1;
    /// 1 = deterministic. More threads update shared parameters without
    /// synchronization and are not bit-reproducible.
    std::size_t threads = 1;
};

/// Dense input vectors for plain and sense-suffixed tokens in one space.
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::vector<std::string> tokens, std::vector<float> data, std::size_t dim);

    std::size_t size() const noexcept { return tokens_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    const std::string& token(std::size_t i) const { return tokens_.at(i); }
    const std::vector<float>& data() const noexcept { return data_; }

    std::optional<std::size_t> find(std::string_view token) const;
    bool contains(std::string_view token) const { return find(token).has_value(); }
    std::span<const float> vector(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    /// Throws OovError.
    std::span<const float> vector(std::string_view token) const;

    /// `surface@k` entries of a word ordered by k.
    const std::vector<std::pair<SenseId, std::size_t>>& senses_of(std::string_view surface) const;
    /// Sense entries of the word if it has any, otherwise the plain token if
    /// present, otherwise empty.
    std::vector<std::size_t> candidates(std::string_view word) const;

    bool operator==(const EmbeddingMatrix& o) const {
        return dim_ == o.dim_ && tokens_ == o.tokens_ && data_ == o.data_;
    }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
    };
    std::vector<std::string> tokens_;
    std::vector<float> data_;
    std::size_t dim_ = 0;
    std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
    std::unordered_map<std::string, std::vector<std::pair<SenseId, std::size_t>>, Hash, std::equal_to<>> senses_;
};

struct TrainStats {
    std::vector<double> epoch_loss;
    std::size_t vocab_size = 0;
    std::uint64_t trained_tokens = 0;
};

using Corpus = std::vector<std::vector<std::string>>;

/// Whitespace-tokenized lines.
Corpus read_corpus(const std::string& path);
Corpus parse_corpus(std::string_view text);

/// Negative-sampling word2vec. Throws TrainError when no token survives min_count.
EmbeddingMatrix train(const Corpus& corpus, const EmbeddingConfig& cfg, TrainStats* stats = nullptr);

/// Loss of one (hidden, positive, negatives) group:
/// -log sigma(h.pos) - sum_n log sigma(-h.n).
template <class Real>
struct PairGradient {
    Real loss{};
    std::vector<Real> d_hidden;
    std::vector<Real> d_positive;
    std::vector<std::vector<Real>> d_negatives;
};

template <class Real>
Real log_sigmoid(Real x) {
    return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

template <class Real>
Real sigmoid(Real x) {
    if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
    const Real e = std::exp(x);
    return e / (Real(1) + e);
}

template <class Real>
Real negative_sampling_loss(std::span<const Real> h, std::span<const Real> pos,
                            const std::vector<std::vector<Real>>& negs) {
    auto dot = [&](std::span<const Real> v) {
        Real s = 0;
        for (std::size_t i = 0; i < h.size(); ++i) s += h[i] * v[i];
        return s;
    };
    Real loss = -log_sigmoid(dot(pos));
    for (const auto& n : negs) loss -= log_sigmoid(-dot(n));
    return loss;
}

template <class Real>
PairGradient<Real> negative_sampling_gradient(std::span<const Real> h, std::span<const Real> pos,
                                              const std::vector<std::vector<Real>>& negs) {
    const std::size_t d = h.size();
    auto dot = [&](std::span<const Real> v) {
        Real s = 0;
        for (std::size_t i = 0; i < d; ++i) s += h[i] * v[i];
        return s;
    };
    PairGradient<Real> g;
    g.loss = negative_sampling_loss(h, pos, negs);
    g.d_hidden.assign(d, Real(0));
    // d/df [-log sigma(f)] = sigma(f) - 1 ; d/df [-log sigma(-f)] = sigma(f)
    const Real cp = sigmoid(dot(pos)) - Real(1);
    g.d_positive.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        g.d_hidden[i] += cp * pos[i];
        g.d_positive[i] = cp * h[i];
    }
    for (const auto& n : negs) {
        const Real cn = sigmoid(dot(std::span<const Real>(n)));
        std::vector<Real> dn(d);
        for (std::size_t i = 0; i < d; ++i) {
            g.d_hidden[i] += cn * n[i];
            dn[i] = cn * h[i];
        }
        g.d_negatives.push_back(std::move(dn));
    }
    return g;
}

/// Cosine of raw vectors; 0 if either is zero.
double cosine(std::span<const float> a, std::span<const float> b);
double cosine(std::span<const double> a, std::span<const float> b);
/// Throws OovError.
double cosine(const EmbeddingMatrix& emb, std::string_view t1, std::string_view t2);

enum class NeighborFilter { All, SenseTaggedOnly };

struct Neighbor {
    std::string token;
    double cosine = 0.0;
};

/// Top-k by cosine, ties by token. The query and, unless requested, every
/// other form of the same surface word are excluded.
std::vector<Neighbor> nearest_neighbors(const EmbeddingMatrix& emb, std::string_view token, std::size_t k,
                                        NeighborFilter filter = NeighborFilter::All,
                                        bool include_same_surface = false);

/// Mean of the in-vocabulary token vectors; OOV tokens are skipped.
/// Throws OovError if none is in vocabulary.
std::vector<double> context_vector(const EmbeddingMatrix& emb, std::span<const std::string> tokens);

/// The word's sense token closest to the context; ties to the lowest sense.
std::string select_sense(const EmbeddingMatrix& emb, std::string_view word, std::span<const double> context);

/// Text format: "N dim" header, then "token v1 ... vdim" per line.
void save_vectors_text(const EmbeddingMatrix& emb, const std::string& path);
/// Binary format: "N dim\n" header, then "token " + dim little-endian float32 + "\n".
void save_vectors_binary(const EmbeddingMatrix& emb, const std::string& path);
EmbeddingMatrix load_vectors_text(const std::string& path);
EmbeddingMatrix load_vectors_binary(const std::string& path);
/// Chooses by extension: ".bin" binary, anything else text.
EmbeddingMatrix load_vectors(const std::string& path);
void save_vectors(const EmbeddingMatrix& emb, const std::string& path);

}  // namespace wsi

#include "wsi/embeddings.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "binary_io.hpp"
#include "wsi/error.hpp"
#include "wsi/rng.hpp"
#include "wsi/tagger.hpp"

namespace wsi {

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> tokens, std::vector<float> data, std::size_t dim)
    : tokens_(std::move(tokens)), data_(std::move(data)), dim_(dim) {
    if (dim_ == 0 && !tokens_.empty()) throw std::invalid_argument("embedding dim must be positive");
    if (data_.size() != tokens_.size() * dim_) throw std::invalid_argument("embedding data size mismatch");
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (!index_.emplace(tokens_[i], i).second) throw std::invalid_argument("duplicate token " + tokens_[i]);
        auto parsed = parse_token(tokens_[i]);
        if (parsed.sense) senses_[parsed.surface].emplace_back(*parsed.sense, i);
    }
    for (auto& [_, list] : senses_) std::sort(list.begin(), list.end());
}

std::optional<std::size_t> EmbeddingMatrix::find(std::string_view token) const {
    if (auto it = index_.find(token); it != index_.end()) return it->second;
    return std::nullopt;
}

std::span<const float> EmbeddingMatrix::vector(std::string_view token) const {
    auto i = find(token);
    if (!i) throw OovError("token not in embedding vocabulary: " + std::string(token));
    return vector(*i);
}

const std::vector<std::pair<SenseId, std::size_t>>& EmbeddingMatrix::senses_of(std::string_view surface) const {
    static const std::vector<std::pair<SenseId, std::size_t>> none;
    auto it = senses_.find(surface);
    return it == senses_.end() ? none : it->second;
}

std::vector<std::size_t> EmbeddingMatrix::candidates(std::string_view word) const {
    std::vector<std::size_t> out;
    for (const auto& [_, idx] : senses_of(word)) out.push_back(idx);
    if (out.empty())
        if (auto i = find(escape_surface(word))) out.push_back(*i);
    return out;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct PlainAccess {
    static float load(const float& x) { return x; }
    static void store(float& x, float v) { x = v; }
};

/// Shared-parameter updates from several workers; word2vec-style lock-free
/// training, but without data races in the C++ memory model.
struct RelaxedAccess {
    static float load(const float& x) {
        return std::atomic_ref<float>(const_cast<float&>(x)).load(std::memory_order_relaxed);
    }
    static void store(float& x, float v) { std::atomic_ref<float>(x).store(v, std::memory_order_relaxed); }
};

struct TrainVocab {
    std::vector<std::string> tokens;
    std::vector<std::uint64_t> counts;
    std::unordered_map<std::string, std::uint32_t> index;
    std::uint64_t total = 0;
};

TrainVocab build_train_vocab(const Corpus& corpus, std::size_t min_count) {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& s : corpus)
        for (const auto& t : s) ++counts[t];
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    for (auto& [t, c] : counts)
        if (c >= min_count) kept.emplace_back(t, c);
    std::sort(kept.begin(), kept.end(),
              [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
    TrainVocab v;
    for (auto& [t, c] : kept) {
        v.index.emplace(t, static_cast<std::uint32_t>(v.tokens.size()));
        v.tokens.push_back(t);
        v.counts.push_back(c);
        v.total += c;
    }
    return v;
}

class NegativeTable {
public:
    explicit NegativeTable(const std::vector<std::uint64_t>& counts) : cumulative_(counts.size()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            acc += std::pow(static_cast<double>(counts[i]), 0.75);
            cumulative_[i] = acc;
        }
    }
    std::uint32_t draw(Rng& rng) const {
        const double x = rng.uniform_real() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
        if (it == cumulative_.end()) --it;
        return static_cast<std::uint32_t>(it - cumulative_.begin());
    }

private:
    std::vector<double> cumulative_;
};

struct Trainer {
    const EmbeddingConfig& cfg;
    const TrainVocab& vocab;
    const NegativeTable& negatives;
    std::vector<float>& in;
    std::vector<float>& out;
    std::atomic<std::uint64_t>& processed;
    std::uint64_t planned;

    double learning_rate() const {
        const double progress = std::min(1.0, static_cast<double>(processed.load(std::memory_order_relaxed)) /
                                                  static_cast<double>(planned + 1));
        return cfg.learning_rate - (cfg.learning_rate - cfg.min_learning_rate) * progress;
    }

    /// One hidden vector against the positive target and sampled negatives.
    /// Accumulates lr * (-dLoss/dh) into `grad` and updates output vectors.
    template <class Access>
    double group_step(const float* hidden, std::uint32_t positive, Rng& rng, float lr, float* grad) {
        const std::size_t d = cfg.dim;
        double loss = 0.0;
        for (std::size_t k = 0; k <= cfg.negatives; ++k) {
            std::uint32_t target;
            float label;
            if (k == 0) {
                target = positive;
                label = 1.0f;
            } else {
                target = negatives.draw(rng);
                if (target == positive) continue;
                label = 0.0f;
            }
            float* v = out.data() + static_cast<std::size_t>(target) * d;
            float f = 0.0f;
            for (std::size_t i = 0; i < d; ++i) f += hidden[i] * Access::load(v[i]);
            loss -= log_sigmoid(static_cast<double>(label > 0 ? f : -f));
            const float g = (label - sigmoid(f)) * lr;
            for (std::size_t i = 0; i < d; ++i) {
                const float vi = Access::load(v[i]);
                grad[i] += g * vi;
                Access::store(v[i], vi + g * hidden[i]);
            }
        }
        return loss;
    }

    template <class Access>
    void run(const Corpus& corpus, std::size_t begin, std::size_t end, std::uint64_t seed, double& loss_sum,
             std::uint64_t& groups) {
        Rng rng(seed);
        const std::size_t d = cfg.dim;
        std::vector<float> hidden(d), grad(d);
        std::vector<std::uint32_t> sent;
        std::vector<std::uint32_t> ctx;
        const double threshold = cfg.sample * static_cast<double>(vocab.total);
        for (std::size_t s = begin; s < end; ++s) {
            sent.clear();
            for (const auto& t : corpus[s]) {
                auto it = vocab.index.find(t);
                if (it == vocab.index.end()) continue;
                if (cfg.sample > 0.0) {
                    const double c = static_cast<double>(vocab.counts[it->second]);
                    const double keep = (std::sqrt(c / threshold) + 1.0) * threshold / c;
                    if (keep < rng.uniform_real()) continue;
                }
                sent.push_back(it->second);
            }
            const float lr = static_cast<float>(learning_rate());
            for (std::size_t pos = 0; pos < sent.size(); ++pos) {
                const std::size_t reduce = rng.uniform(cfg.window);
                const std::size_t span = cfg.window - reduce;
                ctx.clear();
                const std::size_t lo = pos >= span ? pos - span : 0;
                const std::size_t hi = std::min(sent.size(), pos + span + 1);
                for (std::size_t c = lo; c < hi; ++c)
                    if (c != pos) ctx.push_back(sent[c]);
                if (ctx.empty()) continue;

                if (cfg.mode == TrainMode::Cbow) {
                    std::fill(hidden.begin(), hidden.end(), 0.0f);
                    for (auto c : ctx) {
                        const float* v = in.data() + static_cast<std::size_t>(c) * d;
                        for (std::size_t i = 0; i < d; ++i) hidden[i] += Access::load(v[i]);
                    }
                    const float inv = 1.0f / static_cast<float>(ctx.size());
                    for (auto& h : hidden) h *= inv;
                    std::fill(grad.begin(), grad.end(), 0.0f);
                    loss_sum += group_step<Access>(hidden.data(), sent[pos], rng, lr, grad.data());
                    ++groups;
                    for (auto c : ctx) {
                        float* v = in.data() + static_cast<std::size_t>(c) * d;
                        for (std::size_t i = 0; i < d; ++i) Access::store(v[i], Access::load(v[i]) + grad[i]);
                    }
                } else {
                    for (auto c : ctx) {
                        float* v = in.data() + static_cast<std::size_t>(c) * d;
                        for (std::size_t i = 0; i < d; ++i) hidden[i] = Access::load(v[i]);
                        std::fill(grad.begin(), grad.end(), 0.0f);
                        loss_sum += group_step<Access>(hidden.data(), sent[pos], rng, lr, grad.data());
                        ++groups;
                        for (std::size_t i = 0; i < d; ++i) Access::store(v[i], Access::load(v[i]) + grad[i]);
                    }
                }
            }
            processed.fetch_add(corpus[s].size(), std::memory_order_relaxed);
        }
    }
};

}  // namespace

EmbeddingMatrix train(const Corpus& corpus, const EmbeddingConfig& cfg, TrainStats* stats) {
    if (cfg.dim == 0 || cfg.window == 0 || cfg.negatives == 0 || cfg.epochs == 0)
        throw TrainError("dim, window, negatives and epochs must be positive");
    if (corpus.empty()) throw TrainError("empty training corpus");
    const TrainVocab vocab = build_train_vocab(corpus, cfg.min_count);
    if (vocab.tokens.empty()) throw TrainError("no token reaches min_count " + std::to_string(cfg.min_count));

    const std::size_t n = vocab.tokens.size(), d = cfg.dim;
    std::vector<float> in(n * d), out(n * d, 0.0f);
    {
        Rng init(derive_seed(cfg.seed, 0));
        for (auto& x : in) x = static_cast<float>((init.uniform_real() - 0.5) / static_cast<double>(d));
    }
    const NegativeTable table(vocab.counts);
    std::uint64_t corpus_tokens = 0;
    for (const auto& s : corpus) corpus_tokens += s.size();

    std::atomic<std::uint64_t> processed{0};
    Trainer trainer{cfg, vocab, table, in, out, processed, corpus_tokens * cfg.epochs};
    const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, corpus.size()));
    if (stats) *stats = TrainStats{{}, n, 0};

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<double> loss(threads, 0.0);
        std::vector<std::uint64_t> groups(threads, 0);
        if (threads == 1) {
            trainer.run<PlainAccess>(corpus, 0, corpus.size(), derive_seed(cfg.seed, epoch + 1), loss[0], groups[0]);
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t t = 0; t < threads; ++t) {
                const std::size_t b = corpus.size() * t / threads, e = corpus.size() * (t + 1) / threads;
                pool.emplace_back([&, t, b, e] {
                    trainer.run<RelaxedAccess>(corpus, b, e, derive_seed(cfg.seed, (epoch + 1) * 1000003 + t), loss[t],
                                               groups[t]);
                });
            }
        }
        if (stats) {
            const double l = std::accumulate(loss.begin(), loss.end(), 0.0);
            const auto g = std::accumulate(groups.begin(), groups.end(), std::uint64_t{0});
            stats->epoch_loss.push_back(g ? l / static_cast<double>(g) : 0.0);
        }
    }
    if (stats) stats->trained_tokens = processed.load();
    for (float x : in)
        if (!std::isfinite(x)) throw TrainError("training diverged (non-finite vector entry)");
    return EmbeddingMatrix(vocab.tokens, std::move(in), d);
}

Corpus parse_corpus(std::string_view text) {
    Corpus corpus;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::vector<std::string> sent;
        std::size_t i = pos;
        while (i < nl) {
            while (i < nl && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r')) ++i;
            std::size_t j = i;
            while (j < nl && text[j] != ' ' && text[j] != '\t' && text[j] != '\r') ++j;
            if (j > i) sent.emplace_back(text.substr(i, j - i));
            i = j;
        }
        if (!sent.empty()) corpus.push_back(std::move(sent));
        pos = nl + 1;
    }
    return corpus;
}

Corpus read_corpus(const std::string& path) { return parse_corpus(detail::read_file(path)); }

// ---------------------------------------------------------------------------
// Queries

namespace {

template <class A>
double cosine_impl(std::span<const A> a, std::span<const float> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace

double cosine(std::span<const float> a, std::span<const float> b) { return cosine_impl(a, b); }
double cosine(std::span<const double> a, std::span<const float> b) { return cosine_impl(a, b); }

double cosine(const EmbeddingMatrix& emb, std::string_view t1, std::string_view t2) {
    return cosine(emb.vector(t1), emb.vector(t2));
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingMatrix& emb, std::string_view token, std::size_t k,
                                        NeighborFilter filter, bool include_same_surface) {
    const auto q = emb.find(token);
    if (!q) throw OovError("token not in embedding vocabulary: " + std::string(token));
    if (k == 0) return {};
    const std::string surface = parse_token(token).surface;
    const auto qv = emb.vector(*q);
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < emb.size(); ++i) {
        if (i == *q) continue;
        const auto parsed = parse_token(emb.token(i));
        if (filter == NeighborFilter::SenseTaggedOnly && !parsed.sense) continue;
        if (!include_same_surface && parsed.surface == surface) continue;
        scored.emplace_back(cosine(qv, emb.vector(i)), i);
    }
    auto better = [&](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : emb.token(a.second) < emb.token(b.second);
    };
    const std::size_t keep = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), better);
    std::vector<Neighbor> out;
    for (std::size_t i = 0; i < keep; ++i) out.push_back({emb.token(scored[i].second), scored[i].first});
    return out;
}

std::vector<double> context_vector(const EmbeddingMatrix& emb, std::span<const std::string> tokens) {
    std::vector<double> mean(emb.dim(), 0.0);
    std::size_t used = 0;
    for (const auto& t : tokens) {
        auto i = emb.find(t);
        if (!i) continue;
        const auto v = emb.vector(*i);
        for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += v[d];
        ++used;
    }
    if (used == 0) throw OovError("no context token is in the embedding vocabulary");
    for (auto& x : mean) x /= static_cast<double>(used);
    return mean;
}

std::string select_sense(const EmbeddingMatrix& emb, std::string_view word, std::span<const double> context) {
    const auto& senses = emb.senses_of(word);
    if (senses.empty()) throw OovError("no sense entries for " + std::string(word));
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_idx = senses.front().second;
    for (const auto& [_, idx] : senses) {
        const double c = cosine(context, emb.vector(idx));
        if (c > best) {
            best = c;
            best_idx = idx;
        }
    }
    return emb.token(best_idx);
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

std::pair<std::size_t, std::size_t> parse_header(std::string_view line) {
    std::size_t n = 0, d = 0;
    auto sp = line.find(' ');
    if (sp == std::string_view::npos) throw IoError("bad vector file header");
    auto r1 = std::from_chars(line.data(), line.data() + sp, n);
    auto r2 = std::from_chars(line.data() + sp + 1, line.data() + line.size(), d);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || r2.ptr != line.data() + line.size())
        throw IoError("bad vector file header");
    return {n, d};
}

}  // namespace

void save_vectors_text(const EmbeddingMatrix& emb, const std::string& path) {
    std::string out = std::to_string(emb.size()) + " " + std::to_string(emb.dim()) + "\n";
    char buf[64];
    for (std::size_t i = 0; i < emb.size(); ++i) {
        out += emb.token(i);
        for (float x : emb.vector(i)) {
            auto r = std::to_chars(buf, buf + sizeof buf, x);
            out += ' ';
            out.append(buf, r.ptr);
        }
        out += '\n';
    }
    detail::write_file(path, out);
}

void save_vectors_binary(const EmbeddingMatrix& emb, const std::string& path) {
    std::string out = std::to_string(emb.size()) + " " + std::to_string(emb.dim()) + "\n";
    for (std::size_t i = 0; i < emb.size(); ++i) {
        out += emb.token(i);
        out += ' ';
        for (float x : emb.vector(i)) detail::put_f32(out, x);
        out += '\n';
    }
    detail::write_file(path, out);
}

EmbeddingMatrix load_vectors_text(const std::string& path) {
    const std::string data = detail::read_file(path);
    std::string_view view(data);
    auto nl = view.find('\n');
    if (nl == std::string_view::npos) throw IoError(path + ": missing header");
    auto [n, d] = parse_header(view.substr(0, nl));
    std::vector<std::string> tokens;
    std::vector<float> values;
    tokens.reserve(n);
    values.reserve(n * d);
    std::size_t pos = nl + 1;
    for (std::size_t row = 0; row < n; ++row) {
        std::size_t end = view.find('\n', pos);
        if (end == std::string_view::npos) end = view.size();
        std::string_view line = view.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        auto sp = line.find(' ');
        if (sp == std::string_view::npos) throw IoError(path + ": malformed row " + std::to_string(row));
        tokens.emplace_back(line.substr(0, sp));
        const char* p = line.data() + sp;
        const char* e = line.data() + line.size();
        for (std::size_t k = 0; k < d; ++k) {
            while (p < e && *p == ' ') ++p;
            float x;
            auto r = std::from_chars(p, e, x);
            if (r.ec != std::errc{}) throw IoError(path + ": bad float in row " + std::to_string(row));
            values.push_back(x);
            p = r.ptr;
        }
        while (p < e && *p == ' ') ++p;
        if (p != e) throw IoError(path + ": extra values in row " + std::to_string(row));
        pos = end + 1;
    }
    return EmbeddingMatrix(std::move(tokens), std::move(values), d);
}

EmbeddingMatrix load_vectors_binary(const std::string& path) {
    const std::string data = detail::read_file(path);
    std::string_view view(data);
    auto nl = view.find('\n');
    if (nl == std::string_view::npos) throw IoError(path + ": missing header");
    auto [n, d] = parse_header(view.substr(0, nl));
    std::vector<std::string> tokens;
    std::vector<float> values;
    std::size_t pos = nl + 1;
    for (std::size_t row = 0; row < n; ++row) {
        auto sp = view.find(' ', pos);
        if (sp == std::string_view::npos || sp + 1 + 4 * d + 1 > view.size())
            throw IoError(path + ": truncated row " + std::to_string(row));
        tokens.emplace_back(view.substr(pos, sp - pos));
        const auto* p = reinterpret_cast<const unsigned char*>(view.data() + sp + 1);
        for (std::size_t k = 0; k < d; ++k) values.push_back(detail::get_f32(p + 4 * k));
        pos = sp + 1 + 4 * d;
        if (view[pos] != '\n') throw IoError(path + ": missing row terminator");
        ++pos;
    }
    return EmbeddingMatrix(std::move(tokens), std::move(values), d);
}

namespace {
bool is_binary_path(const std::string& path) { return path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0; }
}  // namespace

EmbeddingMatrix load_vectors(const std::string& path) {
    return is_binary_path(path) ? load_vectors_binary(path) : load_vectors_text(path);
}

void save_vectors(const EmbeddingMatrix& emb, const std::string& path) {
    if (is_binary_path(path))
        save_vectors_binary(emb, path);
    else
        save_vectors_text(emb, path);
}

}  // namespace wsi

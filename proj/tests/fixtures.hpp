#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wsi/embeddings.hpp"
#include "wsi/graph.hpp"
#include "wsi/records.hpp"
#include "wsi/rng.hpp"
#include "wsi/synth.hpp"

namespace fixtures {

inline wsi::WeightedGraph to_graph(const oracle::Matrix& a) {
    wsi::WeightedGraph::Builder b(a.size());
    for (std::uint32_t u = 0; u < a.size(); ++u)
        for (std::uint32_t v = 0; v < a.size(); ++v)
            if (a[u][v] != 0) b.add_arc(u, v, a[u][v]);
    return std::move(b).build();
}

/// Symmetric matrix with no self-loops and at least one edge.
inline oracle::Matrix random_matrix(wsi::Rng& rng, std::size_t n, double density, int max_weight) {
    oracle::Matrix a;
    do {
        a.assign(n, std::vector<double>(n, 0.0));
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = u + 1; v < n; ++v)
                if (rng.uniform_real() < density) a[u][v] = a[v][u] = 1.0 + rng.uniform(max_weight);
    } while ([&] {
        for (auto& row : a)
            for (double x : row)
                if (x != 0) return false;
        return true;
    }());
    return a;
}

/// Two disjoint triangles.
inline oracle::Matrix two_triangles() {
    oracle::Matrix a(6, std::vector<double>(6, 0.0));
    auto edge = [&](int u, int v) { a[u][v] = a[v][u] = 1.0; };
    edge(0, 1), edge(1, 2), edge(0, 2), edge(3, 4), edge(4, 5), edge(3, 5);
    return a;
}

inline std::vector<std::uint32_t> random_labels(wsi::Rng& rng, std::size_t n, std::size_t k) {
    std::vector<std::uint32_t> out(n);
    for (auto& x : out) x = static_cast<std::uint32_t>(rng.uniform(k));
    return out;
}

inline wsi::SubstituteRecord random_record(wsi::Rng& rng, std::uint32_t vocab_size) {
    wsi::SubstituteRecord r;
    r.occ = {rng.next() >> rng.uniform(64), static_cast<std::uint32_t>(rng.next()),
             static_cast<std::uint16_t>(rng.next())};
    r.target = static_cast<wsi::LemmaId>(rng.uniform(vocab_size));
    const std::size_t n = 1 + rng.uniform(5);
    while (r.substitutes.size() < n) {
        auto id = static_cast<wsi::LemmaId>(rng.uniform(vocab_size));
        if (id != r.target && !r.substitutes.contains(id)) r.substitutes.push_back(id);
    }
    return r;
}

inline std::vector<float> basis(std::size_t dim, std::size_t i, float scale = 1.0f) {
    std::vector<float> v(dim, 0.0f);
    v[i] = scale;
    return v;
}

inline std::vector<float> add(std::vector<float> a, const std::vector<float>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline wsi::EmbeddingMatrix make_embedding(const std::vector<std::pair<std::string, std::vector<float>>>& rows) {
    std::vector<std::string> tokens;
    std::vector<float> data;
    for (const auto& [t, v] : rows) {
        tokens.push_back(t);
        data.insert(data.end(), v.begin(), v.end());
    }
    return wsi::EmbeddingMatrix(std::move(tokens), std::move(data), rows.front().second.size());
}

/// Seven group words on one axis (each with a small private component), a
/// distractor with one sense on the group axis and one on an orthogonal
/// axis, and an outlier orthogonal to the group. Ambiguous words come as
/// word@k senses.
struct OutlierFixture {
    wsi::EmbeddingMatrix emb;
    std::vector<std::string> ingroup;
    std::string distractor;
    std::string outlier;
};

inline OutlierFixture outlier_fixture() {
    const std::size_t dim = 16;
    std::vector<std::pair<std::string, std::vector<float>>> rows;
    OutlierFixture f;
    const char* gods[] = {"zeus", "hades", "poseidon", "apollo", "ares", "athena", "hermes"};
    for (int i = 0; i < 7; ++i) {
        f.ingroup.push_back(gods[i]);
        rows.push_back({std::string(gods[i]) + "@0", add(basis(dim, 0), basis(dim, 3 + i, 0.2f))});
        rows.push_back({std::string(gods[i]) + "@1", basis(dim, 1)});
    }
    f.distractor = "nike";
    rows.push_back({"nike@0", add(basis(dim, 0), basis(dim, 10, 0.2f))});
    rows.push_back({"nike@1", basis(dim, 2)});
    f.outlier = "adidas";
    rows.push_back({"adidas", add(basis(dim, 2), basis(dim, 11, 0.2f))});
    f.emb = make_embedding(rows);
    return f;
}

/// Five-sense "bass" corpus shipped as tests/data/bass_spec.json.
inline wsi::SynthSpec bass_spec() {
    std::ifstream in(std::string(WSI_TEST_DATA_DIR) + "/bass_spec.json");
    return wsi::synth_spec_from_json({std::istreambuf_iterator<char>(in), {}});
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("wsi_" + tag + "_" + std::to_string(wsi::splitmix64(reinterpret_cast<std::uintptr_t>(this))));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace fixtures

#include <doctest.h>

#include <cmath>
#include <fstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wsi/embeddings.hpp"
#include "wsi/error.hpp"

namespace {

std::string read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

/// Two topics that never share a sentence; a third of the sentences carry
/// the topic's sense of "bass".
wsi::Corpus topic_corpus(std::size_t sentences, std::uint64_t seed) {
    const std::vector<std::string> music = {"guitar", "drum", "piano", "song", "band", "tenor"};
    const std::vector<std::string> fish = {"trout", "river", "perch", "lake", "boat", "salmon"};
    wsi::Rng rng(seed);
    wsi::Corpus c;
    for (std::size_t s = 0; s < sentences; ++s) {
        const auto& topic = s % 2 ? fish : music;
        std::vector<std::string> line;
        for (int i = 0; i < 8; ++i) line.push_back(topic[rng.uniform(topic.size())]);
        if (rng.uniform(3) == 0) line[rng.uniform(8)] = s % 2 ? "bass@1" : "bass@0";
        c.push_back(line);
    }
    return c;
}

wsi::EmbeddingConfig small_config() {
    wsi::EmbeddingConfig cfg;
    cfg.dim = 16;
    cfg.epochs = 3;
    cfg.min_count = 1;
    cfg.sample = 0;
    return cfg;
}

}  // namespace

TEST_CASE("analytic negative-sampling gradient matches finite differences") {
    wsi::Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        const std::size_t d = 1 + rng.uniform(12), k = rng.uniform(6);
        auto rnd = [&] {
            std::vector<long double> v(d);
            for (auto& x : v) x = (rng.uniform_real() - 0.5) * 2.0;
            return v;
        };
        const auto h = rnd(), pos = rnd();
        std::vector<std::vector<long double>> negs;
        for (std::size_t i = 0; i < k; ++i) negs.push_back(rnd());
        const auto g = wsi::negative_sampling_gradient<long double>(h, pos, negs);
        CHECK(std::abs(static_cast<double>(g.loss - oracle::ns_loss(h, pos, negs))) < 1e-12);
        for (std::size_t c = 0; c < d; ++c) {
            auto near = [](long double a, long double b) { return std::abs(a - b) <= 1e-6L * (1 + std::abs(b)); };
            CHECK(near(g.d_hidden[c], oracle::ns_finite_difference(h, pos, negs, 0, c)));
            CHECK(near(g.d_positive[c], oracle::ns_finite_difference(h, pos, negs, 1, c)));
            for (std::size_t n = 0; n < k; ++n)
                CHECK(near(g.d_negatives[n][c], oracle::ns_finite_difference(h, pos, negs, 2 + n, c)));
        }
    }
}

TEST_CASE("log_sigmoid is stable for large inputs") {
    CHECK(wsi::log_sigmoid(1000.0) == doctest::Approx(0.0));
    CHECK(wsi::log_sigmoid(-1000.0) == doctest::Approx(-1000.0));
    CHECK(wsi::sigmoid(0.0) == 0.5);
    CHECK(std::isfinite(wsi::sigmoid(-800.0)));
}

TEST_CASE("single-threaded training is deterministic") {
    const auto corpus = topic_corpus(300, 1);
    for (auto mode : {wsi::TrainMode::Cbow, wsi::TrainMode::SkipGram}) {
        auto cfg = small_config();
        cfg.mode = mode;
        const auto a = wsi::train(corpus, cfg);
        const auto b = wsi::train(corpus, cfg);
        CHECK(a == b);
        cfg.seed = 2;
        CHECK_FALSE(wsi::train(corpus, cfg) == a);
    }
}

TEST_CASE("training lowers the loss and separates topics") {
    const auto corpus = topic_corpus(3000, 2);
    for (auto mode : {wsi::TrainMode::Cbow, wsi::TrainMode::SkipGram}) {
        auto cfg = small_config();
        cfg.mode = mode;
        cfg.epochs = 5;
        wsi::TrainStats stats;
        const auto emb = wsi::train(corpus, cfg, &stats);
        REQUIRE(stats.epoch_loss.size() == 5);
        CHECK(stats.epoch_loss.back() < stats.epoch_loss.front());
        CHECK(stats.vocab_size == 14);
        CHECK(wsi::cosine(emb, "bass@0", "guitar") > wsi::cosine(emb, "bass@0", "trout"));
        CHECK(wsi::cosine(emb, "bass@1", "trout") > wsi::cosine(emb, "bass@1", "guitar"));
    }
}

TEST_CASE("multi-threaded training produces finite vectors") {
    auto cfg = small_config();
    cfg.threads = 3;
    const auto emb = wsi::train(topic_corpus(600, 3), cfg);
    CHECK(emb.size() == 14);
    for (float x : emb.data()) CHECK(std::isfinite(x));
}

TEST_CASE("training vocabulary respects min_count and orders by frequency") {
    wsi::Corpus corpus = {{"a", "b", "a", "c"}, {"a", "b", "d"}};
    auto cfg = small_config();
    cfg.min_count = 2;
    const auto emb = wsi::train(corpus, cfg);
    CHECK(emb.tokens() == std::vector<std::string>{"a", "b"});
    cfg.min_count = 10;
    CHECK_THROWS_AS(wsi::train(corpus, cfg), wsi::TrainError);
    CHECK_THROWS_AS(wsi::train({}, small_config()), wsi::TrainError);
    cfg = small_config();
    cfg.dim = 0;
    CHECK_THROWS_AS(wsi::train(corpus, cfg), wsi::TrainError);
}

TEST_CASE("vector files round-trip byte-identically") {
    fixtures::TempDir dir("vec");
    const auto emb = wsi::train(topic_corpus(200, 4), small_config());
    for (const char* name : {"v.txt", "v.bin"}) {
        wsi::save_vectors(emb, dir.file(name));
        const auto back = wsi::load_vectors(dir.file(name));
        CHECK(back == emb);
        wsi::save_vectors(back, dir.file(std::string("again_") + name));
        CHECK(read_all(dir.file(name)) == read_all(dir.file(std::string("again_") + name)));
    }
    CHECK(read_all(dir.file("v.txt")).rfind("14 16\n", 0) == 0);
    CHECK_THROWS_AS(wsi::load_vectors(dir.file("missing.txt")), wsi::Error);
}

TEST_CASE("sense lookup and candidates") {
    const auto emb = fixtures::make_embedding({{"bass@1", {1, 0}}, {"bass@0", {0, 1}}, {"fish", {1, 1}}});
    const auto& senses = emb.senses_of("bass");
    REQUIRE(senses.size() == 2);
    CHECK(senses[0].first == 0);
    CHECK(emb.token(senses[0].second) == "bass@0");
    CHECK(emb.candidates("bass").size() == 2);
    CHECK(emb.candidates("fish") == std::vector<std::size_t>{2});
    CHECK(emb.candidates("nothing").empty());
    CHECK_THROWS_AS(emb.vector("nothing"), wsi::OovError);
}

TEST_CASE("cosine") {
    std::vector<float> a{1, 0}, b{0, 2}, c{3, 0}, z{0, 0};
    CHECK(wsi::cosine(a, b) == 0.0);
    CHECK(wsi::cosine(a, c) == doctest::Approx(1.0));
    CHECK(wsi::cosine(a, z) == 0.0);
    std::vector<float> x{0.3f, -0.7f, 0.2f};
    CHECK(wsi::cosine(x, x) <= 1.0);
}

TEST_CASE("nearest neighbors") {
    const auto emb = fixtures::make_embedding({{"bass@0", {1, 0.1f}},
                                               {"bass@1", {1, 0.2f}},
                                               {"guitar", {1, 0.05f}},
                                               {"drum", {1, 0.15f}},
                                               {"drum@0", {1, 0.15f}},
                                               {"fish", {-1, 0}}});
    auto n = wsi::nearest_neighbors(emb, "bass@0", 3);
    REQUIRE(n.size() == 3);
    CHECK(n[0].token == "drum");  // tie with drum@0 broken by token
    CHECK(n[1].token == "drum@0");
    CHECK(n[2].token == "guitar");
    auto tagged = wsi::nearest_neighbors(emb, "bass@0", 5, wsi::NeighborFilter::SenseTaggedOnly);
    REQUIRE(tagged.size() == 1);
    CHECK(tagged[0].token == "drum@0");
    auto with_self = wsi::nearest_neighbors(emb, "bass@0", 2, wsi::NeighborFilter::All, true);
    CHECK(with_self[0].token == "drum");
    CHECK(with_self[1].token == "drum@0");
    CHECK(wsi::nearest_neighbors(emb, "bass@0", 5, wsi::NeighborFilter::All, true)[3].token == "bass@1");
    CHECK(wsi::nearest_neighbors(emb, "bass@0", 0).empty());
    CHECK(wsi::nearest_neighbors(emb, "fish", 100).size() == 5);
    CHECK_THROWS_AS(wsi::nearest_neighbors(emb, "nothing", 3), wsi::OovError);
}

TEST_CASE("context vector and sense selection") {
    const auto emb = fixtures::make_embedding(
        {{"bass@0", {1, 0}}, {"bass@1", {0, 1}}, {"guitar", {1, 0.1f}}, {"river", {0.1f, 1}}});
    const std::vector<std::string> ctx{"guitar", "unknown"};
    const auto v = wsi::context_vector(emb, ctx);
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(wsi::select_sense(emb, "bass", v) == "bass@0");
    const std::vector<std::string> ctx2{"river"};
    CHECK(wsi::select_sense(emb, "bass", wsi::context_vector(emb, ctx2)) == "bass@1");
    const std::vector<std::string> oov{"a", "b"};
    CHECK_THROWS_AS(wsi::context_vector(emb, oov), wsi::OovError);
    const std::vector<double> diagonal{1, 1};
    CHECK(wsi::select_sense(emb, "bass", diagonal) == "bass@0");
    CHECK_THROWS_AS(wsi::select_sense(emb, "guitar", diagonal), wsi::OovError);
}

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wsi/embeddings.hpp"
#include "wsi/eval.hpp"
#include "wsi/index.hpp"
#include "wsi/induction.hpp"
#include "wsi/louvain.hpp"
#include "wsi/synth.hpp"
#include "wsi/tagger.hpp"

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

struct PipelineRun {
    wsi::SynthCorpus corpus;
    wsi::InvertedIndex index;
    wsi::SenseInventory inventory;
    wsi::TaggedCorpus tagged;
};

PipelineRun run_pipeline(const wsi::SynthSpec& spec, std::size_t threads = 1) {
    PipelineRun r;
    r.corpus = wsi::generate_synth_corpus(spec);
    r.index = wsi::build_index(r.corpus.records, r.corpus.vocab.size());
    r.inventory = wsi::induce_all(r.index, {}, threads);
    r.tagged = wsi::tag_corpus(r.index, r.inventory, r.corpus.sentences, threads);
    return r;
}

/// (lemma, induced sense) -> planted sense by majority over tagged occurrences.
std::map<std::pair<wsi::LemmaId, wsi::SenseId>, wsi::SenseId> majority_map(const PipelineRun& r) {
    std::map<std::pair<wsi::Occurrence, wsi::LemmaId>, wsi::SenseId> gold;
    for (std::size_t i = 0; i < r.corpus.records.size(); ++i)
        gold[{r.corpus.records[i].occ, r.corpus.records[i].target}] = r.corpus.gold[i];
    std::map<std::pair<wsi::LemmaId, wsi::SenseId>, std::map<wsi::SenseId, std::size_t>> votes;
    for (const auto& t : r.tagged.tags) ++votes[{t.lemma, t.sense}][gold.at({t.occ, t.lemma})];
    std::map<std::pair<wsi::LemmaId, wsi::SenseId>, wsi::SenseId> out;
    for (const auto& [key, v] : votes) {
        auto best = v.begin();
        for (auto it = v.begin(); it != v.end(); ++it)
            if (it->second > best->second) best = it;
        out[key] = best->first;
    }
    return out;
}

Outcome modularity_oracle() {
    const auto t0 = Clock::now();
    wsi::Rng rng(2024);
    int good = 0;
    const int graphs = 200;
    for (int t = 0; t < graphs; ++t) {
        const std::size_t n = 2 + rng.uniform(7);
        const auto a = fixtures::random_matrix(rng, n, 0.2 + 0.6 * rng.uniform_real(), 4);
        const auto g = fixtures::to_graph(a);
        const double q = wsi::modularity(g, wsi::louvain(g, {static_cast<std::uint64_t>(t)}));
        good += q >= 0.95 * oracle::best_modularity(a) - 1e-12;
    }
    const auto tri = fixtures::to_graph(fixtures::two_triangles());
    const double q_tri = wsi::modularity(tri, wsi::louvain(tri, {}));
    const double secs = seconds_since(t0);
    return {good >= 190 && std::abs(q_tri - 0.5) <= 1e-9 && secs < 60,
            fmt("%d/%d graphs reach 0.95*Q*, two-triangle Q=%.12f, %.2fs", good, graphs, q_tri, secs)};
}

Outcome formula_fixtures() {
    wsi::Rng rng(7);
    int all_in_one_exact = 0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + rng.uniform(30);
        const auto g = fixtures::to_graph(fixtures::random_matrix(rng, std::max<std::size_t>(n, 2), 0.3, 5));
        all_in_one_exact += wsi::modularity(g, wsi::Partition::all_in_one(g.size())) == 0.0;
    }
    double compact_err = 0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 3 + rng.uniform(15), d = 1 + rng.uniform(12);
        std::vector<std::vector<float>> v(n, std::vector<float>(d));
        for (auto& x : v)
            for (auto& y : x) y = static_cast<float>(rng.uniform_real() * 2 - 1);
        const auto got = wsi::compactness(v);
        const auto want = oracle::compactness(v);
        for (std::size_t i = 0; i < n; ++i) compact_err = std::max(compact_err, std::abs(got[i] - want[i]));
    }
    double part_err = 0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + rng.uniform(60);
        const auto gold = fixtures::random_labels(rng, n, 1 + rng.uniform(5));
        const auto pred = fixtures::random_labels(rng, n, 1 + rng.uniform(6));
        const auto f = wsi::paired_fscore(gold, pred);
        const auto of = oracle::paired_f(gold, pred);
        const auto v = wsi::v_measure(gold, pred);
        const auto ov = oracle::v_measure(gold, pred);
        for (double e : {f.precision - of.precision, f.recall - of.recall, f.fscore - of.f, v.homogeneity - ov.precision,
                         v.completeness - ov.recall, v.v - ov.f})
            part_err = std::max(part_err, std::abs(e));
    }
    return {all_in_one_exact == 50 && compact_err <= 1e-12 && part_err <= 1e-9,
            fmt("all-in-one exact %d/50, compactness max err %.3g, paired-F/V max err %.3g", all_in_one_exact,
                compact_err, part_err)};
}

Outcome end_to_end() {
    const auto t0 = Clock::now();
    wsi::SynthSpec spec;  // 100 words, 2-4 senses, 1000 instances, noise 0.1
    spec.seed = 11;
    const auto r = run_pipeline(spec);
    std::size_t exact = 0;
    for (const auto& p : r.corpus.planted) exact += r.inventory.at(p.word).senses.size() == p.pools.size();
    const auto mapping = majority_map(r);
    std::map<std::pair<wsi::Occurrence, wsi::LemmaId>, wsi::SenseId> gold;
    for (std::size_t i = 0; i < r.corpus.records.size(); ++i)
        gold[{r.corpus.records[i].occ, r.corpus.records[i].target}] = r.corpus.gold[i];
    std::size_t correct = 0;
    for (const auto& t : r.tagged.tags) correct += mapping.at({t.lemma, t.sense}) == gold.at({t.occ, t.lemma});
    const double count_rate = double(exact) / double(r.corpus.planted.size());
    const double acc = double(correct) / double(r.tagged.tags.size());
    const double secs = seconds_since(t0);
    return {count_rate >= 0.90 && acc >= 0.95 && r.tagged.tags.size() == r.corpus.records.size() && secs < 300,
            fmt("sense count exact for %.1f%% of words, tagging accuracy %.2f%% over %zu occurrences, %.1fs",
                100 * count_rate, 100 * acc, r.tagged.tags.size(), secs)};
}

Outcome tagging_oracle() {
    wsi::Rng rng(1234);
    int agree = 0, ties = 0;
    const int cases = 1000;
    for (int t = 0; t < cases; ++t) {
        const std::uint32_t vocab = 4 + static_cast<std::uint32_t>(rng.uniform(10));
        wsi::LemmaSenses entry;
        std::vector<std::vector<wsi::LemmaId>> reps(1 + rng.uniform(5));
        for (std::size_t k = 0; k < reps.size(); ++k) {
            std::set<wsi::LemmaId> s;
            for (std::size_t i = 0, n = 1 + rng.uniform(6); i < n; ++i) s.insert(rng.uniform(vocab));
            reps[k].assign(s.begin(), s.end());
            entry.senses.push_back({static_cast<wsi::SenseId>(k), reps[k], 0});
        }
        wsi::SubstituteList subs;
        for (std::size_t i = 0, n = 1 + rng.uniform(5); i < n; ++i) {
            const auto id = static_cast<wsi::LemmaId>(rng.uniform(vocab));
            if (!subs.contains(id)) subs.push_back(id);
        }
        const std::vector<wsi::LemmaId> sv(subs.begin(), subs.end());
        std::size_t best_count = 0;
        double best = -1;
        for (const auto& r : reps) {
            const double j = wsi::jaccard(sv, r);
            if (j > best) best = j, best_count = 0;
            best_count += j == best;
        }
        ties += best_count > 1;
        const auto got = wsi::assign_sense(subs, entry);
        const auto want = oracle::assign(sv, reps);
        agree += got.sense == want.first && got.confident == want.second;
    }
    return {agree == cases, fmt("%d/%d agree (%d cases with tied maxima)", agree, cases, ties)};
}

Outcome gradient_check() {
    wsi::Rng rng(99);
    double worst = 0;
    const int configs = 100;
    for (int t = 0; t < configs; ++t) {
        const std::size_t d = 1 + rng.uniform(16), k = 1 + rng.uniform(8);
        auto rnd = [&] {
            std::vector<long double> v(d);
            for (auto& x : v) x = (rng.uniform_real() - 0.5) * 2.0;
            return v;
        };
        const auto h = rnd(), pos = rnd();
        std::vector<std::vector<long double>> negs;
        for (std::size_t i = 0; i < k; ++i) negs.push_back(rnd());
        const auto g = wsi::negative_sampling_gradient<long double>(h, pos, negs);
        auto rel = [](long double a, long double b) {
            return static_cast<double>(std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8L}));
        };
        for (std::size_t c = 0; c < d; ++c) {
            worst = std::max(worst, rel(g.d_hidden[c], oracle::ns_finite_difference(h, pos, negs, 0, c)));
            worst = std::max(worst, rel(g.d_positive[c], oracle::ns_finite_difference(h, pos, negs, 1, c)));
            for (std::size_t n = 0; n < k; ++n)
                worst = std::max(worst, rel(g.d_negatives[n][c], oracle::ns_finite_difference(h, pos, negs, 2 + n, c)));
        }
    }
    return {worst <= 1e-4, fmt("max relative error %.3g over %d configurations", worst, configs)};
}

std::vector<double> centroid(const wsi::EmbeddingMatrix& emb, const wsi::VocabTable& vocab,
                             const std::vector<wsi::LemmaId>& pool) {
    std::vector<double> c(emb.dim(), 0.0);
    for (auto id : pool) {
        if (!emb.contains(vocab.lemma(id))) continue;
        const auto v = emb.vector(vocab.lemma(id));
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += v[i];
    }
    return c;
}

Outcome sense_separation() {
    wsi::SynthSpec spec;
    spec.senses_min = spec.senses_max = 2;
    spec.seed = 5;
    const auto r = run_pipeline(spec);
    wsi::EmbeddingConfig cfg;
    cfg.dim = 100;
    cfg.window = 5;
    cfg.mode = wsi::TrainMode::Cbow;
    cfg.seed = 17;
    const auto text = wsi::render_tagged_text(r.corpus.sentences, r.tagged.tags);
    const auto emb = wsi::train(wsi::parse_corpus(text), cfg);
    const auto mapping = majority_map(r);

    std::size_t separated = 0, total = 0;
    for (const auto& p : r.corpus.planted) {
        const auto& word = r.corpus.vocab.lemma(p.word);
        const auto& senses = r.inventory.at(p.word).senses;
        for (wsi::SenseId planted = 0; planted < p.pools.size(); ++planted) {
            ++total;
            // The most supported induced sense mapped onto this planted sense.
            const wsi::SenseCluster* chosen = nullptr;
            for (const auto& s : senses)
                if (mapping.count({p.word, s.id}) && mapping.at({p.word, s.id}) == planted &&
                    (!chosen || s.support > chosen->support))
                    chosen = &s;
            if (!chosen) continue;
            const auto token = wsi::sense_token(word, chosen->id);
            if (!emb.contains(token)) continue;
            const auto v = emb.vector(token);
            const auto own = centroid(emb, r.corpus.vocab, p.pools[planted]);
            const auto other = centroid(emb, r.corpus.vocab, p.pools[1 - planted]);
            separated += wsi::cosine(own, v) > wsi::cosine(other, v);
        }
    }
    const double rate = double(separated) / double(total);
    return {rate >= 0.95, fmt("%zu/%zu planted senses closer to their own pool (%.1f%%)", separated, total, 100 * rate)};
}

Outcome outlier_wic_fixtures() {
    const auto f = fixtures::outlier_fixture();
    std::vector<std::string> elements = f.ingroup;
    elements.push_back(f.distractor);
    const auto res = wsi::detect_outlier(f.emb, {elements, f.outlier});
    const wsi::OutlierResult results[] = {res};
    const auto summary = wsi::opp_and_accuracy(results);

    const auto wic_emb = fixtures::make_embedding({{"bank@0", {1, 0, 0}},
                                                   {"bank@1", {0, 1, 0}},
                                                   {"money", {1, 0, 0.1f}},
                                                   {"deposit", {1, 0, 0}},
                                                   {"river", {0, 1, 0.1f}},
                                                   {"shore", {0, 1, 0}},
                                                   {"the", {0, 0, 1}}});
    wsi::WicOptions opts;
    opts.threshold = 0.68;
    const wsi::WicInstance same{"bank", "N", {"the", "bank", "money"}, {"the", "bank", "money"}, 1, 1, std::nullopt};
    const wsi::WicInstance diff{"bank", "N", {"deposit", "money", "bank"}, {"bank", "of", "the", "river"}, 2, 0,
                                std::nullopt};
    const auto ds = wsi::wic_classify(wic_emb, same, opts);
    const auto dd = wsi::wic_classify(wic_emb, diff, opts);
    const bool wic_ok = ds.same && !ds.abstained && !dd.same && !dd.abstained;
    return {res.outlier_position == 8 && summary.opp == 100.0 && summary.accuracy == 100.0 && wic_ok,
            fmt("OP=%zu, (OPP, accuracy)=(%g, %g), WiC identical=%s orthogonal=%s", res.outlier_position, summary.opp,
                summary.accuracy, ds.same ? "TRUE" : "FALSE", dd.same ? "TRUE" : "FALSE")};
}

Outcome determinism_and_round_trips() {
    fixtures::TempDir dir("acceptance_det");
    wsi::SynthSpec spec;
    spec.num_words = 20;
    spec.instances_per_word = 300;
    spec.seed = 21;
    std::vector<std::string> mismatched;

    auto artifacts = [&](const std::string& tag, std::size_t threads) {
        const auto r = run_pipeline(spec, threads);
        wsi::save_index(r.index, dir.file(tag + ".wsix"));
        wsi::save_inventory(r.inventory, dir.file(tag + ".inv.jsonl"));
        wsi::save_sidecar(r.tagged.tags, dir.file(tag + ".tags.jsonl"));
        wsi::EmbeddingConfig cfg;
        cfg.dim = 24;
        cfg.epochs = 2;
        cfg.min_count = 1;
        cfg.threads = 1;
        const auto emb = wsi::train(wsi::parse_corpus(wsi::render_tagged_text(r.corpus.sentences, r.tagged.tags)), cfg);
        wsi::save_vectors_text(emb, dir.file(tag + ".vec.txt"));
        wsi::save_vectors_binary(emb, dir.file(tag + ".vec.bin"));
        return r;
    };
    const auto r = artifacts("a", 1);
    artifacts("b", 1);
    artifacts("c", 3);  // induction and tagging must not depend on thread count
    for (const char* ext : {".wsix", ".inv.jsonl", ".tags.jsonl", ".vec.txt", ".vec.bin"})
        if (read_file(dir.file(std::string("a") + ext)) != read_file(dir.file(std::string("b") + ext)))
            mismatched.push_back(std::string("rerun") + ext);
    for (const char* ext : {".wsix", ".inv.jsonl", ".tags.jsonl"})
        if (read_file(dir.file(std::string("a") + ext)) != read_file(dir.file(std::string("c") + ext)))
            mismatched.push_back(std::string("threads") + ext);

    // Save -> load -> save must reproduce every file byte for byte.
    auto check = [&](const std::string& name, const std::function<void(const std::string&)>& save,
                     const std::function<void(const std::string&, const std::string&)>& reload) {
        const auto first = dir.file(name), second = dir.file("re_" + name);
        save(first);
        reload(first, second);
        if (read_file(first) != read_file(second) || read_file(first).empty()) mismatched.push_back(name);
    };
    check("vocab.txt", [&](auto p) { wsi::save_vocab(r.corpus.vocab, p); },
          [](auto a, auto b) { wsi::save_vocab(wsi::load_vocab(a), b); });
    check("records.jsonl", [&](auto p) { wsi::write_records(p, r.corpus.records); },
          [](auto a, auto b) { wsi::write_records(b, wsi::read_records(a)); });
    check("records.subbin", [&](auto p) { wsi::write_records(p, r.corpus.records); },
          [](auto a, auto b) { wsi::write_records(b, wsi::read_records(a)); });
    check("sentences.jsonl", [&](auto p) { wsi::save_sentences(r.corpus.sentences, p); },
          [](auto a, auto b) { wsi::save_sentences(wsi::load_sentences(a), b); });
    check("index.wsix", [&](auto p) { wsi::save_index(r.index, p); },
          [](auto a, auto b) { wsi::save_index(wsi::load_index(a), b); });
    check("inventory.jsonl", [&](auto p) { wsi::save_inventory(r.inventory, p); },
          [](auto a, auto b) { wsi::save_inventory(wsi::load_inventory(a), b); });
    check("tags.jsonl", [&](auto p) { wsi::save_sidecar(r.tagged.tags, p); },
          [](auto a, auto b) { wsi::save_sidecar(wsi::load_sidecar(a), b); });
    const auto emb = wsi::load_vectors_text(dir.file("a.vec.txt"));
    check("vectors.txt", [&](auto p) { wsi::save_vectors_text(emb, p); },
          [](auto a, auto b) { wsi::save_vectors_text(wsi::load_vectors_text(a), b); });
    check("vectors.bin", [&](auto p) { wsi::save_vectors_binary(emb, p); },
          [](auto a, auto b) { wsi::save_vectors_binary(wsi::load_vectors_binary(a), b); });
    check("spec.json", [&](auto p) { std::ofstream(p, std::ios::binary) << wsi::synth_spec_to_json(spec); },
          [](auto a, auto b) {
              std::ofstream(b, std::ios::binary) << wsi::synth_spec_to_json(wsi::synth_spec_from_json(read_file(a)));
          });
    // Text vectors must also reproduce the exact float values.
    const auto emb2 = wsi::load_vectors_text(dir.file("re_vectors.txt"));
    bool floats_equal = emb.size() == emb2.size();
    for (std::size_t i = 0; floats_equal && i < emb.size(); ++i) {
        const auto x = emb.vector(emb.token(i)), y = emb2.vector(emb.token(i));
        floats_equal = std::equal(x.begin(), x.end(), y.begin(), y.end());
    }
    if (!floats_equal) mismatched.push_back("vector values");

    std::string detail = "index, inventory, tags, embeddings reproducible; 10 formats round-trip";
    if (!mismatched.empty()) {
        detail = "mismatch:";
        for (const auto& m : mismatched) detail += " " + m;
    }
    return {mismatched.empty(), detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
        {"modularity-oracle", modularity_oracle},
        {"formula-fixtures", formula_fixtures},
        {"end-to-end-planted-senses", end_to_end},
        {"tagging-oracle", tagging_oracle},
        {"embedding-gradient-check", gradient_check},
        {"sense-separation", sense_separation},
        {"outlier-wic-fixtures", outlier_wic_fixtures},
        {"determinism-round-trips", determinism_and_round_trips},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}

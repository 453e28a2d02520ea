#include <doctest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "wsi/induction.hpp"
#include "wsi/synth.hpp"
#include "wsi/tagger.hpp"

namespace {

wsi::SynthCorpus two_sense_corpus(double noise, std::size_t instances, std::uint64_t seed = 1) {
    wsi::SynthSpec spec;
    spec.words = {{"bass",
                   {{"guitar", "drum", "piano", "tenor", "voice", "cello", "violin", "keyboard"},
                    {"fish", "trout", "perch", "salmon", "carp", "pike", "cod", "tuna"}}}};
    spec.noise_rate = noise;
    spec.instances_per_word = instances;
    spec.seed = seed;
    return wsi::generate_synth_corpus(spec);
}

}  // namespace

TEST_CASE("noise-free two-sense word induces exactly its two pools") {
    const auto c = two_sense_corpus(0.0, 400);
    const auto idx = wsi::build_index(c.records, c.vocab.size());
    const auto bass = c.vocab.at("bass");
    const auto senses = wsi::induce_senses(bass, idx, {});
    REQUIRE(senses.senses.size() == 2);
    CHECK_FALSE(senses.fallback);
    std::set<std::set<wsi::LemmaId>> got, want;
    for (const auto& s : senses.senses) got.insert({s.representatives.begin(), s.representatives.end()});
    for (const auto& p : c.planted[0].pools) want.insert({p.begin(), p.end()});
    CHECK(got == want);
    CHECK(senses.senses[0].support >= senses.senses[1].support);
    CHECK(senses.senses[0].support + senses.senses[1].support == 400);
    for (std::size_t i = 0; i < senses.senses.size(); ++i) CHECK(senses.senses[i].id == i);
}

TEST_CASE("representatives are ordered by intra-community degree, then lemma id") {
    // Community {1,2,3}: node 2 has the most intra weight; 1 and 3 tie.
    std::vector<wsi::SubstituteList> inst = {{1, 2}, {2, 3}, {1, 2, 3}, {7, 8}, {7, 8}, {8, 9}};
    const auto g = wsi::build_graph(inst);
    std::vector<std::uint32_t> labels;
    for (auto n : g.nodes()) labels.push_back(n < 5 ? 0 : 1);
    const auto clusters = wsi::extract_representatives(g, wsi::Partition::from_labels(labels));
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].representatives == std::vector<wsi::LemmaId>{2, 1, 3});
    CHECK(clusters[1].representatives == std::vector<wsi::LemmaId>{8, 7, 9});
    const auto capped = wsi::extract_representatives(g, wsi::Partition::from_labels(labels), 2);
    CHECK(capped[0].representatives == std::vector<wsi::LemmaId>{2, 1});
}

TEST_CASE("rare lemmas fall back to one sense of frequent substitutes") {
    std::vector<wsi::SubstituteRecord> recs;
    for (std::uint32_t i = 0; i < 10; ++i) recs.push_back({{i, 0, 0}, 0, {1, static_cast<wsi::LemmaId>(2 + i % 3)}});
    const auto idx = wsi::build_index(recs, 10);
    const auto s = wsi::induce_senses(0, idx, {});
    CHECK(s.fallback);
    REQUIRE(s.senses.size() == 1);
    CHECK(s.senses[0].representatives == std::vector<wsi::LemmaId>{1, 2, 3, 4});
    CHECK(s.senses[0].support == 10);
}

TEST_CASE("induction is deterministic and independent of thread count") {
    wsi::SynthSpec spec;
    spec.num_words = 12;
    spec.instances_per_word = 300;
    const auto c = wsi::generate_synth_corpus(spec);
    const auto idx = wsi::build_index(c.records, c.vocab.size());
    wsi::InductionConfig cfg;
    cfg.seed = 5;
    const auto a = wsi::induce_all(idx, cfg, 1);
    CHECK(a.size() == 12);
    CHECK(wsi::induce_all(idx, cfg, 4) == a);
    CHECK(wsi::inventory_to_jsonl(wsi::induce_all(idx, cfg, 1)) == wsi::inventory_to_jsonl(a));
}

TEST_CASE("senses are ordered by descending support") {
    wsi::SynthSpec spec;
    spec.num_words = 10;
    spec.instances_per_word = 300;
    const auto c = wsi::generate_synth_corpus(spec);
    const auto inv = wsi::induce_all(wsi::build_index(c.records, c.vocab.size()), {});
    for (const auto& [_, e] : inv)
        for (std::size_t i = 1; i < e.senses.size(); ++i) CHECK(e.senses[i - 1].support >= e.senses[i].support);
}

TEST_CASE("inventory file round-trips") {
    fixtures::TempDir dir("inv");
    const auto c = two_sense_corpus(0.1, 300);
    auto idx = wsi::build_index(c.records, c.vocab.size());
    auto inv = wsi::induce_all(idx, {});
    std::vector<wsi::SubstituteRecord> rare = {{{999, 0, 0}, c.vocab.at("fish"), {c.vocab.at("trout")}}};
    inv[c.vocab.at("fish")] = wsi::induce_senses(c.vocab.at("fish"), wsi::build_index(rare, c.vocab.size()), {});
    wsi::save_inventory(inv, dir.file("inv.jsonl"));
    const auto back = wsi::load_inventory(dir.file("inv.jsonl"));
    CHECK(back == inv);
    CHECK(wsi::inventory_to_jsonl(back) == wsi::inventory_to_jsonl(inv));
    CHECK(wsi::inventory_to_jsonl(inv).find("\"fallback\":true") != std::string::npos);
}

TEST_CASE("sense table lists representatives column by column") {
    const auto c = two_sense_corpus(0.0, 200);
    auto inv = wsi::induce_all(wsi::build_index(c.records, c.vocab.size()), {});
    const auto table = wsi::format_sense_table(inv.at(c.vocab.at("bass")), c.vocab, 3);
    CHECK(table.rfind("bass\nbass_0", 0) == 0);
    CHECK(table.find("bass_1") != std::string::npos);
    CHECK(table.find("---") != std::string::npos);
    // header + dashes + 3 rows, plus the title line.
    CHECK(std::count(table.begin(), table.end(), '\n') == 6);
}

TEST_CASE("adding a within-community instance does not lower that community's support") {
    const auto c = two_sense_corpus(0.05, 200, 3);
    auto idx = wsi::build_index(c.records, c.vocab.size());
    const auto bass = c.vocab.at("bass");
    const auto inv = wsi::induce_all(idx, {});
    const auto& entry = inv.at(bass);
    wsi::SentenceStore sentences = c.sentences;
    const auto before = wsi::tag_corpus(idx, inv, sentences).counts.at(bass);

    auto recs = c.records;
    wsi::SubstituteList inside;
    for (std::size_t i = 0; i < 3; ++i) inside.push_back(entry.senses[1].representatives[i]);
    recs.push_back({{100000, 0, 0}, bass, inside});
    sentences.add(100000, 0, {"bass"});
    const auto after = wsi::tag_corpus(wsi::build_index(recs, c.vocab.size()), inv, sentences).counts.at(bass);
    CHECK(after[1] >= before[1] + 1);
    CHECK(after[0] == before[0]);
}

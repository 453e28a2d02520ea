#include "wsi/synth.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "wsi/error.hpp"
#include "wsi/rng.hpp"

namespace wsi {

namespace {

std::vector<PlantedWord> generated_words(const SynthSpec& spec, Rng& rng) {
    std::vector<PlantedWord> words;
    words.reserve(spec.num_words);
    for (std::size_t w = 0; w < spec.num_words; ++w) {
        PlantedWord pw;
        pw.surface = "word" + std::to_string(w);
        const std::size_t senses = spec.senses_min + rng.uniform(spec.senses_max - spec.senses_min + 1);
        for (std::size_t s = 0; s < senses; ++s) {
            std::vector<std::string> pool;
            for (std::size_t k = 0; k < spec.pool_size; ++k)
                pool.push_back(pw.surface + "_s" + std::to_string(s) + "_" + std::to_string(k));
            pw.pools.push_back(std::move(pool));
        }
        words.push_back(std::move(pw));
    }
    return words;
}

}  // namespace

void validate(const SynthSpec& spec) {
    if (!(spec.noise_rate >= 0.0 && spec.noise_rate < 0.5)) throw InvalidSpec("noise_rate must lie in [0, 0.5)");
    if (spec.noise_rate > 0.0 && spec.noise_pool_size < kMaxSubstitutes)
        throw InvalidSpec("noise_pool_size must be at least 5 when noise_rate > 0");
    if (spec.sentences_per_doc == 0) throw InvalidSpec("sentences_per_doc must be positive");
    if (spec.context_tokens + 1 > UINT16_MAX) throw InvalidSpec("context_tokens too large");
    if (spec.words.empty()) {
        if (spec.senses_min == 0 || spec.senses_min > spec.senses_max)
            throw InvalidSpec("need 1 <= senses_min <= senses_max");
        if (spec.pool_size == 0) throw InvalidSpec("pool_size must be positive");
        return;
    }
    for (const auto& w : spec.words) {
        if (w.surface.empty()) throw InvalidSpec("empty word surface");
        if (w.pools.empty()) throw InvalidSpec(w.surface + ": no sense pools");
        std::set<std::string> seen;
        for (const auto& pool : w.pools) {
            if (pool.empty()) throw InvalidSpec(w.surface + ": empty sense pool");
            for (const auto& lemma : pool) {
                if (lemma.empty()) throw InvalidSpec(w.surface + ": empty pool lemma");
                if (lemma == w.surface) throw InvalidSpec(w.surface + ": pool contains the target");
                if (!seen.insert(lemma).second)
                    throw InvalidSpec(w.surface + ": sense pools are not disjoint ('" + lemma + "')");
            }
        }
    }
}

SynthCorpus generate_synth_corpus(const SynthSpec& spec) {
    validate(spec);
    Rng rng(spec.seed);
    const std::vector<PlantedWord> words = spec.words.empty() ? generated_words(spec, rng) : spec.words;

    SynthCorpus corpus;
    for (const auto& w : words) corpus.vocab.intern(w.surface);
    for (const auto& w : words) {
        PlantedSense ps;
        ps.word = corpus.vocab.at(w.surface);
        for (const auto& pool : w.pools) {
            std::vector<LemmaId> ids;
            for (const auto& l : pool) ids.push_back(corpus.vocab.intern(l));
            ps.pools.push_back(std::move(ids));
        }
        corpus.planted.push_back(std::move(ps));
    }
    std::vector<LemmaId> noise;
    if (spec.noise_rate > 0.0)
        for (std::size_t k = 0; k < spec.noise_pool_size; ++k)
            noise.push_back(corpus.vocab.intern("noise" + std::to_string(k)));

    std::vector<std::uint32_t> order;
    order.reserve(words.size() * spec.instances_per_word);
    for (std::size_t w = 0; w < words.size(); ++w)
        for (std::size_t i = 0; i < spec.instances_per_word; ++i) order.push_back(static_cast<std::uint32_t>(w));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform(i)]);

    corpus.records.reserve(order.size());
    corpus.gold.reserve(order.size());
    std::vector<LemmaId> pool_left, noise_left;
    for (std::size_t n = 0; n < order.size(); ++n) {
        const PlantedSense& ps = corpus.planted[order[n]];
        const auto sense = static_cast<SenseId>(rng.uniform(ps.pools.size()));
        const auto& pool = ps.pools[sense];

        SubstituteRecord rec;
        rec.occ.doc_id = n / spec.sentences_per_doc;
        rec.occ.sent_idx = static_cast<std::uint32_t>(n % spec.sentences_per_doc);
        rec.target = ps.word;
        pool_left.assign(pool.begin(), pool.end());
        noise_left.assign(noise.begin(), noise.end());
        for (std::size_t slot = 0; slot < kMaxSubstitutes; ++slot) {
            const bool from_noise = !noise_left.empty() && rng.uniform_real() < spec.noise_rate;
            auto& src = (from_noise || pool_left.empty()) ? noise_left : pool_left;
            if (src.empty()) break;
            std::size_t pick = rng.uniform(src.size());
            rec.substitutes.push_back(src[pick]);
            src[pick] = src.back();
            src.pop_back();
        }

        std::vector<std::string> tokens;
        for (std::size_t c = 0; c < spec.context_tokens; ++c)
            tokens.push_back(corpus.vocab.lemma(pool[rng.uniform(pool.size())]));
        const std::size_t at = rng.uniform(tokens.size() + 1);
        tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at), corpus.vocab.lemma(ps.word));
        rec.occ.token_idx = static_cast<std::uint16_t>(at);

        corpus.sentences.add(rec.occ.doc_id, rec.occ.sent_idx, std::move(tokens));
        corpus.records.push_back(rec);
        corpus.gold.push_back(sense);
    }
    return corpus;
}

SynthSpec synth_spec_from_json(const std::string& json_text) {
    SynthSpec spec;
    try {
        auto j = nlohmann::json::parse(json_text);
        spec.num_words = j.value("num_words", spec.num_words);
        spec.senses_min = j.value("senses_min", spec.senses_min);
        spec.senses_max = j.value("senses_max", spec.senses_max);
        spec.pool_size = j.value("pool_size", spec.pool_size);
        spec.noise_rate = j.value("noise_rate", spec.noise_rate);
        spec.instances_per_word = j.value("instances_per_word", spec.instances_per_word);
        spec.noise_pool_size = j.value("noise_pool_size", spec.noise_pool_size);
        spec.context_tokens = j.value("context_tokens", spec.context_tokens);
        spec.sentences_per_doc = j.value("sentences_per_doc", spec.sentences_per_doc);
        spec.seed = j.value("seed", spec.seed);
        if (j.contains("words"))
            for (const auto& w : j.at("words"))
                spec.words.push_back({w.at("surface").get<std::string>(),
                                      w.at("pools").get<std::vector<std::vector<std::string>>>()});
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpec(std::string("bad synth spec: ") + e.what());
    }
    return spec;
}

std::string synth_spec_to_json(const SynthSpec& spec) {
    nlohmann::ordered_json j;
    j["num_words"] = spec.num_words;
    j["senses_min"] = spec.senses_min;
    j["senses_max"] = spec.senses_max;
    j["pool_size"] = spec.pool_size;
    j["noise_rate"] = spec.noise_rate;
    j["instances_per_word"] = spec.instances_per_word;
    j["noise_pool_size"] = spec.noise_pool_size;
    j["context_tokens"] = spec.context_tokens;
    j["sentences_per_doc"] = spec.sentences_per_doc;
    j["seed"] = spec.seed;
    if (!spec.words.empty()) {
        j["words"] = nlohmann::ordered_json::array();
        for (const auto& w : spec.words) j["words"].push_back({{"surface", w.surface}, {"pools", w.pools}});
    }
    return j.dump(2);
}

void save_gold(const SynthCorpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
        const auto& r = corpus.records[i];
        out << "{\"doc\":" << r.occ.doc_id << ",\"sent\":" << r.occ.sent_idx << ",\"tok\":" << r.occ.token_idx
            << ",\"target\":" << r.target << ",\"gold\":" << corpus.gold[i] << "}\n";
    }
}

}  // namespace wsi

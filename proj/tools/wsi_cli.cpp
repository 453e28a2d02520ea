#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "wsi/error.hpp"
#include "wsi/eval.hpp"
#include "wsi/index.hpp"
#include "wsi/induction.hpp"
#include "wsi/normalize.hpp"
#include "wsi/records.hpp"
#include "wsi/service.hpp"
#include "wsi/synth.hpp"
#include "wsi/tagger.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw wsi::IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw wsi::IoError("cannot write " + path);
    out << text;
    if (!out) throw wsi::IoError("write failed: " + path);
}

std::string path_in(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

// ---------------------------------------------------------------- stages

void write_synth(const wsi::SynthCorpus& c, const std::string& dir, bool binary) {
    fs::create_directories(dir);
    wsi::save_vocab(c.vocab, path_in(dir, wsi::artifact::kVocab));
    wsi::save_sentences(c.sentences, path_in(dir, wsi::artifact::kSentences));
    wsi::write_records(path_in(dir, binary ? "records.subbin" : wsi::artifact::kRecords), c.records);
    wsi::save_gold(c, path_in(dir, "gold.jsonl"));
}

wsi::InvertedIndex index_records(const std::vector<std::string>& paths, std::size_t vocab_size, std::size_t threads) {
    std::vector<std::vector<wsi::SubstituteRecord>> shards;
    for (const auto& p : paths) shards.push_back(wsi::read_records(p));
    return wsi::build_index_sharded(shards, vocab_size, threads);
}

void write_tags(const wsi::TaggedCorpus& tagged, const wsi::SentenceStore& sentences, const std::string& tags_path,
                const std::string& text_path) {
    wsi::save_sidecar(tagged.tags, tags_path);
    if (!text_path.empty()) write_text(text_path, wsi::render_tagged_text(sentences, tagged.tags));
}

void add_induction_options(CLI::App* app, wsi::InductionConfig& cfg) {
    app->add_option("--seed", cfg.seed, "Sampling and Louvain seed");
    app->add_option("--sample-cap", cfg.sample_cap, "Occurrences sampled per lemma");
    app->add_option("--min-occurrences", cfg.min_occurrences, "Below this a lemma gets one default sense");
    app->add_option("--resolution", cfg.resolution, "Modularity resolution");
    app->add_option("--max-passes", cfg.max_passes, "Louvain level limit");
}

void add_embedding_options(CLI::App* app, wsi::EmbeddingConfig& cfg, std::string& mode) {
    app->add_option("--dim", cfg.dim);
    app->add_option("--window", cfg.window);
    app->add_option("--mode", mode, "cbow or skipgram")->check(CLI::IsMember({"cbow", "skipgram"}));
    app->add_option("--negatives", cfg.negatives);
    app->add_option("--epochs", cfg.epochs);
    app->add_option("--lr", cfg.learning_rate);
    app->add_option("--sample", cfg.sample, "Subsampling threshold, 0 disables");
    app->add_option("--min-count", cfg.min_count);
    app->add_option("--train-seed", cfg.seed);
    app->add_option("--train-threads", cfg.threads, "More than 1 is not bit-reproducible");
}

ordered_json induction_json(const wsi::InductionConfig& c) {
    return {{"seed", c.seed},           {"sample_cap", c.sample_cap}, {"min_occurrences", c.min_occurrences},
            {"resolution", c.resolution}, {"min_gain", c.min_gain},   {"max_passes", c.max_passes},
            {"representatives_cap", c.representatives_cap}};
}

ordered_json embedding_json(const wsi::EmbeddingConfig& c) {
    return {{"mode", c.mode == wsi::TrainMode::Cbow ? "cbow" : "skipgram"},
            {"dim", c.dim},
            {"window", c.window},
            {"negatives", c.negatives},
            {"epochs", c.epochs},
            {"learning_rate", c.learning_rate},
            {"min_learning_rate", c.min_learning_rate},
            {"sample", c.sample},
            {"min_count", c.min_count},
            {"seed", c.seed},
            {"threads", c.threads}};
}

// ---------------------------------------------------------------- eval helpers

struct GoldRow {
    wsi::Occurrence occ;
    wsi::LemmaId lemma;
    std::string label;
};

std::vector<GoldRow> load_gold(const std::string& path) {
    std::istringstream in(slurp(path));
    std::vector<GoldRow> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            GoldRow r;
            r.occ = {j.at("doc").get<std::uint64_t>(), j.at("sent").get<std::uint32_t>(),
                     j.at("tok").get<std::uint16_t>()};
            r.lemma = j.at("target").get<wsi::LemmaId>();
            const auto& g = j.at("gold");
            r.label = g.is_string() ? g.get<std::string>() : g.dump();
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw wsi::IoError(path + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

ordered_json cluster_report(const std::vector<GoldRow>& gold, const std::vector<wsi::TagEntry>& tags,
                            const wsi::VocabTable* vocab) {
    std::map<std::pair<wsi::Occurrence, wsi::LemmaId>, wsi::SenseId> predicted;
    for (const auto& t : tags) predicted[{t.occ, t.lemma}] = t.sense;

    std::map<wsi::LemmaId, std::pair<std::vector<std::uint32_t>, std::vector<std::string>>> per_lemma;
    std::size_t missing = 0;
    for (const auto& g : gold) {
        auto it = predicted.find({g.occ, g.lemma});
        if (it == predicted.end()) {
            ++missing;
            continue;
        }
        per_lemma[g.lemma].first.push_back(it->second);
        per_lemma[g.lemma].second.push_back(g.label);
    }
    if (per_lemma.empty()) throw wsi::Error("no gold occurrence has a tag");

    ordered_json lemmas = ordered_json::array();
    double f_sum = 0, v_sum = 0;
    std::vector<std::string> all_gold;
    std::vector<std::uint32_t> all_pred;
    std::uint32_t offset = 0;
    for (const auto& [lemma, rows] : per_lemma) {
        const auto& [pred, labels] = rows;
        std::map<std::string, std::uint32_t> label_ids;
        std::vector<std::uint32_t> gold_ids;
        for (const auto& l : labels) gold_ids.push_back(label_ids.emplace(l, label_ids.size()).first->second);
        const auto f = wsi::paired_fscore(gold_ids, pred);
        const auto v = wsi::v_measure(gold_ids, pred);
        f_sum += f.fscore;
        v_sum += v.v;
        std::uint32_t max_pred = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            all_pred.push_back(offset + pred[i]);
            all_gold.push_back(std::to_string(lemma) + "#" + labels[i]);
            max_pred = std::max(max_pred, pred[i]);
        }
        offset += max_pred + 1;
        ordered_json j;
        j["lemma"] = vocab ? ordered_json(vocab->lemma(lemma)) : ordered_json(lemma);
        j["instances"] = pred.size();
        j["paired_f"] = f.fscore;
        j["v_measure"] = v.v;
        lemmas.push_back(std::move(j));
    }
    const auto mapping = wsi::best_many_to_one_map(all_gold, all_pred);
    ordered_json r;
    r["lemmas"] = per_lemma.size();
    r["instances"] = all_pred.size();
    r["untagged_gold"] = missing;
    r["paired_f"] = f_sum / per_lemma.size();
    r["v_measure"] = v_sum / per_lemma.size();
    r["tagging_f1"] = wsi::tagging_f1(all_gold, all_pred, mapping);
    r["per_lemma"] = std::move(lemmas);
    return r;
}

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Substitute-based word sense induction toolkit"};
    app.require_subcommand(1);

    // synth
    std::string synth_spec_path, synth_out;
    bool synth_binary = false;
    auto* synth = app.add_subcommand("synth", "Generate a planted-sense corpus with gold labels");
    synth->add_option("--spec", synth_spec_path, "JSON generator spec (defaults if omitted)");
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_flag("--binary", synth_binary, "Write records as .subbin");

    // index
    std::string index_vocab, index_out;
    std::vector<std::string> index_records_in;
    std::size_t threads = 1;
    auto* index = app.add_subcommand("index", "Build the inverted index from substitute records");
    index->add_option("--vocab", index_vocab)->required();
    index->add_option("--records", index_records_in, "Record shards (JSONL or .subbin)")->required();
    index->add_option("--out", index_out)->required();
    index->add_option("--threads", threads);

    // induce
    wsi::InductionConfig icfg;
    std::string induce_index, induce_vocab, induce_out, induce_inventory, induce_lemma, induce_dump;
    std::size_t table_rows = 5;
    auto* induce = app.add_subcommand("induce", "Cluster substitutes into senses");
    induce->add_option("--index", induce_index);
    induce->add_option("--vocab", induce_vocab)->required();
    induce->add_option("--out", induce_out, "Inventory JSONL to write");
    induce->add_option("--inventory", induce_inventory, "Use an existing inventory instead of inducing");
    induce->add_option("--lemma", induce_lemma, "Print this lemma's representative table");
    induce->add_option("--dump", induce_dump, "Write every lemma's table to this file");
    induce->add_option("--rows", table_rows, "Representatives per table column");
    induce->add_option("--threads", threads);
    add_induction_options(induce, icfg);

    // tag
    std::string tag_index, tag_inventory, tag_sentences, tag_out, tag_text, tag_support_out;
    auto* tag = app.add_subcommand("tag", "Assign every indexed occurrence to a sense");
    tag->add_option("--index", tag_index)->required();
    tag->add_option("--inventory", tag_inventory)->required();
    tag->add_option("--sentences", tag_sentences)->required();
    tag->add_option("--out", tag_out, "Sidecar JSONL")->required();
    tag->add_option("--text", tag_text, "Sense-suffixed corpus text");
    tag->add_option("--update-support", tag_support_out, "Write an inventory with full-corpus support counts");
    tag->add_option("--threads", threads);

    // train
    wsi::EmbeddingConfig ecfg;
    std::string train_mode = "cbow", train_corpus, train_out;
    auto* train = app.add_subcommand("train", "Train embeddings on a (sense-tagged) corpus");
    train->add_option("--corpus", train_corpus, "Whitespace-tokenized text")->required();
    train->add_option("--out", train_out, "Vectors (.bin for binary)")->required();
    add_embedding_options(train, ecfg, train_mode);

    // eval-wic
    std::string wic_emb, wic_data, wic_gold, wic_dev_data, wic_dev_gold, wic_comparison = "senses";
    std::optional<double> wic_threshold;
    auto* eval_wic = app.add_subcommand("eval-wic", "Word-in-context evaluation");
    eval_wic->add_option("--emb", wic_emb)->required();
    eval_wic->add_option("--data", wic_data)->required();
    eval_wic->add_option("--gold", wic_gold);
    eval_wic->add_option("--dev-data", wic_dev_data, "Tune the threshold on this set");
    eval_wic->add_option("--dev-gold", wic_dev_gold);
    eval_wic->add_option("--threshold", wic_threshold);
    eval_wic->add_option("--comparison", wic_comparison)->check(CLI::IsMember({"senses", "context"}));

    // eval-outlier
    std::string out_emb, out_data;
    auto* eval_outlier = app.add_subcommand("eval-outlier", "Outlier detection evaluation");
    eval_outlier->add_option("--emb", out_emb)->required();
    eval_outlier->add_option("--data", out_data)->required();

    // eval-cluster
    std::string cl_gold, cl_tags, cl_vocab;
    auto* eval_cluster = app.add_subcommand("eval-cluster", "Score sense tags against gold labels");
    eval_cluster->add_option("--gold", cl_gold, "JSONL {doc, sent, tok, target, gold}")->required();
    eval_cluster->add_option("--tags", cl_tags, "Sidecar JSONL")->required();
    eval_cluster->add_option("--vocab", cl_vocab, "Report lemma strings");

    // serve
    std::string serve_dir, serve_host = "127.0.0.1", serve_static;
    int serve_port = 8080;
    auto* serve = app.add_subcommand("serve", "Serve the search API over an artifact directory");
    serve->add_option("--dir", serve_dir)->required();
    serve->add_option("--host", serve_host);
    serve->add_option("--port", serve_port);
    serve->add_option("--static", serve_static, "Directory served at /");

    // neighbors
    std::string nb_emb, nb_token;
    std::size_t nb_k = 10;
    bool nb_senses_only = false;
    auto* neighbors = app.add_subcommand("neighbors", "Nearest neighbors of a token");
    neighbors->add_option("--emb", nb_emb)->required();
    neighbors->add_option("--token", nb_token)->required();
    neighbors->add_option("-k", nb_k);
    neighbors->add_flag("--senses-only", nb_senses_only, "Only sense-suffixed neighbors");

    // pipeline
    std::string pl_synth, pl_out, pl_vocab, pl_sentences;
    std::vector<std::string> pl_records;
    bool pl_skip_train = false;
    std::string pl_mode = "cbow";
    auto* pipeline = app.add_subcommand("pipeline", "synth-or-extracted input -> index -> induce -> tag -> train");
    pipeline->add_option("--synth", pl_synth, "Generator spec JSON");
    pipeline->add_option("--records", pl_records, "Extracted record shards");
    pipeline->add_option("--vocab", pl_vocab, "Vocab of the extracted records");
    pipeline->add_option("--sentences", pl_sentences, "Sentences of the extracted records");
    pipeline->add_option("--out", pl_out)->required();
    pipeline->add_flag("--skip-train", pl_skip_train);
    pipeline->add_option("--threads", threads);
    add_induction_options(pipeline, icfg);
    add_embedding_options(pipeline, ecfg, pl_mode);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            wsi::SynthSpec spec;
            if (!synth_spec_path.empty()) spec = wsi::synth_spec_from_json(slurp(synth_spec_path));
            write_synth(wsi::generate_synth_corpus(spec), synth_out, synth_binary);
        } else if (*index) {
            const auto vocab = wsi::load_vocab(index_vocab);
            wsi::save_index(index_records(index_records_in, vocab.size(), threads), index_out);
        } else if (*induce) {
            const auto vocab = wsi::load_vocab(induce_vocab);
            wsi::SenseInventory inv;
            if (!induce_inventory.empty()) {
                inv = wsi::load_inventory(induce_inventory);
            } else {
                if (induce_index.empty()) throw wsi::Error("induce needs --index or --inventory");
                const auto idx = wsi::load_index(induce_index);
                if (idx.vocab_size() != vocab.size()) throw wsi::Error("index and vocab sizes differ");
                if (!induce_lemma.empty() && induce_out.empty() && induce_dump.empty()) {
                    const auto id = vocab.at(induce_lemma);
                    inv[id] = wsi::induce_senses(id, idx, icfg);
                } else {
                    inv = wsi::induce_all(idx, icfg, threads);
                }
            }
            if (!induce_out.empty()) wsi::save_inventory(inv, induce_out);
            if (!induce_dump.empty()) {
                std::string dump;
                for (const auto& [_, entry] : inv)
                    dump += wsi::format_sense_table(entry, vocab, table_rows) + "\n";
                write_text(induce_dump, dump);
            }
            if (!induce_lemma.empty()) {
                auto it = inv.find(vocab.at(induce_lemma));
                if (it == inv.end()) throw wsi::Error("no senses induced for " + induce_lemma);
                std::cout << wsi::format_sense_table(it->second, vocab, table_rows);
            }
        } else if (*tag) {
            const auto idx = wsi::load_index(tag_index);
            auto inv = wsi::load_inventory(tag_inventory);
            const auto sentences = wsi::load_sentences(tag_sentences);
            const auto tagged = wsi::tag_corpus(idx, inv, sentences, threads);
            write_tags(tagged, sentences, tag_out, tag_text);
            if (!tag_support_out.empty()) {
                wsi::update_support(inv, tagged.counts);
                wsi::save_inventory(inv, tag_support_out);
            }
        } else if (*train) {
            ecfg.mode = train_mode == "cbow" ? wsi::TrainMode::Cbow : wsi::TrainMode::SkipGram;
            wsi::TrainStats stats;
            const auto emb = wsi::train(wsi::read_corpus(train_corpus), ecfg, &stats);
            wsi::save_vectors(emb, train_out);
            std::cerr << "vocab " << stats.vocab_size << ", trained tokens " << stats.trained_tokens << "\n";
        } else if (*eval_wic) {
            const auto emb = wsi::load_vectors(wic_emb);
            wsi::WicOptions opts;
            opts.comparison =
                wic_comparison == "senses" ? wsi::WicComparison::TwoSenses : wsi::WicComparison::SenseToContext;
            ordered_json report;
            if (!wic_dev_data.empty()) {
                const auto dev = wsi::load_wic(wic_dev_data, wic_dev_gold);
                opts.threshold = wsi::wic_tune_threshold(emb, dev, opts);
                report["tuned_on"] = dev.size();
            } else if (wic_threshold) {
                opts.threshold = *wic_threshold;
            }
            const auto data = wsi::load_wic(wic_data, wic_gold);
            std::size_t correct = 0, labelled = 0, abstained = 0;
            ordered_json preds = ordered_json::array();
            for (const auto& inst : data) {
                const auto d = wsi::wic_classify(emb, inst, opts);
                abstained += d.abstained;
                preds.push_back(d.same ? "T" : "F");
                if (inst.gold) {
                    ++labelled;
                    correct += (d.same == *inst.gold);
                }
            }
            report["threshold"] = opts.threshold;
            report["instances"] = data.size();
            report["abstained"] = abstained;
            if (labelled) report["accuracy"] = 100.0 * correct / labelled;
            report["predictions"] = std::move(preds);
            std::cout << report.dump(2) << "\n";
        } else if (*eval_outlier) {
            const auto emb = wsi::load_vectors(out_emb);
            const auto groups = wsi::load_outlier_groups(out_data);
            const auto cases = wsi::expand_groups(groups);
            std::vector<wsi::OutlierResult> results;
            ordered_json per_case = ordered_json::array();
            for (const auto& c : cases) {
                results.push_back(wsi::detect_outlier(emb, c));
                per_case.push_back({{"outlier", c.outlier},
                                    {"predicted", results.back().predicted},
                                    {"outlier_position", results.back().outlier_position}});
            }
            const auto s = wsi::opp_and_accuracy(results);
            ordered_json report;
            report["groups"] = groups.size();
            report["cases"] = cases.size();
            report["opp"] = s.opp;
            report["accuracy"] = s.accuracy;
            report["per_case"] = std::move(per_case);
            std::cout << report.dump(2) << "\n";
        } else if (*eval_cluster) {
            std::optional<wsi::VocabTable> vocab;
            if (!cl_vocab.empty()) vocab = wsi::load_vocab(cl_vocab);
            const auto report =
                cluster_report(load_gold(cl_gold), wsi::load_sidecar(cl_tags), vocab ? &*vocab : nullptr);
            std::cout << report.dump(2) << "\n";
        } else if (*serve) {
            wsi::SenseSearchService service(wsi::load_artifacts(serve_dir));
            wsi::HttpServer server(service, serve_static);
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            const int port = server.start(serve_host, serve_port);
            std::cerr << "serving " << serve_dir << " on http://" << serve_host << ":" << port << "\n";
            while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
            server.stop();
        } else if (*neighbors) {
            const auto emb = wsi::load_vectors(nb_emb);
            if (!emb.contains(nb_token)) throw wsi::OovError("no vector for " + nb_token);
            ordered_json out = ordered_json::array();
            for (const auto& n : wsi::nearest_neighbors(
                     emb, nb_token, nb_k,
                     nb_senses_only ? wsi::NeighborFilter::SenseTaggedOnly : wsi::NeighborFilter::All))
                out.push_back({{"token", n.token}, {"cosine", n.cosine}});
            std::cout << out.dump(2) << "\n";
        } else if (*pipeline) {
            ecfg.mode = pl_mode == "cbow" ? wsi::TrainMode::Cbow : wsi::TrainMode::SkipGram;
            const bool extracted = !pl_records.empty();
            if (extracted == !pl_synth.empty()) throw wsi::Error("pipeline needs exactly one of --synth or --records");
            fs::create_directories(pl_out);
            ordered_json config;
            wsi::VocabTable vocab;
            wsi::SentenceStore sentences;
            std::vector<std::string> record_paths;
            if (!extracted) {
                const auto spec = wsi::synth_spec_from_json(slurp(pl_synth));
                auto corpus = wsi::generate_synth_corpus(spec);
                write_synth(corpus, pl_out, false);
                config["synth"] = ordered_json::parse(wsi::synth_spec_to_json(spec));
                vocab = std::move(corpus.vocab);
                sentences = std::move(corpus.sentences);
                record_paths.push_back(path_in(pl_out, wsi::artifact::kRecords));
            } else {
                if (pl_vocab.empty() || pl_sentences.empty())
                    throw wsi::Error("extracted input needs --vocab and --sentences");
                vocab = wsi::load_vocab(pl_vocab);
                sentences = wsi::load_sentences(pl_sentences);
                wsi::save_vocab(vocab, path_in(pl_out, wsi::artifact::kVocab));
                wsi::save_sentences(sentences, path_in(pl_out, wsi::artifact::kSentences));
                record_paths = pl_records;
            }
            const auto idx = index_records(record_paths, vocab.size(), threads);
            wsi::save_index(idx, path_in(pl_out, wsi::artifact::kIndex));
            auto inv = wsi::induce_all(idx, icfg, threads);
            wsi::save_inventory(inv, path_in(pl_out, wsi::artifact::kInventory));
            std::string dump;
            for (const auto& [_, entry] : inv)
                dump += wsi::format_sense_table(entry, vocab) + "\n";
            write_text(path_in(pl_out, "senses.txt"), dump);
            const auto tagged = wsi::tag_corpus(idx, inv, sentences, threads);
            write_tags(tagged, sentences, path_in(pl_out, wsi::artifact::kTags),
                       path_in(pl_out, wsi::artifact::kTaggedText));
            config["induction"] = induction_json(icfg);
            if (!pl_skip_train) {
                const auto emb = wsi::train(wsi::read_corpus(path_in(pl_out, wsi::artifact::kTaggedText)), ecfg);
                wsi::save_vectors(emb, path_in(pl_out, wsi::artifact::kVectors));
                config["embedding"] = embedding_json(ecfg);
            }
            wsi::write_manifest(pl_out, vocab, config);
            std::cerr << "pipeline: " << inv.size() << " lemmas, " << tagged.tags.size() << " tagged occurrences\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

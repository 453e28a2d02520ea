#include "wsi/service.hpp"

#include <charconv>
#include <filesystem>
#include <thread>

#include <httplib.h>

#include "binary_io.hpp"
#include "wsi/error.hpp"
#include "wsi/normalize.hpp"

namespace wsi {

namespace fs = std::filesystem;

Response error_response(int status, const std::string& code, const std::string& message) {
    Response r;
    r.status = status;
    r.body["error"] = {{"code", code}, {"message", message}};
    return r;
}

void write_manifest(const std::string& dir, const VocabTable& vocab, const nlohmann::ordered_json& config) {
    nlohmann::ordered_json m;
    m["version"] = 1;
    m["vocab_hash"] = hex64(vocab.fingerprint());
    m["stopwords"] = {{"asset", fs::path(default_stopwords_path()).filename().string()},
                      {"hash", hex64(file_fingerprint(default_stopwords_path()))}};
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != artifact::kManifest)
            names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    nlohmann::ordered_json files = nlohmann::ordered_json::object();
    for (const auto& n : names) files[n] = hex64(file_fingerprint((fs::path(dir) / n).string()));
    m["files"] = std::move(files);
    m["config"] = config;
    detail::write_file((fs::path(dir) / artifact::kManifest).string(), m.dump(2) + "\n");
}

void validate_artifacts(const Artifacts& a) {
    const std::size_t n = a.vocab.size();
    if (a.index.vocab_size() != n)
        throw Error("artifact mismatch: index built for " + std::to_string(a.index.vocab_size()) +
                    " lemmas, vocab has " + std::to_string(n));
    for (const auto& [lemma, entry] : a.inventory) {
        if (lemma >= n) throw Error("artifact mismatch: inventory lemma " + std::to_string(lemma) + " not in vocab");
        for (const auto& s : entry.senses)
            for (auto r : s.representatives)
                if (r >= n)
                    throw Error("artifact mismatch: inventory representative " + std::to_string(r) + " not in vocab");
    }
    for (const auto& t : a.tags) {
        auto it = a.inventory.find(t.lemma);
        if (it == a.inventory.end())
            throw Error("artifact mismatch: tagged lemma " + std::to_string(t.lemma) + " has no inventory entry");
        if (t.sense >= it->second.senses.size())
            throw Error("artifact mismatch: tag sense " + std::to_string(t.sense) + " out of range for lemma " +
                        a.vocab.lemma(t.lemma));
        if (!a.sentences.token(t.occ.doc_id, t.occ.sent_idx, t.occ.token_idx))
            throw Error("artifact mismatch: tagged occurrence missing from sentence store");
    }
}

Artifacts load_artifacts(const std::string& dir) {
    const fs::path root(dir);
    auto path = [&](const char* name) { return (root / name).string(); };
    Artifacts a;
    try {
        a.manifest = nlohmann::json::parse(detail::read_file(path(artifact::kManifest)));
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("bad manifest: ") + e.what());
    }
    a.vocab = load_vocab(path(artifact::kVocab));
    const std::string actual = hex64(a.vocab.fingerprint());
    const std::string expected = a.manifest.value("vocab_hash", "");
    if (expected != actual)
        throw Error("artifact mismatch: manifest vocab hash " + expected + " but vocab.txt hashes to " + actual);
    a.index = load_index(path(artifact::kIndex));
    a.inventory = load_inventory(path(artifact::kInventory));
    a.tags = load_sidecar(path(artifact::kTags));
    a.sentences = load_sentences(path(artifact::kSentences));
    if (fs::exists(path(artifact::kVectors))) a.embeddings = load_vectors(path(artifact::kVectors));
    validate_artifacts(a);
    return a;
}

SenseSearchService::SenseSearchService(Artifacts artifacts) : a_(std::move(artifacts)) {
    std::sort(a_.tags.begin(), a_.tags.end(), [](const TagEntry& x, const TagEntry& y) {
        return std::tie(x.occ, x.lemma) < std::tie(y.occ, y.lemma);
    });
    for (std::size_t i = 0; i < a_.tags.size(); ++i) by_lemma_[a_.tags[i].lemma].push_back(i);
}

namespace {

nlohmann::ordered_json hit_json(const Artifacts& a, const TagEntry& t) {
    nlohmann::ordered_json h;
    h["doc"] = t.occ.doc_id;
    h["sent"] = t.occ.sent_idx;
    h["text"] = join_tokens(*a.sentences.find(t.occ.doc_id, t.occ.sent_idx));
    h["token_idx"] = t.occ.token_idx;
    h["sense"] = t.sense;
    h["confident"] = t.confident;
    return h;
}

}  // namespace

Response SenseSearchService::senses(const std::string& word) const {
    const auto lemma = a_.vocab.find(word);
    const auto it = lemma ? a_.inventory.find(*lemma) : a_.inventory.end();
    if (it == a_.inventory.end()) return error_response(404, "unknown_word", "no senses for '" + word + "'");
    Response r;
    r.body["word"] = word;
    r.body["senses"] = nlohmann::ordered_json::array();
    const auto tag_ids = by_lemma_.find(*lemma);
    for (const auto& s : it->second.senses) {
        nlohmann::ordered_json j;
        j["lemma"] = word;
        j["sense"] = s.id;
        j["token"] = sense_token(word, s.id);
        j["representatives"] = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < s.representatives.size() && i < kRepresentatives; ++i)
            j["representatives"].push_back(a_.vocab.lemma(s.representatives[i]));
        j["support"] = s.support;
        j["examples"] = nlohmann::ordered_json::array();
        if (tag_ids != by_lemma_.end())
            for (auto id : tag_ids->second) {
                if (j["examples"].size() >= kExamples) break;
                if (a_.tags[id].sense == s.id) j["examples"].push_back(hit_json(a_, a_.tags[id]));
            }
        r.body["senses"].push_back(std::move(j));
    }
    return r;
}

Response SenseSearchService::hit_list(const std::vector<std::size_t>& tag_ids, std::size_t limit,
                                      std::size_t offset) const {
    Response r;
    r.body["total"] = tag_ids.size();
    r.body["offset"] = offset;
    r.body["hits"] = nlohmann::ordered_json::array();
    for (std::size_t i = offset; i < tag_ids.size() && i < offset + limit; ++i)
        r.body["hits"].push_back(hit_json(a_, a_.tags[tag_ids[i]]));
    return r;
}

Response SenseSearchService::search(const std::string& word_in, std::optional<SenseId> sense, std::size_t limit,
                                    std::size_t offset, bool confident_only) const {
    std::string word = word_in;
    if (!sense && word.find('@') != std::string::npos) {
        auto parsed = parse_token(word);
        word = parsed.surface;
        sense = parsed.sense;
    }
    if (limit > kMaxLimit) return error_response(400, "bad_request", "limit exceeds " + std::to_string(kMaxLimit));
    const auto lemma = a_.vocab.find(word);
    const auto inv = lemma ? a_.inventory.find(*lemma) : a_.inventory.end();
    if (inv == a_.inventory.end()) return error_response(404, "unknown_word", "no senses for '" + word + "'");
    if (sense && *sense >= inv->second.senses.size())
        return error_response(404, "unknown_sense", sense_token(word, *sense) + " does not exist");
    std::vector<std::size_t> matches;
    if (auto it = by_lemma_.find(*lemma); it != by_lemma_.end())
        for (auto id : it->second) {
            const auto& t = a_.tags[id];
            if (sense && t.sense != *sense) continue;
            if (confident_only && !t.confident) continue;
            matches.push_back(id);
        }
    return hit_list(matches, limit, offset);
}

Response SenseSearchService::neighbors(const std::string& token, std::size_t k) const {
    if (!a_.embeddings) return error_response(503, "no_embeddings", "service was started without embeddings");
    if (!a_.embeddings->contains(token)) return error_response(404, "unknown_token", "no vector for '" + token + "'");
    Response r;
    r.body = nlohmann::ordered_json::array();
    for (const auto& n : nearest_neighbors(*a_.embeddings, token, k))
        r.body.push_back({{"token", n.token}, {"cosine", n.cosine}});
    return r;
}

Response SenseSearchService::health() const {
    Response r;
    r.body["status"] = "ok";
    r.body["vocab_hash"] = hex64(a_.vocab.fingerprint());
    r.body["artifacts"] = a_.manifest.contains("files") ? nlohmann::ordered_json(a_.manifest["files"])
                                                        : nlohmann::ordered_json::object();
    r.body["embeddings"] = a_.embeddings.has_value();
    return r;
}

namespace {

template <class T>
std::optional<T> parse_uint(const std::string& s) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

const std::string* param(const std::multimap<std::string, std::string>& q, const std::string& key) {
    auto it = q.find(key);
    return it == q.end() ? nullptr : &it->second;
}

}  // namespace

Response SenseSearchService::handle(const std::string& path,
                                    const std::multimap<std::string, std::string>& query) const {
    static const std::string senses_prefix = "/api/senses/";
    if (path.rfind(senses_prefix, 0) == 0 && path.size() > senses_prefix.size())
        return senses(path.substr(senses_prefix.size()));
    if (path == "/api/health") return health();
    if (path == "/api/search") {
        const auto* word = param(query, "word");
        if (!word || word->empty()) return error_response(400, "bad_request", "missing 'word'");
        std::optional<SenseId> sense;
        if (const auto* s = param(query, "sense"); s && !s->empty()) {
            sense = parse_uint<SenseId>(*s);
            if (!sense) return error_response(400, "bad_request", "'sense' must be a non-negative integer");
        }
        std::size_t limit = kDefaultLimit, offset = 0;
        if (const auto* s = param(query, "limit")) {
            auto v = parse_uint<std::size_t>(*s);
            if (!v) return error_response(400, "bad_request", "'limit' must be a non-negative integer");
            limit = *v;
        }
        if (const auto* s = param(query, "offset")) {
            auto v = parse_uint<std::size_t>(*s);
            if (!v) return error_response(400, "bad_request", "'offset' must be a non-negative integer");
            offset = *v;
        }
        bool confident = false;
        if (const auto* s = param(query, "confident")) {
            if (*s == "true" || *s == "1") confident = true;
            else if (*s == "false" || *s == "0") confident = false;
            else return error_response(400, "bad_request", "'confident' must be true or false");
        }
        return search(*word, sense, limit, offset, confident);
    }
    if (path == "/api/neighbors") {
        const auto* token = param(query, "token");
        if (!token || token->empty()) return error_response(400, "bad_request", "missing 'token'");
        std::size_t k = 10;
        if (const auto* s = param(query, "k")) {
            auto v = parse_uint<std::size_t>(*s);
            if (!v || *v > kMaxLimit) return error_response(400, "bad_request", "'k' must be an integer in [0, 1000]");
            k = *v;
        }
        return neighbors(*token, k);
    }
    return error_response(404, "not_found", "no route for " + path);
}

struct HttpServer::Impl {
    const SenseSearchService& service;
    httplib::Server server;
    std::thread thread;
};

HttpServer::HttpServer(const SenseSearchService& service, std::string static_dir)
    : impl_(new Impl{service, {}, {}}) {
    auto& svc = impl_->service;
    impl_->server.Get(R"(/api/.*)", [&svc](const httplib::Request& req, httplib::Response& res) {
        std::multimap<std::string, std::string> q(req.params.begin(), req.params.end());
        Response r;
        try {
            r = svc.handle(req.path, q);
        } catch (const std::exception& e) {
            r = error_response(500, "internal", e.what());
        }
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json; charset=utf-8");
    });
    if (!static_dir.empty() && !impl_->server.set_mount_point("/", static_dir))
        throw IoError("static directory not found: " + static_dir);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void HttpServer::stop() {
    if (!impl_) return;
    if (impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

}  // namespace wsi

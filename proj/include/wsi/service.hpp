#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wsi/embeddings.hpp"
#include "wsi/index.hpp"
#include "wsi/induction.hpp"
#include "wsi/sentence_store.hpp"
#include "wsi/tagger.hpp"
#include "wsi/vocab.hpp"

namespace wsi {

/// File names inside an artifact directory.
namespace artifact {
inline constexpr const char* kVocab = "vocab.txt";
inline constexpr const char* kRecords = "records.jsonl";
inline constexpr const char* kSentences = "sentences.jsonl";
inline constexpr const char* kIndex = "index.wsix";
inline constexpr const char* kInventory = "inventory.jsonl";
inline constexpr const char* kTags = "tags.jsonl";
inline constexpr const char* kTaggedText = "tagged.txt";
inline constexpr const char* kVectors = "vectors.txt";
inline constexpr const char* kManifest = "manifest.json";
}  // namespace artifact

struct Artifacts {
    VocabTable vocab;
    InvertedIndex index;
    SenseInventory inventory;
    std::vector<TagEntry> tags;
    SentenceStore sentences;
    std::optional<EmbeddingMatrix> embeddings;
    nlohmann::json manifest;
};

/// Writes manifest.json: vocab hash, stopword asset, a hash of every other
/// file in the directory, and the given run configuration.
void write_manifest(const std::string& dir, const VocabTable& vocab, const nlohmann::ordered_json& config);

/// Loads an artifact directory and checks that everything shares one vocab:
/// the manifest's vocab hash must match vocab.txt and every id must be in
/// range. Throws Error with a diagnostic otherwise.
Artifacts load_artifacts(const std::string& dir);

/// Checks cross-artifact consistency of already loaded artifacts.
void validate_artifacts(const Artifacts& a);

struct Response {
    int status = 200;
    nlohmann::ordered_json body;
};

/// Read-only request handlers over immutable artifacts.
class SenseSearchService {
public:
    explicit SenseSearchService(Artifacts artifacts);

    Response senses(const std::string& word) const;
    /// `sense` absent means every sense; `word` may carry an "@k" suffix.
    Response search(const std::string& word, std::optional<SenseId> sense, std::size_t limit, std::size_t offset,
                    bool confident_only) const;
    Response neighbors(const std::string& token, std::size_t k) const;
    Response health() const;

    /// Routes a GET request; query holds decoded parameters.
    Response handle(const std::string& path, const std::multimap<std::string, std::string>& query) const;

    const Artifacts& artifacts() const noexcept { return a_; }

    static constexpr std::size_t kDefaultLimit = 10;
    static constexpr std::size_t kMaxLimit = 1000;
    static constexpr std::size_t kExamples = 3;
    static constexpr std::size_t kRepresentatives = 10;

private:
    Response hit_list(const std::vector<std::size_t>& tag_ids, std::size_t limit, std::size_t offset) const;

    Artifacts a_;
    /// lemma -> tag positions (indices into a_.tags), in corpus order.
    std::map<LemmaId, std::vector<std::size_t>> by_lemma_;
};

Response error_response(int status, const std::string& code, const std::string& message);

/// HTTP front end. start() binds (port 0 picks a free port) and serves on a
/// background thread; stop() stops accepting and waits for in-flight requests.
class HttpServer {
public:
    HttpServer(const SenseSearchService& service, std::string static_dir = "");
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    int start(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace wsi

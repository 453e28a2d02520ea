#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsi/embeddings.hpp"

namespace wsi {

// ---------------------------------------------------------------- WiC

struct WicInstance {
    std::string target;
    std::string pos;
    std::vector<std::string> context1;
    std::vector<std::string> context2;
    /// Target positions within each context.
    std::size_t index1 = 0;
    std::size_t index2 = 0;
    std::optional<bool> gold;
};

enum class WicComparison {
    /// cosine between the sense selected in each context.
    TwoSenses,
    /// cosine between the sense selected in context 1 and context 2's vector.
    SenseToContext,
};

struct WicOptions {
    double threshold = 0.68;
    WicComparison comparison = WicComparison::TwoSenses;
    /// Prediction when the target has no sense entry or a context is all OOV.
    bool abstain_prediction = true;
};

struct WicDecision {
    bool same = false;
    bool abstained = false;
    double similarity = 0.0;
};

/// Context tokens resolve to the plain token if present, else to sense 0.
std::optional<std::size_t> resolve_context_token(const EmbeddingMatrix& emb, const std::string& word);

/// Similarity between the two contexts' readings of the target, or nullopt
/// when the instance cannot be resolved.
std::optional<double> wic_similarity(const EmbeddingMatrix& emb, const WicInstance& inst,
                                     WicComparison comparison = WicComparison::TwoSenses);
WicDecision wic_classify(const EmbeddingMatrix& emb, const WicInstance& inst, const WicOptions& opts = {});

/// Maximizes dev accuracy over thresholds -1.00, -0.99, ..., 1.00; ties
/// to the smallest threshold.
double wic_tune_threshold(const EmbeddingMatrix& emb, std::span<const WicInstance> dev, const WicOptions& opts = {});
double wic_tune_threshold(std::span<const std::optional<double>> similarities, std::span<const bool> gold,
                          bool abstain_prediction = true);

/// Tab-separated word, pos, "i1-i2", context1, context2. Gold file has one
/// T/F per line (optional).
std::vector<WicInstance> load_wic(const std::string& data_path, const std::string& gold_path = "");

// ---------------------------------------------------------------- outliers

struct OutlierGroup {
    std::vector<std::string> ingroup;
    std::string distractor;
    std::vector<std::string> outliers;
};

/// Group elements (ingroup + distractor) plus one outlier.
struct OutlierCase {
    std::vector<std::string> elements;
    std::string outlier;
};

struct OutlierResult {
    std::string predicted;
    /// 0-based rank of the true outlier; |W|-1 means it was detected.
    std::size_t outlier_position = 0;
    std::size_t group_size = 0;
    /// (word, c(word)) in rank order.
    std::vector<std::pair<std::string, double>> ranking;
};

/// Picks one token per word: start from the sense nearest the centroid of
/// every word's default vector, then re-pick each word (in input order) to
/// maximize mean cosine to the others until a sweep changes nothing or 10
/// sweeps have run. Throws OovError for a word without entries.
std::vector<std::string> resolve_prototypes(const EmbeddingMatrix& emb, std::span<const std::string> words,
                                            std::size_t max_sweeps = 10);

/// c(w) for every element: mean cosine over ordered distinct pairs of W \ {w}.
std::vector<double> compactness(std::span<const std::vector<float>> vectors);
std::vector<double> compactness(const EmbeddingMatrix& emb, std::span<const std::string> resolved_tokens);

/// Ranks elements from most to least cohesive with the rest of the group,
/// i.e. by ascending c(w), resolving senses separately for each W \ {w}. The
/// last element is the predicted outlier. Ties go to the smaller word.
/// Throws GroupError if a word cannot be resolved.
OutlierResult detect_outlier(const EmbeddingMatrix& emb, const OutlierCase& c);

struct OutlierSummary {
    double opp = 0.0;
    double accuracy = 0.0;
};
OutlierSummary opp_and_accuracy(std::span<const OutlierResult> results);

std::vector<OutlierCase> expand_groups(std::span<const OutlierGroup> groups);
std::vector<OutlierGroup> load_outlier_groups(const std::string& path);

// ---------------------------------------------------------------- clustering

struct PairedScore {
    double precision = 0.0;
    double recall = 0.0;
    double fscore = 0.0;
};

/// Pair-counting precision/recall of co-clustered instance pairs. A side
/// with no co-clustered pair gets precision (or recall) 1 by convention when
/// the other side also has none, otherwise 0.
PairedScore paired_fscore(std::span<const std::uint32_t> gold, std::span<const std::uint32_t> predicted);

struct VMeasure {
    double homogeneity = 0.0;
    double completeness = 0.0;
    double v = 0.0;
};
VMeasure v_measure(std::span<const std::uint32_t> gold, std::span<const std::uint32_t> predicted);

/// Majority gold label per predicted cluster; ties to the smaller label.
std::map<std::uint32_t, std::string> best_many_to_one_map(std::span<const std::string> gold,
                                                          std::span<const std::uint32_t> predicted);
/// Micro-averaged F1 of mapped predictions against gold labels.
double tagging_f1(std::span<const std::string> gold, std::span<const std::uint32_t> predicted,
                  const std::map<std::uint32_t, std::string>& cluster_to_label);

}  // namespace wsi

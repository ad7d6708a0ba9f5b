#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mred/category.hpp"

namespace mred::extract {

enum class SimilarityKind { tfidf_cosine, word_overlap };
enum class Engine { lexrank, textrank, mmr };

Engine parse_engine(std::string_view name);
std::string_view engine_name(Engine e) noexcept;
SimilarityKind parse_similarity(std::string_view name);
std::string_view similarity_name(SimilarityKind k) noexcept;

struct EngineConfig {
    double damping = 0.85;
    double tolerance = 1e-6;
    std::size_t max_iterations = 100;
    double mmr_lambda = 0.5;
    /// Unset: TF-IDF cosine for LexRank and MMR, word overlap for TextRank.
    std::optional<SimilarityKind> similarity;

    SimilarityKind similarity_for(Engine e) const noexcept;
    /// Throws Error{"bad_config"}.
    void validate() const;
    nlohmann::json to_json() const;
    /// Overrides fields present in `j`; unknown keys are rejected.
    static EngineConfig from_json(const nlohmann::json& j, EngineConfig base);
    static EngineConfig from_json(const nlohmann::json& j);
};

struct RankedSentence {
    std::size_t index = 0;
    double score = 0;
    std::optional<Category> label;
};

struct Ranking {
    /// One entry per input sentence, in input order.
    std::vector<RankedSentence> sentences;
    /// Selection priority: indices, best first. Score order with ties to the
    /// lower index for the centrality engines; the greedy trace for MMR.
    std::vector<std::size_t> order;
    bool converged = true;
    std::size_t iterations = 0;
};

/// Dense sentence similarity. TF-IDF cosine keeps self-similarity on the
/// diagonal; word overlap is the TextRank edge weight with a zero diagonal.
std::vector<std::vector<double>> similarity_matrix(std::span<const std::string> sentences, SimilarityKind kind);

/// overlap(distinct content tokens) / (log|a| + log|b|); a nonpositive
/// denominator counts as 1 and an empty sentence has no edges.
double word_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Stationary distribution of (1-d)/n + d * row-normalized(sim). Rows that
/// sum to zero are treated as uniform.
Ranking lexrank_from_similarity(const std::vector<std::vector<double>>& sim, const EngineConfig& cfg);
Ranking lexrank_scores(std::span<const std::string> sentences, const EngineConfig& cfg = {});

/// S_i = (1-d) + d * sum_j w_ji / (sum_k w_jk) * S_j, starting from 1.
Ranking textrank_from_weights(const std::vector<std::vector<double>>& w, const EngineConfig& cfg);
Ranking textrank_scores(std::span<const std::string> sentences, const EngineConfig& cfg = {});

/// Greedy MMR; `relevance[i]` is sim(i, centroid). Every RankedSentence
/// score is the step score at which the sentence was picked.
Ranking mmr_from_similarity(const std::vector<double>& relevance, const std::vector<std::vector<double>>& sim,
                            double lambda);
Ranking mmr_rank(std::span<const std::string> sentences, const EngineConfig& cfg = {});

Ranking rank(Engine engine, std::span<const std::string> sentences, const EngineConfig& cfg = {});

/// Attaches aligned labels to a ranking. Throws Error{"precondition"} on a
/// length mismatch.
void attach_labels(Ranking& ranking, std::span<const Category> labels);

struct Slot {
    std::size_t index = 0;
    /// Label of the chosen sentence, when known.
    std::optional<Category> label;
    /// Controlled slots only: the label that was asked for.
    std::optional<Category> requested;
    bool fallback = false;
};

struct Selection {
    std::vector<Slot> slots;
    std::vector<std::string> warnings;

    std::vector<std::size_t> indices() const;
};

/// Top k by priority, emitted in document order.
Selection select_unctrl(const Ranking& ranking, std::size_t k);

/// For each control label in order, the best unused sentence carrying it;
/// otherwise the best unused sentence overall, flagged as a fallback.
Selection select_ctrl(const Ranking& ranking, std::span<const Category> control);

struct ExtractRequest {
    std::vector<std::string> sentences;
    std::optional<std::vector<Category>> labels;
    std::optional<std::vector<Category>> control;
    std::optional<std::size_t> k;
};

struct ExtractResult {
    Selection selection;
    std::string text;
    bool converged = true;
};

/// Validates the request (exactly one of control and k; labels with control),
/// ranks and selects.
ExtractResult run(const ExtractRequest& request, Engine engine, const EngineConfig& cfg = {});

}  // namespace mred::extract

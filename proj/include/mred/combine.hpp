#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "mred/corpus.hpp"

namespace mred::combine {

inline constexpr std::string_view kSeparator = " <REVBREAK> ";

struct Paragraph {
    std::string submission_id;
    std::string review_id;
    std::size_t review_index = 0;
    std::size_t paragraph_index = 0;
    std::string text;
};

/// Pairwise paragraph similarity in [-1, 1].
class SimilarityProvider {
public:
    virtual ~SimilarityProvider() = default;
    /// result[i][j] = similarity(queries[i], targets[j])
    virtual std::vector<std::vector<double>> similarity(const std::vector<Paragraph>& queries,
                                                        const std::vector<Paragraph>& targets) const = 0;
    virtual std::string name() const = 0;
};

/// Cosine over stemmed-unigram TF-IDF fit on the paragraphs passed in
/// (queries and targets together, i.e. one submission).
class TfidfSimilarity final : public SimilarityProvider {
public:
    std::vector<std::vector<double>> similarity(const std::vector<Paragraph>& queries,
                                                const std::vector<Paragraph>& targets) const override;
    std::string name() const override { return "tfidf_cosine"; }
};

/// Cosine over precomputed paragraph embeddings. Throws
/// Error{"provider_failure"} for a paragraph without a vector.
class ExternalVectorSimilarity final : public SimilarityProvider {
public:
    using Key = std::tuple<std::string, std::string, std::size_t>;  // submission, review, paragraph

    explicit ExternalVectorSimilarity(std::map<Key, std::vector<double>> vectors) : vectors_(std::move(vectors)) {}

    /// JSON lines {submission_id?, review_id, paragraph_index, vector}.
    static ExternalVectorSimilarity load(const std::filesystem::path& path);

    std::vector<std::vector<double>> similarity(const std::vector<Paragraph>& queries,
                                                const std::vector<Paragraph>& targets) const override;
    std::string name() const override { return "external_vectors"; }

private:
    const std::vector<double>& lookup(const Paragraph& p) const;
    std::map<Key, std::vector<double>> vectors_;
};

/// Provenance of one stretch of the combined body.
struct Span {
    std::size_t begin = 0;  ///< byte offsets into CombinedInput::body
    std::size_t end = 0;
    std::string review_id;
    std::size_t review_index = 0;
    /// Paragraph within the source review; nullopt when the span is the whole review.
    std::optional<std::size_t> paragraph;

    bool operator==(const Span&) const = default;
};

struct CombinedInput {
    std::optional<std::string> rating_prefix;
    std::string body;
    std::vector<Span> spans;

    /// rating_prefix + " " + body, or body alone.
    std::string text() const;
};

enum class Strategy { concat, rate_concat, merge, rate_merge, longest };

Strategy parse_strategy(std::string_view name);
std::string_view strategy_name(Strategy s) noexcept;

CombinedInput concat(std::span<const corpus::Review> reviews);
/// "R1 rating score: 6, R2 rating score: 3." Throws Error{"missing_rating"}.
std::string rating_sentence(std::span<const corpus::Review> reviews);
CombinedInput rate_concat(std::span<const corpus::Review> reviews);
CombinedInput merge(std::span<const corpus::Review> reviews, const SimilarityProvider& provider,
                    const std::string& submission_id = "");
CombinedInput rate_merge(std::span<const corpus::Review> reviews, const SimilarityProvider& provider,
                         const std::string& submission_id = "");
CombinedInput longest_review(std::span<const corpus::Review> reviews);

/// Index of the review with the most words; earliest on ties.
std::size_t longest_index(std::span<const corpus::Review> reviews);

CombinedInput combine(Strategy strategy, std::span<const corpus::Review> reviews,
                      const SimilarityProvider& provider, const std::string& submission_id = "");

/// One extractable sentence of a combined input.
struct SourceSentence {
    std::string text;
    /// Source review, or nullopt for the synthesized rating sentence.
    std::optional<std::size_t> review_index;
    std::optional<std::size_t> paragraph_index;
    /// Index into corpus::review_sentences() of the source review.
    std::optional<std::size_t> sentence_index;
};

/// Sentences of a combined input in reading order (rating sentence first).
std::vector<SourceSentence> sentence_units(const CombinedInput& input, std::span<const corpus::Review> reviews);

}  // namespace mred::combine

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "mred/category.hpp"
#include "mred/corpus.hpp"

namespace mred::tagger {

/// Transition states: 0 = start, 1..9 = categories, 10 = end.
inline constexpr std::size_t kStates = kNumCategories + 2;
inline constexpr std::size_t kStart = 0;
inline constexpr std::size_t kEnd = kNumCategories + 1;
constexpr std::size_t state_of(Category c) noexcept { return index_of(c) + 1; }

struct TrainOptions {
    std::size_t max_epochs = 200;
    double tolerance = 1e-6;
    double learning_rate = 0.2;
    double l2 = 1e-5;
    std::size_t batch_size = 32;
    std::size_t bigram_min_count = 3;
    std::uint64_t seed = 0;
};

class TaggerModel {
public:
    static constexpr int kFormatVersion = 1;

    /// feature name -> row of emission_weights
    std::unordered_map<std::string, std::uint32_t> vocabulary;
    /// Row-major: feature id * kNumCategories + category.
    std::vector<double> emission_weights;
    /// log P(to | from); -infinity for impossible moves (into start, out of end).
    std::array<std::array<double, kStates>, kStates> transition_log_probs{};
    std::array<double, kNumCategories> log_priors{};
    std::size_t bigram_min_count = 3;
    std::size_t epochs = 0;
    double final_log_likelihood = 0;
    std::vector<std::string> warnings;

    /// Softmax over categories for one sentence in context.
    std::array<double, kNumCategories> emission_probs(std::span<const std::string> sentences, std::size_t i) const;

    nlohmann::json to_json() const;
    static TaggerModel from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static TaggerModel load(const std::filesystem::path& path);
};

/// Feature strings for sentence i of `sentences` (unigrams, bigrams, position
/// bucket, rating-digit flag, bias). Bigrams are filtered by the model.
std::vector<std::string> sentence_features(std::span<const std::string> sentences, std::size_t i);

/// Fits on the gold meta-review sentences of `train`. Throws
/// Error{"empty_split"} when there is nothing to train on.
TaggerModel train(std::span<const corpus::Submission* const> train, const TrainOptions& options = {});
TaggerModel train(std::span<const corpus::Submission> train, const TrainOptions& options = {});

struct TaggedSentence {
    std::string text;
    Category label = Category::misc;
    double confidence = 0;
};

using TaggedReview = std::vector<TaggedSentence>;

/// Viterbi over emission (log p(y|x) - log prior) plus transitions. Paths
/// within 1e-9 resolve by priority order, which is decision aware when the
/// decision is given.
TaggedReview predict(const TaggerModel& model, std::span<const std::string> sentences,
                     std::optional<Decision> decision = std::nullopt);

struct CategoryScore {
    double precision = 0, recall = 0, f1 = 0;
    std::size_t support = 0;    ///< gold count
    std::size_t predicted = 0;  ///< predicted count
};

struct EvalResult {
    double micro_f1 = 0;
    double macro_f1 = 0;
    std::map<Category, CategoryScore> per_category;
    std::size_t n_sentences = 0;
    Category majority_label = Category::misc;
    /// Accuracy of always predicting the split's most frequent gold label.
    double majority_baseline = 0;

    nlohmann::json to_json() const;
};

/// Scores aligned gold/predicted label lists. Macro F1 averages over the
/// categories that occur in either list.
EvalResult score(std::span<const Category> gold, std::span<const Category> predicted);

/// Tags each meta-review of `split` and scores against its gold labels.
EvalResult evaluate(const TaggerModel& model, std::span<const corpus::Submission* const> split);

// --- external labels ---

using LabelKey = std::tuple<std::string, std::string, std::size_t>;  // submission, review, sentence
using LabelMap = std::map<LabelKey, Category>;

struct Coverage {
    std::size_t sentences = 0;
    std::size_t labeled = 0;
    double fraction() const noexcept { return sentences == 0 ? 1.0 : double(labeled) / double(sentences); }
};

/// JSON lines {submission_id, review_id, sentence_index, label}. With a
/// corpus, keys are checked against it (Error{"index_out_of_range"}) and
/// coverage is reported.
LabelMap load_labels(const std::filesystem::path& path, const corpus::Corpus* corpus = nullptr,
                     Coverage* coverage = nullptr);

/// Review-sentence labels for a submission, one list per review. External
/// labels win; uncovered sentences take the model's prediction over the whole
/// review. Throws Error{"precondition"} when a sentence has neither.
std::vector<TaggedReview> tag_reviews(const corpus::Submission& s, const TaggerModel* model,
                                      const LabelMap* external = nullptr);

}  // namespace mred::tagger

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mred/category.hpp"

namespace mred::corpus {

struct Review {
    std::string reviewer_id;
    std::string text;
    std::optional<int> rating;
    std::optional<int> confidence;

    bool operator==(const Review&) const = default;
};

struct LabeledSentence {
    std::string text;
    Category label;

    bool operator==(const LabeledSentence&) const = default;
};

struct MetaReview {
    std::vector<LabeledSentence> sentences;
    Decision decision = Decision::reject;

    std::vector<Category> labels() const;
    /// Sentences joined by single spaces.
    std::string text() const;

    bool operator==(const MetaReview&) const = default;
};

enum class Split { train, validation, test, unassigned };

std::string_view split_name(Split s) noexcept;
Split parse_split(std::string_view s);

struct Submission {
    std::string id;
    int year = 2018;
    std::vector<Review> reviews;
    MetaReview meta_review;
    Split split = Split::unassigned;

    /// Mean of the available reviewer ratings; nullopt when no review is rated.
    std::optional<double> average_rating() const;

    bool operator==(const Submission&) const = default;
};

struct Provenance {
    std::string source;
    std::string harvested_at;
};

struct Corpus {
    std::vector<Submission> submissions;
    Provenance provenance;

    std::size_t review_count() const;
    std::size_t sentence_count() const;
    /// Submissions tagged with `split`, in corpus order.
    std::vector<const Submission*> split(Split s) const;
    const Submission* find(std::string_view id) const;
};

inline constexpr int kFirstYear = 2018;
inline constexpr int kLastYear = 2021;
inline constexpr int kMinRating = 1;
inline constexpr int kMaxRating = 10;

// --- serialization (one JSON object per line) ---

nlohmann::json to_json(const Submission& s);
/// Validates every field. Throws mred::Error with codes "malformed_record"
/// or "unknown_label".
Submission submission_from_json(const nlohmann::json& j);

Corpus read_corpus(std::istream& in, std::string source = "<stream>");
Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

/// $MRED_DATA_DIR, or "./data" when unset.
std::filesystem::path default_data_dir();

// --- sentence units ---

/// Rule-based splitter: breaks after ., ! or ? (plus closing quotes or
/// brackets) when followed by whitespace and an uppercase letter, never
/// after a guarded abbreviation and never inside parentheses or quotes.
/// Blank lines are hard boundaries.
std::vector<std::string> segment_sentences(std::string_view text);

/// Paragraphs separated by blank lines; single newlines inside a paragraph
/// become spaces.
std::vector<std::string> split_paragraphs(std::string_view text);

/// Sentences of a review in reading order: segment_sentences over each
/// paragraph. Indices into this list are the review sentence indices used
/// by label files.
std::vector<std::string> review_sentences(const Review& review);

// --- filtering and splitting ---

struct SplitOptions {
    std::size_t min_words = 20;
    std::size_t max_words = 400;
    std::array<unsigned, 3> ratio = {8, 1, 1};
    std::uint64_t seed = 0;
};

struct SplitReport {
    std::size_t input = 0;
    std::size_t kept = 0;
    std::size_t train = 0;
    std::size_t validation = 0;
    std::size_t test = 0;
};

/// Keeps submissions whose meta-review word count lies in
/// [min_words, max_words] and partitions them. The permutation depends only
/// on the set of kept ids and the seed, so the result is independent of
/// input order and idempotent. Output is sorted by id.
Corpus filter_and_split(const Corpus& corpus, const SplitOptions& options = {},
                        SplitReport* report = nullptr);

}  // namespace mred::corpus

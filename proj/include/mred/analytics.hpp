#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mred/corpus.hpp"

namespace mred::analytics {

/// Maximal same-label runs of a meta-review, one label per run.
std::vector<Category> segments(const corpus::MetaReview& meta_review);

/// Segment transitions with <start>/<end> markers. State 0 is <start>,
/// states 1..9 are the categories in Category order, state 10 is <end>.
struct TransitionMatrix {
    static constexpr std::size_t kStates = kNumCategories + 2;
    static constexpr std::size_t kStart = 0;
    static constexpr std::size_t kEnd = kStates - 1;

    std::array<std::array<std::size_t, kStates>, kStates> counts{};
    std::array<std::array<double, kStates>, kStates> probs{};

    static constexpr std::size_t state_of(Category c) noexcept { return index_of(c) + 1; }
    static std::string state_name(std::size_t state);

    nlohmann::json to_json() const;
    std::string to_csv() const;
    std::string to_svg() const;
};

TransitionMatrix transition_matrix(std::span<const corpus::Submission> submissions);

/// Grouped count table. Each row holds raw counts per column plus the
/// percentage of the row base (`total`).
struct DistributionReport {
    struct Row {
        std::string key;
        std::vector<std::size_t> counts;
        std::size_t total = 0;
        std::vector<double> percent;
    };

    std::string title;
    std::string group_by;
    std::vector<std::string> columns;
    std::vector<Row> rows;
    /// Submissions left out for lack of a rated review.
    std::size_t excluded = 0;
    /// false for occurrence reports, where a meta-review counts toward several
    /// columns and rows do not sum to 100.
    bool row_sums_to_100 = true;

    const Row* row(std::string_view key) const;
    double percent(std::string_view row_key, std::string_view column) const;
    std::size_t count(std::string_view row_key, std::string_view column) const;

    nlohmann::json to_json() const;
    std::string to_csv() const;
    std::string to_svg() const;
};

/// Inclusive upper bounds of word-count bins; the last bin is open.
/// Default {50, 100, 150} -> "<=50", "51-100", "101-150", ">150".
struct LengthBins {
    std::vector<std::size_t> upper = {50, 100, 150};

    std::size_t bin_of(std::size_t words) const;
    std::vector<std::string> names() const;
};

/// Average-score bin edges; bins are "<e0", "[e0,e1)", ..., ">=e_last".
struct ScoreBins {
    std::vector<double> edges = {2, 3, 4, 5, 6, 7, 8, 9};

    std::size_t bin_of(double score) const;
    std::vector<std::string> names() const;
};

std::vector<std::string> category_columns();

DistributionReport category_distribution(std::span<const corpus::Submission> submissions);
DistributionReport length_rating_breakdown(std::span<const corpus::Submission> submissions,
                                           const LengthBins& length_bins = {}, const ScoreBins& score_bins = {});
DistributionReport length_category_breakdown(std::span<const corpus::Submission> submissions,
                                             const LengthBins& length_bins = {});
/// Submissions whose average rating lies in [lo, hi).
DistributionReport borderline_breakdown(std::span<const corpus::Submission> submissions, double lo = 4.5,
                                        double hi = 6.0);

inline constexpr double kLowScoreMax = 5.5;
inline constexpr double kHighScoreMin = 6.5;

DistributionReport occurrence_by_score(std::span<const corpus::Submission> submissions);

/// Palette shared by the SVG charts and the drafting UI.
std::string_view category_color(Category c) noexcept;

}  // namespace mred::analytics

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mred {

/// Intent category of a meta-review sentence.
enum class Category : std::size_t {
    abstract = 0,
    strength,
    weakness,
    rating_summary,
    ac_disagreement,
    rebuttal_process,
    suggestion,
    decision,
    misc,
};

inline constexpr std::size_t kNumCategories = 9;

inline constexpr std::array<Category, kNumCategories> kAllCategories = {
    Category::abstract,        Category::strength,         Category::weakness,
    Category::rating_summary,  Category::ac_disagreement,  Category::rebuttal_process,
    Category::suggestion,      Category::decision,         Category::misc,
};

enum class Decision { accept, reject };

constexpr std::size_t index_of(Category c) noexcept { return static_cast<std::size_t>(c); }

/// Storage name: "rating_summary", "ac_disagreement", ...
std::string_view storage_name(Category c) noexcept;

/// Surface name used in control prefixes: "rating summary", "ac disagreement", ...
std::string_view surface_name(Category c) noexcept;

/// Accepts storage and surface names (and "miscellaneous"); case-sensitive.
std::optional<Category> try_parse_category(std::string_view s) noexcept;

/// Throws mred::Error{"unknown_label"} for anything outside the vocabulary.
Category parse_category(std::string_view s);

/// Annotation priority, 0 = most important:
/// decision > rating summary > strength ?= weakness > ac disagreement >
/// rebuttal process > abstract > suggestion > misc.
/// The strength/weakness tie resolves toward the decision when it is known
/// (accept -> strength first, reject -> weakness first); without a decision
/// strength comes first.
std::size_t priority_rank(Category c, std::optional<Decision> decision = std::nullopt) noexcept;

/// Categories sorted by priority_rank.
std::vector<Category> priority_order(std::optional<Decision> decision = std::nullopt);

/// Collapses maximal runs of equal labels to one label each.
std::vector<Category> collapse_runs(const std::vector<Category>& labels);

std::string_view decision_name(Decision d) noexcept;
Decision parse_decision(std::string_view s);

}  // namespace mred

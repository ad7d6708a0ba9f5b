#include "mred/category.hpp"

#include <algorithm>

#include "mred/error.hpp"

namespace mred {

namespace {

constexpr std::array<std::string_view, kNumCategories> kStorage = {
    "abstract",        "strength",         "weakness",
    "rating_summary",  "ac_disagreement",  "rebuttal_process",
    "suggestion",      "decision",         "misc",
};

constexpr std::array<std::string_view, kNumCategories> kSurface = {
    "abstract",        "strength",         "weakness",
    "rating summary",  "ac disagreement",  "rebuttal process",
    "suggestion",      "decision",         "misc",
};

}  // namespace

std::string_view storage_name(Category c) noexcept { return kStorage[index_of(c)]; }

std::string_view surface_name(Category c) noexcept { return kSurface[index_of(c)]; }

std::optional<Category> try_parse_category(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kNumCategories; ++i) {
        if (s == kStorage[i] || s == kSurface[i]) return kAllCategories[i];
    }
    if (s == "miscellaneous") return Category::misc;
    return std::nullopt;
}

Category parse_category(std::string_view s) {
    if (auto c = try_parse_category(s)) return *c;
    throw Error("unknown_label", "unknown category label '" + std::string(s) + "'");
}

std::size_t priority_rank(Category c, std::optional<Decision> decision) noexcept {
    switch (c) {
        case Category::decision: return 0;
        case Category::rating_summary: return 1;
        case Category::strength: return decision == Decision::reject ? 3 : 2;
        case Category::weakness: return decision == Decision::reject ? 2 : 3;
        case Category::ac_disagreement: return 4;
        case Category::rebuttal_process: return 5;
        case Category::abstract: return 6;
        case Category::suggestion: return 7;
        case Category::misc: return 8;
    }
    return kNumCategories;
}

std::vector<Category> priority_order(std::optional<Decision> decision) {
    std::vector<Category> out(kAllCategories.begin(), kAllCategories.end());
    std::sort(out.begin(), out.end(), [&](Category a, Category b) {
        return priority_rank(a, decision) < priority_rank(b, decision);
    });
    return out;
}

std::vector<Category> collapse_runs(const std::vector<Category>& labels) {
    std::vector<Category> out;
    for (Category c : labels)
        if (out.empty() || out.back() != c) out.push_back(c);
    return out;
}

std::string_view decision_name(Decision d) noexcept {
    return d == Decision::accept ? "accept" : "reject";
}

Decision parse_decision(std::string_view s) {
    if (s == "accept") return Decision::accept;
    if (s == "reject") return Decision::reject;
    throw Error("bad_decision", "decision must be \"accept\" or \"reject\", got '" + std::string(s) + "'");
}

}  // namespace mred

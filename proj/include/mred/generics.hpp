#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mred/corpus.hpp"
#include "mred/extract.hpp"
#include "mred/tagger.hpp"

namespace mred::generics {

enum class Side { target, source };
enum class ScoreFilter { all, high, low };

Side parse_side(std::string_view s);
std::string_view side_name(Side s) noexcept;
ScoreFilter parse_filter(std::string_view s);
std::string_view filter_name(ScoreFilter f) noexcept;

/// high: average rating >= 7; low: <= 3. Unrated submissions pass only `all`.
bool passes(const corpus::Submission& s, ScoreFilter filter);

struct GenericBank {
    Side side = Side::target;
    ScoreFilter filter = ScoreFilter::all;
    /// Per category, sentences best (most generic) first.
    std::array<std::vector<std::string>, kNumCategories> categories;
    std::vector<std::string> warnings;

    const std::vector<std::string>& of(Category c) const { return categories[index_of(c)]; }

    nlohmann::json to_json() const;
    static GenericBank from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static GenericBank load(const std::filesystem::path& path);
};

struct BankOptions {
    extract::EngineConfig textrank;
    /// Groups larger than this are ranked on a seeded uniform sample of this
    /// many sentences; dense TextRank is quadratic in the group size.
    std::size_t max_group = 3000;
    std::uint64_t seed = 0;
    std::size_t threads = 3;
};

/// Groups train sentences by category (gold meta-review labels for the
/// target side, review-sentence labels for the source side) and ranks each
/// group by TextRank. The source side needs a model or external labels.
GenericBank build_generic_bank(std::span<const corpus::Submission* const> train, Side side, ScoreFilter filter,
                               const tagger::TaggerModel* model = nullptr,
                               const tagger::LabelMap* labels = nullptr, const BankOptions& options = {});

/// Ranks one group; returns indices best first (ties to the lower index).
std::vector<std::size_t> rank_group(std::span<const std::string> sentences, const extract::EngineConfig& cfg = {});

struct Assembled {
    std::string text;
    std::vector<std::string> sentences;
    /// Label of each emitted sentence; the control minus skipped slots.
    std::vector<Category> labels;
    std::vector<std::string> warnings;
};

/// Walks each category's ranking in control order, never repeating a string
/// within the output. Exhausted or empty categories skip the slot.
Assembled assemble_generic(const GenericBank& bank, std::span<const Category> control);

}  // namespace mred::generics

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace mred::attn {

/// Cross-attention weights, layers x output tokens x input tokens, row-major.
struct Tensor {
    std::size_t layers = 0;
    std::size_t out_tokens = 0;
    std::size_t in_tokens = 0;
    std::vector<double> values;

    double at(std::size_t l, std::size_t t, std::size_t s) const {
        return values[(l * out_tokens + t) * in_tokens + s];
    }
    double& at(std::size_t l, std::size_t t, std::size_t s) { return values[(l * out_tokens + t) * in_tokens + s]; }

    /// Throws Error{"bad_tensor"} on zero dimensions, size mismatch, or
    /// negative or non-finite values.
    void validate() const;
};

/// Text format: header "layers T S" followed by layers*T*S reals.
Tensor read_tensor(std::istream& in);
Tensor load_tensor(const std::filesystem::path& path);
void write_tensor(std::ostream& out, const Tensor& t);

/// Half-open token range [first, second).
using Range = std::pair<std::size_t, std::size_t>;
using Boundaries = std::vector<Range>;

/// Throws Error{"bad_boundaries"} unless the ranges are nonempty, ordered and
/// tile [0, token_count).
void validate_boundaries(const Boundaries& b, std::size_t token_count);
Boundaries boundaries_from_json(const nlohmann::json& j);

using Matrix = std::vector<std::vector<double>>;

/// Mean over layers (T x S).
Matrix layer_mean(const Tensor& t);

/// Layer mean, then per output token the max over each input sentence, then
/// the sum over the output tokens of each output sentence.
Matrix aggregate(const Tensor& t, const Boundaries& src, const Boundaries& tgt);

/// Columns of the k largest entries of `row`, descending, ties to the lower
/// index. k larger than the row returns every column.
std::vector<std::size_t> top_k_inputs(const Matrix& m, std::size_t row, std::size_t k = 3);

/// Min-max scaling to [0, 1]; constant or single-value input maps to zeros.
std::vector<double> min_max(const std::vector<double>& v);

struct HeatToken {
    std::size_t token = 0;
    double value = 0;
};

/// Display weights for one output sentence: the layer-mean attention summed
/// over the sentence's output tokens, for every token of the selected input
/// sentences and of the control range, min-max scaled over that union.
std::vector<HeatToken> display_heat(const Matrix& mean, const Range& output_sentence, const Boundaries& src,
                                    const std::vector<std::size_t>& selected,
                                    const std::optional<Range>& control = std::nullopt);

/// {matrix, top3, heat} for every output sentence.
nlohmann::json analyze(const Tensor& t, const Boundaries& src, const Boundaries& tgt,
                       const std::optional<Range>& control = std::nullopt, std::size_t k = 3);

/// Heatmap of an aggregated matrix.
std::string matrix_svg(const Matrix& m);

}  // namespace mred::attn

#include "mred/attnmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "mred/error.hpp"

namespace mred::attn {

void Tensor::validate() const {
    if (layers == 0 || out_tokens == 0 || in_tokens == 0) throw Error("bad_tensor", "tensor dimensions must be >= 1");
    if (values.size() != layers * out_tokens * in_tokens)
        throw Error("bad_tensor", "expected " + std::to_string(layers * out_tokens * in_tokens) + " values, got " +
                                      std::to_string(values.size()));
    for (double v : values)
        if (!std::isfinite(v) || v < 0) throw Error("bad_tensor", "attention weights must be finite and non-negative");
}

Tensor read_tensor(std::istream& in) {
    Tensor t;
    if (!(in >> t.layers >> t.out_tokens >> t.in_tokens)) throw Error("bad_tensor", "missing 'layers T S' header");
    const std::size_t n = t.layers * t.out_tokens * t.in_tokens;
    t.values.reserve(n);
    double v;
    while (t.values.size() < n && in >> v) t.values.push_back(v);
    if (t.values.size() < n) throw Error("bad_tensor", "tensor file ends early");
    if (in >> v) throw Error("bad_tensor", "trailing values after the tensor");
    t.validate();
    return t;
}

Tensor load_tensor(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open tensor file " + path.string());
    return read_tensor(in);
}

void write_tensor(std::ostream& out, const Tensor& t) {
    out << t.layers << ' ' << t.out_tokens << ' ' << t.in_tokens << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < t.values.size(); ++i) out << t.values[i] << ((i + 1) % t.in_tokens ? ' ' : '\n');
}

void validate_boundaries(const Boundaries& b, std::size_t token_count) {
    std::size_t expect = 0;
    for (const auto& [lo, hi] : b) {
        if (lo != expect || hi <= lo)
            throw Error("bad_boundaries", "sentence ranges must be nonempty, ordered and contiguous from 0");
        expect = hi;
    }
    if (expect != token_count)
        throw Error("bad_boundaries", "sentence ranges cover " + std::to_string(expect) + " of " +
                                          std::to_string(token_count) + " tokens");
}

Boundaries boundaries_from_json(const nlohmann::json& j) {
    try {
        Boundaries b;
        for (const auto& r : j) {
            if (r.size() != 2) throw Error("bad_boundaries", "each range must be [begin, end]");
            b.emplace_back(r[0].get<std::size_t>(), r[1].get<std::size_t>());
        }
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw Error("bad_boundaries", e.what());
    }
}

Matrix layer_mean(const Tensor& t) {
    Matrix m(t.out_tokens, std::vector<double>(t.in_tokens, 0.0));
    for (std::size_t l = 0; l < t.layers; ++l)
        for (std::size_t i = 0; i < t.out_tokens; ++i)
            for (std::size_t s = 0; s < t.in_tokens; ++s) m[i][s] += t.at(l, i, s);
    const double inv = 1.0 / static_cast<double>(t.layers);
    for (auto& row : m)
        for (auto& v : row) v *= inv;
    return m;
}

Matrix aggregate(const Tensor& t, const Boundaries& src, const Boundaries& tgt) {
    t.validate();
    validate_boundaries(src, t.in_tokens);
    validate_boundaries(tgt, t.out_tokens);
    const auto mean = layer_mean(t);
    Matrix out(tgt.size(), std::vector<double>(src.size(), 0.0));
    for (std::size_t o = 0; o < tgt.size(); ++o)
        for (std::size_t tok = tgt[o].first; tok < tgt[o].second; ++tok)
            for (std::size_t s = 0; s < src.size(); ++s)
                out[o][s] += *std::max_element(mean[tok].begin() + static_cast<std::ptrdiff_t>(src[s].first),
                                               mean[tok].begin() + static_cast<std::ptrdiff_t>(src[s].second));
    return out;
}

std::vector<std::size_t> top_k_inputs(const Matrix& m, std::size_t row, std::size_t k) {
    if (k == 0) throw Error("precondition", "k must be at least 1");
    if (row >= m.size()) throw Error("precondition", "row " + std::to_string(row) + " out of range");
    const auto& r = m[row];
    std::vector<std::size_t> idx(r.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return r[a] > r[b]; });
    if (idx.size() > k) idx.resize(k);
    return idx;
}

std::vector<double> min_max(const std::vector<double>& v) {
    std::vector<double> out(v.size(), 0.0);
    if (v.empty()) return out;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double range = *hi - *lo;
    if (!(range > 0)) return out;
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / range;
    return out;
}

std::vector<HeatToken> display_heat(const Matrix& mean, const Range& output_sentence, const Boundaries& src,
                                    const std::vector<std::size_t>& selected, const std::optional<Range>& control) {
    if (selected.empty() && !control) throw Error("precondition", "nothing selected for display");
    if (output_sentence.second > mean.size() || output_sentence.first >= output_sentence.second)
        throw Error("bad_boundaries", "output sentence range outside the tensor");
    const std::size_t in_tokens = mean.empty() ? 0 : mean[0].size();
    std::set<std::size_t> tokens;
    auto add_range = [&](const Range& r) {
        if (r.second > in_tokens || r.first > r.second) throw Error("bad_boundaries", "input range outside the tensor");
        for (std::size_t t = r.first; t < r.second; ++t) tokens.insert(t);
    };
    for (auto s : selected) {
        if (s >= src.size()) throw Error("bad_boundaries", "selected sentence " + std::to_string(s) + " out of range");
        add_range(src[s]);
    }
    if (control) add_range(*control);

    std::vector<std::size_t> order(tokens.begin(), tokens.end());
    std::vector<double> raw;
    raw.reserve(order.size());
    for (auto tok : order) {
        double acc = 0;
        for (std::size_t o = output_sentence.first; o < output_sentence.second; ++o) acc += mean[o][tok];
        raw.push_back(acc);
    }
    const auto scaled = min_max(raw);
    std::vector<HeatToken> out;
    out.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) out.push_back({order[i], scaled[i]});
    return out;
}

nlohmann::json analyze(const Tensor& t, const Boundaries& src, const Boundaries& tgt,
                       const std::optional<Range>& control, std::size_t k) {
    const auto m = aggregate(t, src, tgt);
    const auto mean = layer_mean(t);
    auto top = nlohmann::json::array();
    auto heat = nlohmann::json::array();
    for (std::size_t o = 0; o < m.size(); ++o) {
        const auto sel = top_k_inputs(m, o, k);
        top.push_back(sel);
        auto h = nlohmann::json::array();
        for (const auto& ht : display_heat(mean, tgt[o], src, sel, control))
            h.push_back({{"token", ht.token}, {"value", ht.value}});
        heat.push_back(std::move(h));
    }
    return {{"matrix", m}, {"top3", top}, {"heat", heat}};
}

std::string matrix_svg(const Matrix& m) {
    constexpr int cell = 18, pad = 40;
    const std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
    double hi = 0;
    for (const auto& r : m)
        for (double v : r) hi = std::max(hi, v);
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << pad + cell * cols + 10 << "\" height=\""
       << pad + cell * rows + 10 << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    for (std::size_t c = 0; c < cols; ++c)
        os << "<text x=\"" << pad + cell * c + cell / 2 << "\" y=\"" << pad - 6 << "\" text-anchor=\"middle\">" << c
           << "</text>\n";
    for (std::size_t r = 0; r < rows; ++r) {
        os << "<text x=\"" << pad - 6 << "\" y=\"" << pad + cell * r + cell / 2 + 3 << "\" text-anchor=\"end\">" << r
           << "</text>\n";
        for (std::size_t c = 0; c < cols; ++c) {
            const double a = hi > 0 ? m[r][c] / hi : 0.0;
            os << "<rect x=\"" << pad + cell * c << "\" y=\"" << pad + cell * r << "\" width=\"" << cell
               << "\" height=\"" << cell << "\" fill=\"#b2182b\" fill-opacity=\"" << a
               << "\" stroke=\"#ddd\"><title>" << m[r][c] << "</title></rect>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace mred::attn

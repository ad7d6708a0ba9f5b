#include "mred/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mred/text.hpp"

namespace mred::analytics {

using nlohmann::json;

std::vector<Category> segments(const corpus::MetaReview& meta_review) {
    return collapse_runs(meta_review.labels());
}

// ---------------------------------------------------------------------------
// Transition matrix

std::string TransitionMatrix::state_name(std::size_t state) {
    if (state == kStart) return "<start>";
    if (state == kEnd) return "<end>";
    return std::string(surface_name(kAllCategories[state - 1]));
}

TransitionMatrix transition_matrix(std::span<const corpus::Submission> submissions) {
    TransitionMatrix m;
    for (const auto& s : submissions) {
        const auto segs = segments(s.meta_review);
        if (segs.empty()) continue;
        std::size_t prev = TransitionMatrix::kStart;
        for (Category c : segs) {
            const auto cur = TransitionMatrix::state_of(c);
            ++m.counts[prev][cur];
            prev = cur;
        }
        ++m.counts[prev][TransitionMatrix::kEnd];
    }
    for (std::size_t r = 0; r < TransitionMatrix::kStates; ++r) {
        std::size_t total = 0;
        for (auto v : m.counts[r]) total += v;
        if (total == 0) continue;
        for (std::size_t c = 0; c < TransitionMatrix::kStates; ++c)
            m.probs[r][c] = static_cast<double>(m.counts[r][c]) / static_cast<double>(total);
    }
    return m;
}

json TransitionMatrix::to_json() const {
    json states = json::array();
    for (std::size_t i = 0; i < kStates; ++i) states.push_back(state_name(i));
    json c = json::array(), p = json::array();
    for (std::size_t r = 0; r < kStates; ++r) {
        c.push_back(counts[r]);
        p.push_back(probs[r]);
    }
    return {{"states", states}, {"counts", c}, {"probs", p}};
}

std::string TransitionMatrix::to_csv() const {
    std::ostringstream out;
    out << "from";
    for (std::size_t c = 0; c < kStates; ++c) out << ',' << state_name(c);
    out << '\n';
    for (std::size_t r = 0; r < kStates; ++r) {
        out << state_name(r);
        for (std::size_t c = 0; c < kStates; ++c) out << ',' << probs[r][c];
        out << '\n';
    }
    return out.str();
}

namespace {

std::string fmt(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::string TransitionMatrix::to_svg() const {
    const int cell = 44, left = 130, top = 110;
    const int size = static_cast<int>(kStates) * cell;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + size + 20 << "\" height=\"" << top + size + 20
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (std::size_t i = 0; i < kStates; ++i) {
        const int pos = static_cast<int>(i) * cell;
        out << "<text x=\"" << left - 6 << "\" y=\"" << top + pos + cell / 2 + 4 << "\" text-anchor=\"end\">"
            << xml_escape(state_name(i)) << "</text>\n";
        out << "<text transform=\"translate(" << left + pos + cell / 2 << "," << top - 6
            << ") rotate(-45)\">" << xml_escape(state_name(i)) << "</text>\n";
    }
    for (std::size_t r = 0; r < kStates; ++r) {
        for (std::size_t c = 0; c < kStates; ++c) {
            const double p = probs[r][c];
            const int shade = 255 - static_cast<int>(std::lround(p * 200));
            out << "<rect x=\"" << left + static_cast<int>(c) * cell << "\" y=\"" << top + static_cast<int>(r) * cell
                << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"rgb(" << shade << "," << shade
                << ",255)\" stroke=\"#ccc\"/>\n";
            out << "<text x=\"" << left + static_cast<int>(c) * cell + cell / 2 << "\" y=\""
                << top + static_cast<int>(r) * cell + cell / 2 + 4 << "\" text-anchor=\"middle\">" << fmt(p)
                << "</text>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Distribution reports

const DistributionReport::Row* DistributionReport::row(std::string_view key) const {
    for (const auto& r : rows)
        if (r.key == key) return &r;
    return nullptr;
}

namespace {

std::size_t column_index(const std::vector<std::string>& columns, std::string_view column) {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == column) return i;
    return columns.size();
}

}  // namespace

double DistributionReport::percent(std::string_view row_key, std::string_view column) const {
    const Row* r = row(row_key);
    const auto c = column_index(columns, column);
    if (!r || c >= columns.size()) return 0.0;
    return r->percent[c];
}

std::size_t DistributionReport::count(std::string_view row_key, std::string_view column) const {
    const Row* r = row(row_key);
    const auto c = column_index(columns, column);
    if (!r || c >= columns.size()) return 0;
    return r->counts[c];
}

json DistributionReport::to_json() const {
    json rows_j = json::array();
    for (const auto& r : rows)
        rows_j.push_back({{"key", r.key}, {"counts", r.counts}, {"total", r.total}, {"percent", r.percent}});
    return {{"title", title}, {"group_by", group_by}, {"columns", columns},
            {"rows", rows_j},  {"excluded", excluded}, {"row_sums_to_100", row_sums_to_100}};
}

std::string DistributionReport::to_csv() const {
    std::ostringstream out;
    out << group_by << ",column,count,total,percent\n";
    for (const auto& r : rows)
        for (std::size_t c = 0; c < columns.size(); ++c)
            out << r.key << ',' << columns[c] << ',' << r.counts[c] << ',' << r.total << ',' << fmt(r.percent[c], 4)
                << '\n';
    return out.str();
}

std::string DistributionReport::to_svg() const {
    // Horizontal stacked (or grouped, for occurrence) bars, one per row.
    const int bar_h = 22, gap = 10, left = 130, width = 480, top = 40;
    const int height = top + static_cast<int>(rows.size()) * (bar_h + gap) + 30 +
                       static_cast<int>((columns.size() + 2) / 3) * 16;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + width + 40 << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<text x=\"" << left << "\" y=\"20\" font-size=\"13\">" << xml_escape(title) << "</text>\n";
    auto color_of = [&](std::size_t c) -> std::string {
        if (auto cat = try_parse_category(columns[c])) return std::string(category_color(*cat));
        static const char* fallback[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                         "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};
        return fallback[c % 10];
    };
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const int y = top + static_cast<int>(r) * (bar_h + gap);
        out << "<text x=\"" << left - 6 << "\" y=\"" << y + bar_h / 2 + 4 << "\" text-anchor=\"end\">"
            << xml_escape(rows[r].key) << "</text>\n";
        double scale_total = 100.0;
        if (!row_sums_to_100) {
            scale_total = 0;
            for (double p : rows[r].percent) scale_total += p;
            if (scale_total <= 0) scale_total = 1;
        }
        double x = 0;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const double w = rows[r].percent[c] / scale_total * width;
            out << "<rect x=\"" << fmt(left + x) << "\" y=\"" << y << "\" width=\"" << fmt(w) << "\" height=\""
                << bar_h << "\" fill=\"" << color_of(c) << "\"><title>" << xml_escape(columns[c]) << ": "
                << fmt(rows[r].percent[c]) << "%</title></rect>\n";
            x += w;
        }
    }
    const int legend_y = top + static_cast<int>(rows.size()) * (bar_h + gap) + 10;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const int lx = left + static_cast<int>(c % 3) * 160;
        const int ly = legend_y + static_cast<int>(c / 3) * 16;
        out << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"10\" height=\"10\" fill=\"" << color_of(c)
            << "\"/><text x=\"" << lx + 14 << "\" y=\"" << ly + 9 << "\">" << xml_escape(columns[c]) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Bins

std::size_t LengthBins::bin_of(std::size_t words) const {
    for (std::size_t i = 0; i < upper.size(); ++i)
        if (words <= upper[i]) return i;
    return upper.size();
}

std::vector<std::string> LengthBins::names() const {
    std::vector<std::string> out;
    std::size_t prev = 0;
    for (std::size_t i = 0; i < upper.size(); ++i) {
        out.push_back(i == 0 ? "<=" + std::to_string(upper[i])
                             : std::to_string(prev + 1) + "-" + std::to_string(upper[i]));
        prev = upper[i];
    }
    out.push_back(">" + std::to_string(upper.empty() ? 0 : upper.back()));
    return out;
}

std::size_t ScoreBins::bin_of(double score) const {
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (score < edges[i]) return i;
    return edges.size();
}

std::vector<std::string> ScoreBins::names() const {
    auto num = [](double v) {
        std::string s = fmt(v, 1);
        if (s.size() > 2 && s.substr(s.size() - 2) == ".0") s.resize(s.size() - 2);
        return s;
    };
    std::vector<std::string> out;
    for (std::size_t i = 0; i < edges.size(); ++i)
        out.push_back(i == 0 ? "<" + num(edges[0]) : "[" + num(edges[i - 1]) + "," + num(edges[i]) + ")");
    out.push_back(">=" + num(edges.empty() ? 0 : edges.back()));
    return out;
}

std::vector<std::string> category_columns() {
    std::vector<std::string> out;
    for (Category c : kAllCategories) out.emplace_back(surface_name(c));
    return out;
}

namespace {

DistributionReport::Row make_row(std::string key, std::vector<std::size_t> counts) {
    DistributionReport::Row r;
    r.key = std::move(key);
    r.counts = std::move(counts);
    for (auto v : r.counts) r.total += v;
    r.percent.resize(r.counts.size(), 0.0);
    if (r.total > 0)
        for (std::size_t i = 0; i < r.counts.size(); ++i)
            r.percent[i] = 100.0 * static_cast<double>(r.counts[i]) / static_cast<double>(r.total);
    return r;
}

std::size_t meta_words(const corpus::Submission& s) { return text::word_count(s.meta_review.text()); }

}  // namespace

DistributionReport category_distribution(std::span<const corpus::Submission> submissions) {
    std::vector<std::size_t> accept(kNumCategories, 0), reject(kNumCategories, 0);
    for (const auto& s : submissions) {
        auto& target = s.meta_review.decision == Decision::accept ? accept : reject;
        for (const auto& sent : s.meta_review.sentences) ++target[index_of(sent.label)];
    }
    DistributionReport rep;
    rep.title = "Sentence numbers per category by decision";
    rep.group_by = "decision";
    rep.columns = category_columns();
    rep.rows.push_back(make_row("accept", std::move(accept)));
    rep.rows.push_back(make_row("reject", std::move(reject)));
    return rep;
}

DistributionReport length_rating_breakdown(std::span<const corpus::Submission> submissions,
                                           const LengthBins& length_bins, const ScoreBins& score_bins) {
    const auto score_names = score_bins.names();
    const auto length_names = length_bins.names();
    std::vector<std::vector<std::size_t>> counts(score_names.size(), std::vector<std::size_t>(length_names.size(), 0));
    DistributionReport rep;
    for (const auto& s : submissions) {
        const auto avg = s.average_rating();
        if (!avg) {
            ++rep.excluded;
            continue;
        }
        ++counts[score_bins.bin_of(*avg)][length_bins.bin_of(meta_words(s))];
    }
    rep.title = "Meta-review length distribution per average rating";
    rep.group_by = "score_bin";
    rep.columns = length_names;
    for (std::size_t i = 0; i < score_names.size(); ++i) {
        auto row = make_row(score_names[i], std::move(counts[i]));
        if (row.total > 0) rep.rows.push_back(std::move(row));
    }
    return rep;
}

DistributionReport length_category_breakdown(std::span<const corpus::Submission> submissions,
                                             const LengthBins& length_bins) {
    const auto names = length_bins.names();
    std::vector<std::vector<std::size_t>> counts(names.size(), std::vector<std::size_t>(kNumCategories, 0));
    for (const auto& s : submissions) {
        auto& row = counts[length_bins.bin_of(meta_words(s))];
        for (const auto& sent : s.meta_review.sentences) ++row[index_of(sent.label)];
    }
    DistributionReport rep;
    rep.title = "Sentence category distribution per meta-review length";
    rep.group_by = "length_bin";
    rep.columns = category_columns();
    for (std::size_t i = 0; i < names.size(); ++i) {
        auto row = make_row(names[i], std::move(counts[i]));
        if (row.total > 0) rep.rows.push_back(std::move(row));
    }
    return rep;
}

DistributionReport borderline_breakdown(std::span<const corpus::Submission> submissions, double lo, double hi) {
    std::vector<std::size_t> accept(kNumCategories, 0), reject(kNumCategories, 0);
    DistributionReport rep;
    for (const auto& s : submissions) {
        const auto avg = s.average_rating();
        if (!avg) {
            ++rep.excluded;
            continue;
        }
        if (*avg < lo || *avg >= hi) continue;
        auto& target = s.meta_review.decision == Decision::accept ? accept : reject;
        for (const auto& sent : s.meta_review.sentences) ++target[index_of(sent.label)];
    }
    rep.title = "Category distribution of borderline submissions";
    rep.group_by = "decision";
    rep.columns = category_columns();
    for (auto& [key, counts] : {std::pair{std::string("accept"), accept}, std::pair{std::string("reject"), reject}}) {
        auto row = make_row(key, counts);
        if (row.total > 0) rep.rows.push_back(std::move(row));
    }
    return rep;
}

DistributionReport occurrence_by_score(std::span<const corpus::Submission> submissions) {
    // group index = decision * 3 + {low, mid, high}
    std::vector<std::vector<std::size_t>> hits(6, std::vector<std::size_t>(kNumCategories, 0));
    std::vector<std::size_t> group_size(6, 0);
    DistributionReport rep;
    for (const auto& s : submissions) {
        const auto avg = s.average_rating();
        if (!avg) {
            ++rep.excluded;
            continue;
        }
        const std::size_t band = *avg <= kLowScoreMax ? 0 : *avg >= kHighScoreMin ? 2 : 1;
        const std::size_t g = (s.meta_review.decision == Decision::accept ? 0 : 3) + band;
        ++group_size[g];
        std::array<bool, kNumCategories> seen{};
        for (const auto& sent : s.meta_review.sentences) seen[index_of(sent.label)] = true;
        for (std::size_t c = 0; c < kNumCategories; ++c)
            if (seen[c]) ++hits[g][c];
    }
    rep.title = "Category occurrence by decision and average score";
    rep.group_by = "decision/score_band";
    rep.columns = category_columns();
    rep.row_sums_to_100 = false;
    static const char* keys[] = {"accept/low", "accept/mid", "accept/high", "reject/low", "reject/mid", "reject/high"};
    for (std::size_t g = 0; g < 6; ++g) {
        if (group_size[g] == 0) continue;
        DistributionReport::Row r;
        r.key = keys[g];
        r.counts = hits[g];
        r.total = group_size[g];
        r.percent.resize(kNumCategories);
        for (std::size_t c = 0; c < kNumCategories; ++c)
            r.percent[c] = 100.0 * static_cast<double>(hits[g][c]) / static_cast<double>(group_size[g]);
        rep.rows.push_back(std::move(r));
    }
    return rep;
}

std::string_view category_color(Category c) noexcept {
    switch (c) {
        case Category::abstract: return "#4e79a7";
        case Category::strength: return "#59a14f";
        case Category::weakness: return "#e15759";
        case Category::rating_summary: return "#f28e2b";
        case Category::ac_disagreement: return "#edc948";
        case Category::rebuttal_process: return "#76b7b2";
        case Category::suggestion: return "#8cd17d";
        case Category::decision: return "#ff9da7";
        case Category::misc: return "#bab0ac";
    }
    return "#000000";
}

}  // namespace mred::analytics

#include "mred/generics.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "mred/error.hpp"
#include "mred/parallel.hpp"
#include "mred/random.hpp"

namespace mred::generics {

Side parse_side(std::string_view s) {
    if (s == "target") return Side::target;
    if (s == "source") return Side::source;
    throw Error("bad_side", "unknown bank side '" + std::string(s) + "'");
}

std::string_view side_name(Side s) noexcept { return s == Side::target ? "target" : "source"; }

ScoreFilter parse_filter(std::string_view s) {
    if (s == "all") return ScoreFilter::all;
    if (s == "high") return ScoreFilter::high;
    if (s == "low") return ScoreFilter::low;
    throw Error("bad_filter", "unknown score filter '" + std::string(s) + "'");
}

std::string_view filter_name(ScoreFilter f) noexcept {
    switch (f) {
        case ScoreFilter::all: return "all";
        case ScoreFilter::high: return "high";
        case ScoreFilter::low: return "low";
    }
    return "all";
}

bool passes(const corpus::Submission& s, ScoreFilter filter) {
    if (filter == ScoreFilter::all) return true;
    const auto avg = s.average_rating();
    if (!avg) return false;
    return filter == ScoreFilter::high ? *avg >= 7.0 : *avg <= 3.0;
}

std::vector<std::size_t> rank_group(std::span<const std::string> sentences, const extract::EngineConfig& cfg) {
    if (sentences.empty()) return {};
    return extract::textrank_scores(sentences, cfg).order;
}

GenericBank build_generic_bank(std::span<const corpus::Submission* const> train, Side side, ScoreFilter filter,
                               const tagger::TaggerModel* model, const tagger::LabelMap* labels,
                               const BankOptions& options) {
    if (train.empty()) throw Error("empty_split", "generic banks need a nonempty training split");
    if (side == Side::source && !model && !labels)
        throw Error("precondition", "source-side banks need a tagger model or review labels");

    std::array<std::vector<std::string>, kNumCategories> groups;
    for (const auto* s : train) {
        if (!passes(*s, filter)) continue;
        if (side == Side::target) {
            for (const auto& ls : s->meta_review.sentences) groups[index_of(ls.label)].push_back(ls.text);
        } else {
            for (const auto& review : tagger::tag_reviews(*s, model, labels))
                for (const auto& t : review) groups[index_of(t.label)].push_back(t.text);
        }
    }

    GenericBank bank;
    bank.side = side;
    bank.filter = filter;
    for (std::size_t c = 0; c < kNumCategories; ++c) {
        auto& group = groups[c];
        const auto name = std::string(storage_name(kAllCategories[c]));
        if (group.empty()) {
            bank.warnings.push_back("category '" + name + "' has no sentences");
            continue;
        }
        if (group.size() > options.max_group) {
            std::vector<std::size_t> idx(group.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            std::mt19937_64 rng(options.seed + c);
            portable_shuffle(idx, rng);
            idx.resize(options.max_group);
            std::sort(idx.begin(), idx.end());
            std::vector<std::string> sample;
            sample.reserve(idx.size());
            for (auto i : idx) sample.push_back(std::move(group[i]));
            bank.warnings.push_back("category '" + name + "' ranked on a sample of " +
                                    std::to_string(options.max_group) + " of " + std::to_string(group.size()) +
                                    " sentences");
            group = std::move(sample);
        }
    }
    // Groups are independent. Few workers, since each holds a dense matrix.
    std::array<std::vector<std::size_t>, kNumCategories> ranking;
    parallel_for(
        kNumCategories, [&](std::size_t c) { ranking[c] = rank_group(groups[c], options.textrank); },
        options.threads);
    for (std::size_t c = 0; c < kNumCategories; ++c)
        for (auto i : ranking[c]) bank.categories[c].push_back(groups[c][i]);
    return bank;
}

Assembled assemble_generic(const GenericBank& bank, std::span<const Category> control) {
    if (control.empty()) throw Error("precondition", "control sequence must be nonempty");
    Assembled out;
    std::set<std::string> used;
    std::array<std::size_t, kNumCategories> cursor{};
    for (std::size_t slot = 0; slot < control.size(); ++slot) {
        const Category c = control[slot];
        const auto& list = bank.of(c);
        auto& pos = cursor[index_of(c)];
        while (pos < list.size() && used.count(list[pos])) ++pos;
        if (pos >= list.size()) {
            out.warnings.push_back("slot " + std::to_string(slot + 1) + " (" + std::string(surface_name(c)) + ") skipped: " +
                                   (list.empty() ? "empty category" : "category exhausted"));
            continue;
        }
        used.insert(list[pos]);
        out.sentences.push_back(list[pos]);
        out.labels.push_back(c);
        ++pos;
    }
    for (const auto& s : out.sentences) {
        if (!out.text.empty()) out.text.push_back(' ');
        out.text += s;
    }
    return out;
}

nlohmann::json GenericBank::to_json() const {
    nlohmann::json cats = nlohmann::json::object();
    for (Category c : kAllCategories) cats[std::string(storage_name(c))] = of(c);
    return {{"side", side_name(side)}, {"filter", filter_name(filter)}, {"categories", cats}, {"warnings", warnings}};
}

GenericBank GenericBank::from_json(const nlohmann::json& j) {
    try {
        GenericBank b;
        b.side = parse_side(j.at("side").get<std::string>());
        b.filter = parse_filter(j.at("filter").get<std::string>());
        for (const auto& [k, v] : j.at("categories").items())
            b.categories[index_of(parse_category(k))] = v.get<std::vector<std::string>>();
        b.warnings = j.value("warnings", std::vector<std::string>{});
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed_record", std::string("generic bank: ") + e.what());
    }
}

void GenericBank::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error("io_error", "cannot write " + path.string());
    out << to_json().dump(2) << '\n';
}

GenericBank GenericBank::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open generic bank " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error("malformed_record", path.string() + ": " + e.what());
    }
}

}  // namespace mred::generics

#include "mred/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "embedded.hpp"
#include "mred/corpus.hpp"
#include "mred/error.hpp"
#include "mred/text.hpp"

namespace mred::metrics {

namespace {

Score make_score(double overlap, double cand_total, double ref_total) {
    Score s;
    s.precision = overlap / std::max(cand_total, 1.0);
    s.recall = overlap / std::max(ref_total, 1.0);
    s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

std::unordered_map<std::string, std::size_t> ngram_counts(const std::vector<std::string>& toks, int n) {
    std::unordered_map<std::string, std::size_t> out;
    const auto un = static_cast<std::size_t>(n);
    if (toks.size() < un) return out;
    for (std::size_t i = 0; i + un <= toks.size(); ++i) {
        std::string key = toks[i];
        for (std::size_t k = 1; k < un; ++k) {
            key.push_back('\x1f');
            key += toks[i + k];
        }
        ++out[key];
    }
    return out;
}

}  // namespace

Score rouge_n(const std::vector<std::string>& candidate, const std::vector<std::string>& reference, int n) {
    if (n < 1) throw Error("precondition", "n-gram order must be positive");
    const auto c = ngram_counts(candidate, n);
    const auto r = ngram_counts(reference, n);
    std::size_t overlap = 0, ct = 0, rt = 0;
    for (const auto& [g, k] : c) {
        ct += k;
        if (auto it = r.find(g); it != r.end()) overlap += std::min(k, it->second);
    }
    for (const auto& [g, k] : r) rt += k;
    return make_score(static_cast<double>(overlap), static_cast<double>(ct), static_cast<double>(rt));
}

Score rouge_n(std::string_view candidate, std::string_view reference, int n) {
    return rouge_n(text::rouge_tokens(candidate), text::rouge_tokens(reference), n);
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

Score rouge_l(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
    if (candidate.empty() || reference.empty()) return {};
    return make_score(static_cast<double>(lcs_length(candidate, reference)), static_cast<double>(candidate.size()),
                      static_cast<double>(reference.size()));
}

Score rouge_l(std::string_view candidate, std::string_view reference) {
    return rouge_l(text::rouge_tokens(candidate), text::rouge_tokens(reference));
}

std::size_t levenshtein(std::span<const Category> a, std::span<const Category> b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double structure_similarity(std::span<const Category> pred, std::span<const Category> gold) {
    if (gold.empty()) throw Error("precondition", "structure similarity needs a nonempty gold sequence");
    const double d = static_cast<double>(levenshtein(pred, gold));
    return 1.0 - d / static_cast<double>(std::max(pred.size(), gold.size()));
}

// --- decision cues ---

namespace {

// Lowercase, non-alphanumerics to single spaces, padded with one space on
// each side so a leading space marks a word start.
std::string normalize_for_cues(std::string_view s) {
    std::string out = " ";
    for (char ch : s) {
        const auto c = static_cast<unsigned char>(ch);
        const bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
        if (alnum) {
            out.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c));
        } else if (out.back() != ' ') {
            out.push_back(' ');
        }
    }
    if (out.back() != ' ') out.push_back(' ');
    return out;
}

std::vector<std::string> normalized_list(const std::vector<std::string>& cues) {
    std::vector<std::string> out;
    for (const auto& c : cues) {
        auto n = normalize_for_cues(c);
        n.pop_back();  // keep the leading word-start space only
        if (n.size() > 1) out.push_back(std::move(n));
    }
    // Longer phrases first so "not recommend accept" masks before "recommend accept" is tried.
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
    return out;
}

void scan(std::string& buf, const std::vector<std::string>& cues, std::vector<std::string>& hits) {
    for (const auto& cue : normalized_list(cues)) {
        bool hit = false;
        for (auto pos = buf.find(cue); pos != std::string::npos; pos = buf.find(cue, pos + 1)) {
            std::fill(buf.begin() + static_cast<std::ptrdiff_t>(pos + 1),
                      buf.begin() + static_cast<std::ptrdiff_t>(pos + cue.size()), '#');
            hit = true;
        }
        if (hit) hits.push_back(cue.substr(1));
    }
}

}  // namespace

DecisionCues DecisionCues::from_json(const nlohmann::json& j) {
    try {
        DecisionCues c;
        c.version = j.at("version").get<int>();
        c.accept = j.at("accept").get<std::vector<std::string>>();
        c.reject = j.at("reject").get<std::vector<std::string>>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed_record", std::string("decision cue lexicon: ") + e.what());
    }
}

const DecisionCues& DecisionCues::builtin() {
    static const DecisionCues cues = from_json(nlohmann::json::parse(detail::kDecisionCuesJson));
    return cues;
}

DecisionCues DecisionCues::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open cue lexicon " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error("malformed_record", path.string() + ": " + e.what());
    }
}

CueHits find_cues(std::string_view text, const DecisionCues& cues) {
    auto buf = normalize_for_cues(text);
    CueHits hits;
    scan(buf, cues.reject, hits.reject);
    scan(buf, cues.accept, hits.accept);
    return hits;
}

int decision_correctness(std::string_view generated, Decision gold, const DecisionCues& cues) {
    const auto hits = find_cues(generated, cues);
    const bool acc = !hits.accept.empty(), rej = !hits.reject.empty();
    if (acc == rej) return 0;
    return (gold == Decision::accept) == acc ? 1 : 0;
}

// --- run aggregation ---

InstanceMetrics score_instance(const RunOutput& out, const RunReference& ref, const DecisionCues& cues) {
    InstanceMetrics m;
    m.id = out.id;
    const auto c = text::rouge_tokens(out.text);
    const auto r = text::rouge_tokens(ref.text);
    m.r1 = rouge_n(c, r, 1);
    m.r2 = rouge_n(c, r, 2);
    m.rl = rouge_l(c, r);
    if (!ref.labels.empty()) {
        m.structure_sim_sent = structure_similarity(out.labels, ref.labels);
        m.structure_sim_seg = structure_similarity(collapse_runs(out.labels), collapse_runs(ref.labels));
    }
    if (ref.decision) m.decision_correct = decision_correctness(out.text, *ref.decision, cues);
    return m;
}

EvalReport evaluate_run(std::span<const RunOutput> outputs, std::span<const RunReference> references,
                        const DecisionCues& cues) {
    std::map<std::string_view, const RunReference*> by_id;
    for (const auto& r : references)
        if (!by_id.emplace(r.id, &r).second) throw Error("misaligned", "duplicate reference id '" + r.id + "'");
    if (outputs.size() != references.size())
        throw Error("misaligned", std::to_string(outputs.size()) + " outputs vs " + std::to_string(references.size()) +
                                      " references");
    std::set<std::string_view> seen;
    EvalReport rep;
    rep.cue_version = cues.version;
    for (const auto& o : outputs) {
        if (!seen.insert(o.id).second) throw Error("misaligned", "duplicate output id '" + o.id + "'");
        auto it = by_id.find(o.id);
        if (it == by_id.end()) throw Error("misaligned", "no reference for output id '" + o.id + "'");
        auto m = score_instance(o, *it->second, cues);
        rep.r1 += m.r1.f1;
        rep.r2 += m.r2.f1;
        rep.rl += m.rl.f1;
        if (m.structure_sim_sent) {
            rep.structure_sim_sent += *m.structure_sim_sent;
            rep.structure_sim_seg += *m.structure_sim_seg;
            ++rep.n_structure;
        }
        if (m.decision_correct) {
            rep.decision_correct += *m.decision_correct;
            ++rep.n_decision;
        }
        rep.instances.push_back(std::move(m));
    }
    rep.n_instances = outputs.size();
    if (rep.n_instances > 0) {
        const double n = static_cast<double>(rep.n_instances);
        rep.r1 /= n;
        rep.r2 /= n;
        rep.rl /= n;
    }
    if (rep.n_structure > 0) {
        rep.structure_sim_sent /= static_cast<double>(rep.n_structure);
        rep.structure_sim_seg /= static_cast<double>(rep.n_structure);
    }
    if (rep.n_decision > 0) rep.decision_correct /= static_cast<double>(rep.n_decision);
    return rep;
}

nlohmann::json EvalReport::to_json(bool with_instances) const {
    auto opt = [](std::size_t n, double v) { return n > 0 ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json j = {
        {"r1", r1},
        {"r2", r2},
        {"rl", rl},
        {"structure_sim_sent", opt(n_structure, structure_sim_sent)},
        {"structure_sim_seg", opt(n_structure, structure_sim_seg)},
        {"decision_correct", opt(n_decision, decision_correct)},
        {"n_instances", n_instances},
        {"n_structure", n_structure},
        {"n_decision", n_decision},
        {"decision_method", "cue_lexicon_v" + std::to_string(cue_version)},
    };
    if (with_instances) {
        auto arr = nlohmann::json::array();
        for (const auto& m : instances) {
            nlohmann::json e = {{"id", m.id}, {"r1", m.r1.f1}, {"r2", m.r2.f1}, {"rl", m.rl.f1}};
            e["structure_sim_sent"] = m.structure_sim_sent ? nlohmann::json(*m.structure_sim_sent) : nlohmann::json(nullptr);
            e["structure_sim_seg"] = m.structure_sim_seg ? nlohmann::json(*m.structure_sim_seg) : nlohmann::json(nullptr);
            e["decision_correct"] = m.decision_correct ? nlohmann::json(*m.decision_correct) : nlohmann::json(nullptr);
            arr.push_back(std::move(e));
        }
        j["instances"] = std::move(arr);
    }
    return j;
}

std::string EvalReport::to_csv() const {
    std::ostringstream os;
    os.precision(6);
    os << std::fixed;
    auto opt = [&](std::size_t n, double v) {
        if (n > 0) os << v;
    };
    os << "r1,r2,rl,structure_sim_sent,structure_sim_seg,decision_correct,n_instances\n";
    os << r1 << ',' << r2 << ',' << rl << ',';
    opt(n_structure, structure_sim_sent);
    os << ',';
    opt(n_structure, structure_sim_seg);
    os << ',';
    opt(n_decision, decision_correct);
    os << ',' << n_instances << '\n';
    return os.str();
}

// --- file readers ---

namespace {

template <class F>
void for_each_line(const std::filesystem::path& path, F&& f) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            f(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw Error("malformed_record", path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

std::vector<Category> labels_of(const nlohmann::json& j) {
    std::vector<Category> out;
    if (auto it = j.find("labels"); it != j.end() && !it->is_null()) {
        for (const auto& l : *it) out.push_back(parse_category(l.get<std::string>()));
    } else if (auto sel = j.find("selected"); sel != j.end()) {
        for (const auto& s : *sel)
            if (auto l = s.find("label"); l != s.end() && !l->is_null())
                out.push_back(parse_category(l->get<std::string>()));
    }
    return out;
}

}  // namespace

std::vector<RunOutput> read_outputs(const std::filesystem::path& path) {
    std::vector<RunOutput> out;
    for_each_line(path, [&](const nlohmann::json& j) {
        out.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>(), labels_of(j)});
    });
    return out;
}

std::vector<RunReference> read_references(const std::filesystem::path& path) {
    std::vector<RunReference> out;
    for_each_line(path, [&](const nlohmann::json& j) {
        if (j.contains("meta_review")) {
            const auto s = corpus::submission_from_json(j);
            out.push_back({s.id, s.meta_review.text(), s.meta_review.labels(), s.meta_review.decision});
            return;
        }
        RunReference r{j.at("id").get<std::string>(), j.at("text").get<std::string>(), labels_of(j), std::nullopt};
        if (auto d = j.find("decision"); d != j.end() && !d->is_null())
            r.decision = parse_decision(d->get<std::string>());
        out.push_back(std::move(r));
    });
    return out;
}

}  // namespace mred::metrics

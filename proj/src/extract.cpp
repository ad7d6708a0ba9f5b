#include "mred/extract.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mred/error.hpp"
#include "mred/similarity.hpp"
#include "mred/text.hpp"

namespace mred::extract {

Engine parse_engine(std::string_view name) {
    if (name == "lexrank") return Engine::lexrank;
    if (name == "textrank") return Engine::textrank;
    if (name == "mmr") return Engine::mmr;
    throw Error("bad_engine", "unknown engine '" + std::string(name) + "'");
}

std::string_view engine_name(Engine e) noexcept {
    switch (e) {
        case Engine::lexrank: return "lexrank";
        case Engine::textrank: return "textrank";
        case Engine::mmr: return "mmr";
    }
    return "lexrank";
}

SimilarityKind parse_similarity(std::string_view name) {
    if (name == "tfidf_cosine" || name == "tfidf") return SimilarityKind::tfidf_cosine;
    if (name == "word_overlap" || name == "overlap") return SimilarityKind::word_overlap;
    throw Error("bad_config", "unknown similarity '" + std::string(name) + "'");
}

std::string_view similarity_name(SimilarityKind k) noexcept {
    return k == SimilarityKind::tfidf_cosine ? "tfidf_cosine" : "word_overlap";
}

SimilarityKind EngineConfig::similarity_for(Engine e) const noexcept {
    if (similarity) return *similarity;
    return e == Engine::textrank ? SimilarityKind::word_overlap : SimilarityKind::tfidf_cosine;
}

void EngineConfig::validate() const {
    if (!(damping > 0 && damping < 1)) throw Error("bad_config", "damping must lie in (0, 1)");
    if (!(tolerance > 0)) throw Error("bad_config", "tolerance must be positive");
    if (max_iterations == 0) throw Error("bad_config", "max_iterations must be positive");
    if (!(mmr_lambda >= 0 && mmr_lambda <= 1)) throw Error("bad_config", "mmr_lambda must lie in [0, 1]");
}

nlohmann::json EngineConfig::to_json() const {
    nlohmann::json j = {{"damping", damping},
                        {"tolerance", tolerance},
                        {"max_iterations", max_iterations},
                        {"mmr_lambda", mmr_lambda}};
    j["similarity"] = similarity ? nlohmann::json(similarity_name(*similarity)) : nlohmann::json(nullptr);
    return j;
}

EngineConfig EngineConfig::from_json(const nlohmann::json& j, EngineConfig base) {
    if (!j.is_object()) throw Error("bad_config", "engine config must be an object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "damping") base.damping = v.get<double>();
            else if (key == "tolerance") base.tolerance = v.get<double>();
            else if (key == "max_iterations") base.max_iterations = v.get<std::size_t>();
            else if (key == "mmr_lambda") base.mmr_lambda = v.get<double>();
            else if (key == "similarity")
                base.similarity = v.is_null() ? std::nullopt
                                              : std::optional(parse_similarity(v.get<std::string>()));
            else throw Error("bad_config", "unknown engine config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error("bad_config", e.what());
    }
    base.validate();
    return base;
}

EngineConfig EngineConfig::from_json(const nlohmann::json& j) { return from_json(j, EngineConfig{}); }

namespace {

std::vector<std::string_view> distinct_sorted(const std::vector<std::string>& toks) {
    std::vector<std::string_view> out(toks.begin(), toks.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double overlap_weight(const std::vector<std::string_view>& da, std::size_t na, const std::vector<std::string_view>& db,
                      std::size_t nb) {
    if (na == 0 || nb == 0) return 0.0;
    std::size_t common = 0;
    for (auto i = da.begin(), j = db.begin(); i != da.end() && j != db.end();) {
        if (*i == *j) {
            ++common;
            ++i;
            ++j;
        } else if (*i < *j) {
            ++i;
        } else {
            ++j;
        }
    }
    if (common == 0) return 0.0;
    double denom = std::log(static_cast<double>(na)) + std::log(static_cast<double>(nb));
    if (denom <= 0) denom = 1.0;
    return static_cast<double>(common) / denom;
}

}  // namespace

double word_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return overlap_weight(distinct_sorted(a), a.size(), distinct_sorted(b), b.size());
}

std::vector<std::vector<double>> similarity_matrix(std::span<const std::string> sentences, SimilarityKind kind) {
    std::vector<std::vector<std::string>> toks;
    toks.reserve(sentences.size());
    for (const auto& s : sentences) toks.push_back(text::content_tokens(s));
    if (kind == SimilarityKind::tfidf_cosine) return sim::cosine_matrix(sim::tfidf_vectors(toks));

    const std::size_t n = toks.size();
    std::vector<std::vector<std::string_view>> distinct;
    distinct.reserve(n);
    for (const auto& t : toks) distinct.push_back(distinct_sorted(t));
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            w[i][j] = w[j][i] = overlap_weight(distinct[i], toks[i].size(), distinct[j], toks[j].size());
    return w;
}

namespace {

void require_square(const std::vector<std::vector<double>>& m) {
    if (m.empty()) throw Error("precondition", "at least one sentence is required");
    for (const auto& row : m)
        if (row.size() != m.size()) throw Error("precondition", "similarity matrix must be square");
}

void fill_order_by_score(Ranking& r) {
    r.order.resize(r.sentences.size());
    std::iota(r.order.begin(), r.order.end(), std::size_t{0});
    std::stable_sort(r.order.begin(), r.order.end(),
                     [&](std::size_t a, std::size_t b) { return r.sentences[a].score > r.sentences[b].score; });
}

Ranking from_scores(const std::vector<double>& scores, bool converged, std::size_t iterations) {
    Ranking r;
    r.converged = converged;
    r.iterations = iterations;
    for (std::size_t i = 0; i < scores.size(); ++i) r.sentences.push_back({i, scores[i], std::nullopt});
    fill_order_by_score(r);
    return r;
}

}  // namespace

Ranking lexrank_from_similarity(const std::vector<std::vector<double>>& sim, const EngineConfig& cfg) {
    cfg.validate();
    require_square(sim);
    const std::size_t n = sim.size();
    const double un = 1.0 / static_cast<double>(n);

    std::vector<std::vector<double>> m(n, std::vector<double>(n, un));
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (double v : sim[i]) s += std::max(v, 0.0);
        if (s <= 0) continue;
        for (std::size_t j = 0; j < n; ++j) m[i][j] = std::max(sim[i][j], 0.0) / s;
    }

    std::vector<double> p(n, un), next(n);
    bool converged = false;
    std::size_t it = 0;
    while (it < cfg.max_iterations) {
        ++it;
        std::fill(next.begin(), next.end(), (1.0 - cfg.damping) * un);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) next[j] += cfg.damping * m[i][j] * p[i];
        double diff = 0;
        for (std::size_t j = 0; j < n; ++j) diff += std::abs(next[j] - p[j]);
        std::swap(p, next);
        // The update is a d-contraction in L1, so the distance to the
        // stationary vector is at most diff * d / (1 - d).
        if (diff * cfg.damping / (1.0 - cfg.damping) < cfg.tolerance) {
            converged = true;
            break;
        }
    }
    return from_scores(p, converged, it);
}

Ranking lexrank_scores(std::span<const std::string> sentences, const EngineConfig& cfg) {
    return lexrank_from_similarity(similarity_matrix(sentences, cfg.similarity_for(Engine::lexrank)), cfg);
}

Ranking textrank_from_weights(const std::vector<std::vector<double>>& w, const EngineConfig& cfg) {
    cfg.validate();
    require_square(w);
    const std::size_t n = w.size();
    std::vector<double> out_weight(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
            if (k != j) out_weight[j] += w[j][k];

    std::vector<double> s(n, 1.0), next(n);
    bool converged = false;
    std::size_t it = 0;
    while (it < cfg.max_iterations) {
        ++it;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i && out_weight[j] > 0) acc += w[j][i] / out_weight[j] * s[j];
            next[i] = (1.0 - cfg.damping) + cfg.damping * acc;
        }
        double diff = 0;
        for (std::size_t i = 0; i < n; ++i) diff += std::abs(next[i] - s[i]);
        std::swap(s, next);
        if (diff < cfg.tolerance) {
            converged = true;
            break;
        }
    }
    return from_scores(s, converged, it);
}

Ranking textrank_scores(std::span<const std::string> sentences, const EngineConfig& cfg) {
    return textrank_from_weights(similarity_matrix(sentences, cfg.similarity_for(Engine::textrank)), cfg);
}

Ranking mmr_from_similarity(const std::vector<double>& relevance, const std::vector<std::vector<double>>& sim,
                            double lambda) {
    require_square(sim);
    const std::size_t n = sim.size();
    if (relevance.size() != n) throw Error("precondition", "relevance and similarity sizes differ");

    Ranking r;
    r.sentences.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.sentences[i].index = i;
    std::vector<bool> used(n, false);
    std::vector<double> max_sim(n, 0.0);
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t best = n;
        double best_score = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i]) continue;
            const double score = lambda * relevance[i] - (1.0 - lambda) * (step == 0 ? 0.0 : max_sim[i]);
            if (best == n || score > best_score) {
                best = i;
                best_score = score;
            }
        }
        used[best] = true;
        r.sentences[best].score = best_score;
        r.order.push_back(best);
        for (std::size_t i = 0; i < n; ++i)
            if (!used[i]) max_sim[i] = step == 0 ? sim[i][best] : std::max(max_sim[i], sim[i][best]);
    }
    return r;
}

Ranking mmr_rank(std::span<const std::string> sentences, const EngineConfig& cfg) {
    cfg.validate();
    if (cfg.similarity_for(Engine::mmr) != SimilarityKind::tfidf_cosine)
        throw Error("bad_config", "mmr needs tfidf_cosine similarity for its centroid relevance");
    if (sentences.empty()) throw Error("precondition", "at least one sentence is required");
    std::vector<std::vector<std::string>> toks;
    for (const auto& s : sentences) toks.push_back(text::content_tokens(s));
    const auto vecs = sim::tfidf_vectors(toks);
    const auto c = sim::centroid(vecs);
    std::vector<double> rel;
    for (const auto& v : vecs) rel.push_back(sim::cosine(v, c));
    return mmr_from_similarity(rel, sim::cosine_matrix(vecs), cfg.mmr_lambda);
}

Ranking rank(Engine engine, std::span<const std::string> sentences, const EngineConfig& cfg) {
    switch (engine) {
        case Engine::lexrank: return lexrank_scores(sentences, cfg);
        case Engine::textrank: return textrank_scores(sentences, cfg);
        case Engine::mmr: return mmr_rank(sentences, cfg);
    }
    return lexrank_scores(sentences, cfg);
}

void attach_labels(Ranking& ranking, std::span<const Category> labels) {
    if (labels.size() != ranking.sentences.size())
        throw Error("precondition", "labels (" + std::to_string(labels.size()) + ") and sentences (" +
                                        std::to_string(ranking.sentences.size()) + ") are not aligned");
    for (std::size_t i = 0; i < labels.size(); ++i) ranking.sentences[i].label = labels[i];
}

std::vector<std::size_t> Selection::indices() const {
    std::vector<std::size_t> out;
    out.reserve(slots.size());
    for (const auto& s : slots) out.push_back(s.index);
    return out;
}

Selection select_unctrl(const Ranking& ranking, std::size_t k) {
    if (k == 0) throw Error("precondition", "k must be at least 1");
    Selection sel;
    const std::size_t n = ranking.order.size();
    if (k > n) {
        sel.warnings.push_back("k=" + std::to_string(k) + " exceeds the " + std::to_string(n) +
                               " available sentences; returning all");
        k = n;
    }
    std::vector<std::size_t> picked(ranking.order.begin(), ranking.order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(picked.begin(), picked.end());
    for (auto i : picked) sel.slots.push_back({i, ranking.sentences[i].label, std::nullopt, false});
    return sel;
}

Selection select_ctrl(const Ranking& ranking, std::span<const Category> control) {
    if (control.empty()) throw Error("precondition", "control sequence must be nonempty");
    Selection sel;
    const std::size_t n = ranking.order.size();
    std::vector<bool> used(n, false);
    for (std::size_t slot = 0; slot < control.size(); ++slot) {
        const Category want = control[slot];
        std::optional<std::size_t> choice;
        for (auto i : ranking.order)
            if (!used[i] && ranking.sentences[i].label == want) {
                choice = i;
                break;
            }
        bool fallback = false;
        if (!choice) {
            for (auto i : ranking.order)
                if (!used[i]) {
                    choice = i;
                    break;
                }
            fallback = true;
        }
        if (!choice) {
            sel.warnings.push_back("slot " + std::to_string(slot + 1) + " (" + std::string(surface_name(want)) +
                                   ") skipped: no unused sentence left");
            continue;
        }
        if (fallback)
            sel.warnings.push_back("slot " + std::to_string(slot + 1) + " (" + std::string(surface_name(want)) +
                                   ") filled by fallback");
        used[*choice] = true;
        sel.slots.push_back({*choice, ranking.sentences[*choice].label, want, fallback});
    }
    return sel;
}

ExtractResult run(const ExtractRequest& request, Engine engine, const EngineConfig& cfg) {
    if (request.control.has_value() == request.k.has_value())
        throw Error("precondition", "exactly one of control and k must be supplied");
    if (request.control && !request.labels)
        throw Error("precondition", "controlled extraction needs sentence labels");
    if (request.sentences.empty()) throw Error("precondition", "at least one sentence is required");

    auto ranking = rank(engine, request.sentences, cfg);
    if (request.labels) attach_labels(ranking, *request.labels);

    ExtractResult out;
    out.converged = ranking.converged;
    out.selection = request.control ? select_ctrl(ranking, *request.control) : select_unctrl(ranking, *request.k);
    if (!ranking.converged)
        out.selection.warnings.push_back(std::string(engine_name(engine)) + " did not converge in " +
                                         std::to_string(ranking.iterations) + " iterations");
    for (const auto& s : out.selection.slots) {
        if (!out.text.empty()) out.text.push_back(' ');
        out.text += request.sentences[s.index];
    }
    return out;
}

}  // namespace mred::extract

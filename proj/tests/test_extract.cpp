#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "fixture.hpp"
#include "oracles.hpp"
#include "mred/error.hpp"
#include "mred/extract.hpp"
#include "mred/text.hpp"

using namespace mred;
using extract::EngineConfig;
using C = Category;

namespace {

using Matrix = std::vector<std::vector<double>>;

using oracle::dense_cos;
using oracle::random_similarity;

std::vector<double> scores_of(const extract::Ranking& r) {
    std::vector<double> s;
    for (const auto& x : r.sentences) s.push_back(x.score);
    return s;
}

extract::Ranking ranking_from(std::vector<double> scores, std::vector<C> labels) {
    extract::Ranking r;
    for (std::size_t i = 0; i < scores.size(); ++i) r.sentences.push_back({i, scores[i], labels[i]});
    r.order.resize(scores.size());
    std::iota(r.order.begin(), r.order.end(), std::size_t{0});
    std::stable_sort(r.order.begin(), r.order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
    return r;
}

}  // namespace

TEST_CASE("lexrank small cases") {
    const std::vector<std::string> same = {"the model is good", "the model is good", "the model is good"};
    const auto r = extract::lexrank_scores(same);
    for (const auto& s : r.sentences) CHECK(s.score == doctest::Approx(1.0 / 3));
    const std::vector<std::string> one = {"single sentence"};
    CHECK(extract::lexrank_scores(one).sentences[0].score == doctest::Approx(1.0));
    CHECK_THROWS_AS(extract::lexrank_scores(std::vector<std::string>{}), Error);
}

TEST_CASE("lexrank matches the eigenvector oracle within 1e-6 on 50 random graphs") {
    std::mt19937_64 rng(21);
    const EngineConfig cfg;  // defaults: d = 0.85, tol = 1e-6
    double worst = 0;
    for (int t = 0; t < 50; ++t) {
        const auto n = 2 + uniform_below(rng, 9);
        const auto sim = random_similarity(rng, n);
        const auto r = extract::lexrank_from_similarity(sim, cfg);
        CHECK(r.converged);
        const auto want = oracle::stationary(sim, cfg.damping);
        const auto got = scores_of(r);
        double sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            worst = std::max(worst, std::abs(got[i] - want[i]));
            CHECK(got[i] >= 0);
            sum += got[i];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("lexrank scores on text form a distribution") {
    for (const auto& s : mred::testing::synthetic_corpus(5).submissions) {
        std::vector<std::string> sents;
        for (const auto& r : s.reviews)
            for (const auto& x : corpus::review_sentences(r)) sents.push_back(x);
        const auto r = extract::lexrank_scores(sents);
        const auto sc = scores_of(r);
        CHECK(std::abs(std::accumulate(sc.begin(), sc.end(), 0.0) - 1.0) <= 1e-9);
    }
}

TEST_CASE("textrank small cases") {
    const std::vector<std::string> disjoint = {"alpha beta gamma", "delta epsilon zeta"};
    const auto r = extract::textrank_scores(disjoint);
    CHECK(r.sentences[0].score == doctest::Approx(0.15));
    CHECK(r.sentences[1].score == doctest::Approx(0.15));
    const std::vector<std::string> same = {"graph model works", "graph model works", "graph model works"};
    const auto s = extract::textrank_scores(same);
    CHECK(s.sentences[0].score == doctest::Approx(s.sentences[1].score));
    CHECK(s.sentences[1].score == doctest::Approx(s.sentences[2].score));
}

TEST_CASE("word overlap weight") {
    const std::vector<std::string> a = {"graph", "model", "work"}, b = {"graph", "model", "fail", "test"};
    CHECK(extract::word_overlap(a, b) == doctest::Approx(2.0 / (std::log(3.0) + std::log(4.0))));
    CHECK(extract::word_overlap({"x"}, {"x"}) == 1.0);  // log 1 + log 1 = 0 -> denominator 1
    CHECK(extract::word_overlap({}, {"x"}) == 0.0);
}

TEST_CASE("textrank fixed point residual is below tolerance") {
    std::mt19937_64 rng(22);
    const EngineConfig cfg;
    for (int t = 0; t < 50; ++t) {
        const auto n = 2 + uniform_below(rng, 9);
        Matrix w(n, std::vector<double>(n, 0.0));
        std::uniform_real_distribution<double> u(0, 1);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) w[i][j] = w[j][i] = u(rng) < 0.3 ? 0.0 : u(rng);
        const auto r = extract::textrank_from_weights(w, cfg);
        CHECK(r.converged);
        const auto s = scores_of(r);
        double residual = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                double out = 0;
                for (std::size_t k = 0; k < n; ++k)
                    if (k != j) out += w[j][k];
                if (out > 0) acc += w[j][i] / out * s[j];
            }
            residual += std::abs((1 - cfg.damping) + cfg.damping * acc - s[i]);
        }
        CHECK(residual < cfg.tolerance);
    }
}

TEST_CASE("mmr with lambda 1 is pure relevance order") {
    EngineConfig cfg;
    cfg.mmr_lambda = 1.0;
    const std::vector<double> rel = {0.2, 0.9, 0.5, 0.9};
    Matrix sim(4, std::vector<double>(4, 0.5));
    const auto r = extract::mmr_from_similarity(rel, sim, 1.0);
    CHECK(r.order == std::vector<std::size_t>{1, 3, 2, 0});
}

TEST_CASE("mmr picks the duplicate of a selected sentence last") {
    const std::vector<std::string> s = {"neural networks learn representations from data",
                                        "the optimizer converges on convex problems",
                                        "neural networks learn representations from data",
                                        "reviewers liked the clear writing"};
    const auto r = extract::mmr_rank(s);
    REQUIRE(r.order.size() == 4);
    const auto first = r.order[0];
    if (first == 0 || first == 2) CHECK(r.order.back() == (first == 0 ? 2u : 0u));
}

TEST_CASE("mmr greedy trace matches step recomputation on 50 cases") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 50; ++t) {
        const auto n = 2 + uniform_below(rng, 7);
        const auto dim = 4;
        // Random nonnegative embeddings; relevance to their centroid.
        std::vector<std::vector<double>> v(n, std::vector<double>(dim));
        for (auto& row : v)
            for (auto& x : row) x = u(rng) < 0.3 ? 0.0 : u(rng);
        std::vector<double> centroid(dim, 0.0);
        for (const auto& row : v)
            for (int k = 0; k < dim; ++k) centroid[k] += row[k] / double(n);
        std::vector<double> rel(n);
        Matrix sim(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i) {
            rel[i] = dense_cos(v[i], centroid);
            for (std::size_t j = 0; j < n; ++j) sim[i][j] = dense_cos(v[i], v[j]);
        }
        const double lambda = t % 5 == 0 ? 0.3 : 0.5;
        const auto r = extract::mmr_from_similarity(rel, sim, lambda);

        // Re-evaluate every step independently.
        std::vector<std::size_t> chosen;
        for (std::size_t step = 0; step < n; ++step) {
            const auto pick = r.order[step];
            auto score = [&](std::size_t i) {
                double red = 0;
                bool any = false;
                for (auto c : chosen) {
                    red = any ? std::max(red, sim[i][c]) : sim[i][c];
                    any = true;
                }
                return lambda * rel[i] - (1 - lambda) * (any ? red : 0.0);
            };
            CHECK(std::find(chosen.begin(), chosen.end(), pick) == chosen.end());
            CHECK(r.sentences[pick].score == doctest::Approx(score(pick)).epsilon(1e-12));
            for (std::size_t i = 0; i < n; ++i) {
                if (std::find(chosen.begin(), chosen.end(), i) != chosen.end() || i == pick) continue;
                CHECK(score(i) <= score(pick));
                if (score(i) == score(pick)) CHECK(pick < i);
            }
            chosen.push_back(pick);
        }
    }
}

TEST_CASE("mmr rejects word overlap similarity") {
    EngineConfig cfg;
    cfg.similarity = extract::SimilarityKind::word_overlap;
    const std::vector<std::string> s = {"a b", "c d"};
    CHECK_THROWS_AS(extract::mmr_rank(s, cfg), Error);
}

TEST_CASE("select_unctrl") {
    const auto r = ranking_from({0.5, 0.9, 0.1}, {C::misc, C::misc, C::misc});
    CHECK(extract::select_unctrl(r, 2).indices() == std::vector<std::size_t>{0, 1});
    CHECK(extract::select_unctrl(r, 3).indices() == std::vector<std::size_t>{0, 1, 2});
    const auto over = extract::select_unctrl(r, 5);
    CHECK(over.indices().size() == 3);
    CHECK(over.warnings.size() == 1);
    CHECK_THROWS_AS(extract::select_unctrl(r, 0), Error);

    // Ties go to the lower index, every run.
    const std::vector<std::string> same = {"graph model works", "graph model works", "graph model works"};
    for (int i = 0; i < 3; ++i)
        CHECK(extract::select_unctrl(extract::textrank_scores(same), 2).indices() == std::vector<std::size_t>{0, 1});
}

TEST_CASE("select_ctrl examples") {
    const auto r = ranking_from({0.3, 0.8, 0.5, 0.6, 0.1}, {C::abstract, C::abstract, C::decision, C::abstract, C::weakness});
    const std::vector<C> d = {C::decision};
    CHECK(extract::select_ctrl(r, d).indices() == std::vector<std::size_t>{2});
    const std::vector<C> aa = {C::abstract, C::abstract};
    CHECK(extract::select_ctrl(r, aa).indices() == std::vector<std::size_t>{1, 3});

    const std::vector<C> miss = {C::suggestion, C::weakness};
    const auto sel = extract::select_ctrl(r, miss);
    CHECK(sel.indices() == std::vector<std::size_t>{1, 4});
    CHECK(sel.slots[0].fallback);
    CHECK(sel.slots[0].requested == C::suggestion);
    CHECK_FALSE(sel.slots[1].fallback);
    CHECK(sel.warnings.size() == 1);

    const std::vector<C> many(7, C::abstract);
    const auto all = extract::select_ctrl(r, many);
    CHECK(all.slots.size() == 5);
    CHECK(all.warnings.size() >= 2);
}

TEST_CASE("select_ctrl equals the exhaustive oracle") {
    std::mt19937_64 rng(24);
    const std::vector<C> pool = {C::abstract, C::weakness, C::decision, C::strength};
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 8;
        std::vector<double> scores(n);
        std::vector<C> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = double(uniform_below(rng, 5)) / 4.0;
            labels[i] = pool[uniform_below(rng, pool.size())];
        }
        const auto r = ranking_from(scores, labels);
        const std::vector<C> control = {C::abstract, C::weakness, C::decision};
        const auto got = extract::select_ctrl(r, control);

        // Enumerate every assignment of distinct sentences to the slots and
        // keep the lexicographically best one under the greedy preference
        // (label match first, then rank position).
        std::vector<std::size_t> rank_pos(n);
        for (std::size_t p = 0; p < n; ++p) rank_pos[r.order[p]] = p;
        std::vector<std::size_t> best;
        std::vector<std::pair<int, std::size_t>> best_key;
        std::vector<std::size_t> cur;
        std::function<void()> go = [&] {
            if (cur.size() == control.size()) {
                std::vector<std::pair<int, std::size_t>> key;
                for (std::size_t s = 0; s < cur.size(); ++s) {
                    // match is only allowed to lose when no unused match exists
                    key.push_back({labels[cur[s]] == control[s] ? 0 : 1, rank_pos[cur[s]]});
                }
                if (best.empty() || key < best_key) {
                    best = cur;
                    best_key = key;
                }
                return;
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (std::find(cur.begin(), cur.end(), i) != cur.end()) continue;
                cur.push_back(i);
                go();
                cur.pop_back();
            }
        };
        go();
        CHECK(got.indices() == best);
        for (std::size_t s = 0; s < got.slots.size(); ++s)
            if (!got.slots[s].fallback) CHECK(labels[got.slots[s].index] == control[s]);
    }
}

TEST_CASE("run validates the request") {
    extract::ExtractRequest req;
    req.sentences = {"The paper is novel.", "The experiments are weak.", "I recommend rejection."};
    CHECK_THROWS_AS(extract::run(req, extract::Engine::textrank), Error);
    req.k = 2;
    req.control = std::vector<C>{C::decision};
    CHECK_THROWS_AS(extract::run(req, extract::Engine::textrank), Error);
    req.k.reset();
    CHECK_THROWS_AS(extract::run(req, extract::Engine::textrank), Error);  // labels missing
    req.labels = std::vector<C>{C::strength, C::weakness, C::decision};
    const auto res = extract::run(req, extract::Engine::lexrank);
    CHECK(res.text == "I recommend rejection.");
    req.labels->pop_back();
    CHECK_THROWS_AS(extract::run(req, extract::Engine::lexrank), Error);
}

TEST_CASE("engines are deterministic") {
    const auto sub = mred::testing::synthetic_corpus(1).submissions[0];
    std::vector<std::string> sents;
    for (const auto& r : sub.reviews)
        for (const auto& x : corpus::review_sentences(r)) sents.push_back(x);
    for (auto e : {extract::Engine::lexrank, extract::Engine::textrank, extract::Engine::mmr}) {
        const auto a = extract::rank(e, sents), b = extract::rank(e, sents);
        CHECK(a.order == b.order);
        CHECK(scores_of(a) == scores_of(b));
        for (double s : scores_of(a)) CHECK(std::isfinite(s));
    }
}

TEST_CASE("engine config") {
    EngineConfig bad;
    bad.damping = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad.damping = 0.5;
    bad.tolerance = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    const auto c = EngineConfig::from_json({{"damping", 0.7}, {"similarity", "word_overlap"}});
    CHECK(c.damping == 0.7);
    CHECK(c.similarity == extract::SimilarityKind::word_overlap);
    CHECK(EngineConfig::from_json(c.to_json()).to_json() == c.to_json());
    CHECK_THROWS_AS(EngineConfig::from_json({{"dampin", 0.7}}), Error);
}

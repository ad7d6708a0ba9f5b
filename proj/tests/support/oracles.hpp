#pragma once

// Brute-force reference implementations shared by the unit tests and the
// acceptance binary. None of them call into the library under test.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "mred/category.hpp"
#include "mred/metrics.hpp"
#include "mred/random.hpp"

namespace mred::oracle {

using Matrix = std::vector<std::vector<double>>;

// Multiset intersection over explicitly enumerated n-grams.
inline metrics::Score ngram(const std::vector<std::string>& c, const std::vector<std::string>& r, std::size_t n) {
    auto grams = [n](const std::vector<std::string>& t) {
        std::map<std::vector<std::string>, int> m;
        for (std::size_t i = 0; i + n <= t.size(); ++i) ++m[std::vector<std::string>(t.begin() + i, t.begin() + i + n)];
        return m;
    };
    const auto gc = grams(c), gr = grams(r);
    int overlap = 0, total_c = 0, total_r = 0;
    for (const auto& [g, k] : gc) {
        total_c += k;
        if (auto it = gr.find(g); it != gr.end()) overlap += std::min(k, it->second);
    }
    for (const auto& [g, k] : gr) total_r += k;
    metrics::Score s;
    s.precision = double(overlap) / std::max(total_c, 1);
    s.recall = double(overlap) / std::max(total_r, 1);
    s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0;
    return s;
}

// LCS by memoized recursion; independent of the library's table.
inline std::size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
        if (i == a.size() || j == b.size()) return 0;
        if (auto it = memo.find({i, j}); it != memo.end()) return it->second;
        const std::size_t v = a[i] == b[j] ? 1 + go(i + 1, j + 1) : std::max(go(i + 1, j), go(i, j + 1));
        return memo[{i, j}] = v;
    };
    return go(0, 0);
}

inline metrics::Score rouge_l(const std::vector<std::string>& c, const std::vector<std::string>& r) {
    metrics::Score o;
    if (c.empty() || r.empty()) return o;
    const auto l = lcs(c, r);
    o.precision = double(l) / double(c.size());
    o.recall = double(l) / double(r.size());
    o.f1 = l ? 2 * o.precision * o.recall / (o.precision + o.recall) : 0;
    return o;
}

inline std::size_t edit(const std::vector<Category>& a, const std::vector<Category>& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    return d[a.size()][b.size()];
}

inline double structure(const std::vector<Category>& pred, const std::vector<Category>& gold) {
    const auto m = std::max(pred.size(), gold.size());
    return m == 0 ? 1.0 : 1.0 - double(edit(pred, gold)) / double(m);
}

inline std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t max_len) {
    static const std::vector<std::string> vocab = {"the", "cat", "sat", "on", "mat", "a", "dog", "ran"};
    std::vector<std::string> t(uniform_below(rng, max_len + 1));
    for (auto& w : t) w = vocab[uniform_below(rng, vocab.size())];
    return t;
}

inline std::vector<Category> random_labels(std::mt19937_64& rng, std::size_t max_len, std::size_t min_len = 0) {
    std::vector<Category> v(min_len + uniform_below(rng, max_len - min_len + 1));
    for (auto& c : v) c = kAllCategories[uniform_below(rng, 4)];
    return v;
}

inline Matrix random_similarity(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-0.2, 1.0);
    Matrix m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        m[i][i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) m[i][j] = m[j][i] = u(rng) < 0.1 ? 0.0 : u(rng);
    }
    return m;
}

// Stationary distribution as the eigenvalue-1 eigenvector of the transposed
// Google matrix.
inline std::vector<double> stationary(const Matrix& sim, double d) {
    const auto n = static_cast<Eigen::Index>(sim.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0;
        for (Eigen::Index j = 0; j < n; ++j) s += std::max(sim[i][j], 0.0);
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = s > 0 ? std::max(sim[i][j], 0.0) / s : 1.0 / double(n);
    }
    const Eigen::MatrixXd g = Eigen::MatrixXd::Constant(n, n, (1 - d) / double(n)) + d * m;
    Eigen::EigenSolver<Eigen::MatrixXd> es(g.transpose());
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < n; ++k)
        if (std::abs(es.eigenvalues()[k] - 1.0) < std::abs(es.eigenvalues()[best] - 1.0)) best = k;
    Eigen::VectorXd v = es.eigenvectors().col(best).real();
    v /= v.sum();
    return {v.data(), v.data() + n};
}

inline double dense_cos(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return na && nb ? d / std::sqrt(na * nb) : 0.0;
}

struct MmrCase {
    std::vector<double> relevance;
    Matrix sim;
    double lambda = 0.5;
};

// Random nonnegative embeddings with relevance to their centroid.
inline MmrCase random_mmr_case(std::mt19937_64& rng, int t) {
    std::uniform_real_distribution<double> u(0, 1);
    const auto n = 2 + uniform_below(rng, 7);
    const int dim = 4;
    std::vector<std::vector<double>> v(n, std::vector<double>(dim));
    for (auto& row : v)
        for (auto& x : row) x = u(rng) < 0.3 ? 0.0 : u(rng);
    std::vector<double> centroid(dim, 0.0);
    for (const auto& row : v)
        for (int k = 0; k < dim; ++k) centroid[k] += row[k] / double(n);
    MmrCase c;
    c.relevance.resize(n);
    c.sim.assign(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        c.relevance[i] = dense_cos(v[i], centroid);
        for (std::size_t j = 0; j < n; ++j) c.sim[i][j] = dense_cos(v[i], v[j]);
    }
    c.lambda = t % 5 == 0 ? 0.3 : 0.5;
    return c;
}

// Replays a greedy MMR order and reports the first step where the pick is
// not the unique best (ties to the lower index) or its score disagrees.
// Returns -1 when the whole trace checks out.
inline int mmr_trace_mismatch(const MmrCase& c, const std::vector<std::size_t>& order,
                              const std::vector<double>& scores) {
    const auto n = c.relevance.size();
    if (order.size() != n) return 0;
    std::vector<std::size_t> chosen;
    for (std::size_t step = 0; step < n; ++step) {
        const auto pick = order[step];
        auto score = [&](std::size_t i) {
            double red = 0;
            bool any = false;
            for (auto s : chosen) {
                red = any ? std::max(red, c.sim[i][s]) : c.sim[i][s];
                any = true;
            }
            return c.lambda * c.relevance[i] - (1 - c.lambda) * (any ? red : 0.0);
        };
        if (std::find(chosen.begin(), chosen.end(), pick) != chosen.end()) return int(step);
        if (std::abs(scores[pick] - score(pick)) > 1e-12 * std::max(1.0, std::abs(score(pick)))) return int(step);
        for (std::size_t i = 0; i < n; ++i) {
            if (std::find(chosen.begin(), chosen.end(), i) != chosen.end() || i == pick) continue;
            if (score(i) > score(pick) || (score(i) == score(pick) && i < pick)) return int(step);
        }
        chosen.push_back(pick);
    }
    return -1;
}

}  // namespace mred::oracle

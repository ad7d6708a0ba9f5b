#include "mred/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace mred::sim {

double dot(const SparseVector& a, const SparseVector& b) noexcept {
    double s = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first == b[j].first) {
            s += a[i].second * b[j].second;
            ++i;
            ++j;
        } else if (a[i].first < b[j].first) {
            ++i;
        } else {
            ++j;
        }
    }
    return s;
}

double norm(const SparseVector& a) noexcept {
    double s = 0;
    for (const auto& [_, w] : a) s += w * w;
    return std::sqrt(s);
}

double cosine(const SparseVector& a, const SparseVector& b) noexcept {
    const double na = norm(a), nb = norm(b);
    if (na == 0 || nb == 0) return 0.0;
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) noexcept {
    const std::size_t n = std::min(a.size(), b.size());
    double d = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < n; ++i) d += a[i] * b[i];
    for (double v : a) na += v * v;
    for (double v : b) nb += v * v;
    if (na == 0 || nb == 0) return 0.0;
    return std::clamp(d / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<SparseVector> tfidf_vectors(const std::vector<std::vector<std::string>>& docs) {
    // Sorted vocabulary keeps term ids independent of document order.
    std::map<std::string, std::uint32_t> vocab;
    for (const auto& d : docs)
        for (const auto& t : d) vocab.emplace(t, 0);
    std::uint32_t next = 0;
    for (auto& [_, id] : vocab) id = next++;

    std::vector<std::size_t> df(vocab.size(), 0);
    std::vector<std::map<std::uint32_t, double>> tf(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        for (const auto& t : docs[i]) tf[i][vocab[t]] += 1.0;
        for (const auto& [id, _] : tf[i]) ++df[id];
    }
    const double n = static_cast<double>(docs.size());
    std::vector<SparseVector> out(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        out[i].reserve(tf[i].size());
        for (const auto& [id, count] : tf[i]) {
            const double idf = std::log((1.0 + n) / (1.0 + static_cast<double>(df[id]))) + 1.0;
            out[i].emplace_back(id, count * idf);
        }
    }
    return out;
}

std::vector<std::vector<double>> cosine_matrix(const std::vector<SparseVector>& vectors) {
    const std::size_t n = vectors.size();
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) norms[i] = norm(vectors[i]);
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        if (norms[i] > 0) m[i][i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (norms[i] == 0 || norms[j] == 0) continue;
            const double c = std::clamp(dot(vectors[i], vectors[j]) / (norms[i] * norms[j]), -1.0, 1.0);
            m[i][j] = m[j][i] = c;
        }
    }
    return m;
}

SparseVector centroid(const std::vector<SparseVector>& vectors) {
    std::map<std::uint32_t, double> acc;
    for (const auto& v : vectors)
        for (const auto& [id, w] : v) acc[id] += w;
    SparseVector out;
    if (vectors.empty()) return out;
    const double n = static_cast<double>(vectors.size());
    for (const auto& [id, w] : acc) out.emplace_back(id, w / n);
    return out;
}

}  // namespace mred::sim

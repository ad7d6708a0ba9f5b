#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mred::sim {

/// (term id, weight) pairs sorted by term id.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

double dot(const SparseVector& a, const SparseVector& b) noexcept;
double norm(const SparseVector& a) noexcept;
/// 0 when either vector is zero.
double cosine(const SparseVector& a, const SparseVector& b) noexcept;
double cosine(const std::vector<double>& a, const std::vector<double>& b) noexcept;

/// TF-IDF over a local document collection: raw term counts times the
/// smoothed idf ln((1 + N) / (1 + df)) + 1, which stays positive so that
/// terms shared by every document still contribute.
std::vector<SparseVector> tfidf_vectors(const std::vector<std::vector<std::string>>& docs);

/// Dense symmetric cosine matrix with ones on the diagonal for nonempty rows.
std::vector<std::vector<double>> cosine_matrix(const std::vector<SparseVector>& vectors);

/// Mean of the given vectors.
SparseVector centroid(const std::vector<SparseVector>& vectors);

}  // namespace mred::sim

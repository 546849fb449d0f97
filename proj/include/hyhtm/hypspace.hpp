#ifndef HYHTM_HYPSPACE_HPP_
#define HYHTM_HYPSPACE_HPP_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <utility>
#include <vector>

#include "hyhtm/common.hpp"
#include "hyhtm/corpus.hpp"
#include "hyhtm/term_matrices.hpp"

namespace hyhtm {

/// Vectors leaving the open unit ball are pulled back to this radius.
inline constexpr double kBallProjectionRadius = 1.0 - 1e-5;

/// Distance in the Poincare ball,
///   arcosh(1 + 2 |u - v|^2 / ((1 - |u|^2)(1 - |v|^2))).
/// arcosh(1 + x) is evaluated as log1p(x + sqrt(x (2 + x))) so that nearby
/// points keep full relative precision; a negative x from rounding clamps to 0.
template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar poincare_distance(const Eigen::MatrixBase<DerivedU>& u,
                                            const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedU::Scalar;
  const Scalar diff = (u - v).squaredNorm();
  const Scalar x = Scalar(2) * diff / ((Scalar(1) - u.squaredNorm()) * (Scalar(1) - v.squaredNorm()));
  if (!(x > Scalar(0))) return Scalar(0);
  using std::log1p;
  using std::sqrt;
  return log1p(x + sqrt(x * (Scalar(2) + x)));
}

/// Cosine similarity; 0 when either vector is zero.
template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar euclidean_cosine(const Eigen::MatrixBase<DerivedU>& u,
                                           const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedU::Scalar;
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (nu == Scalar(0) || nv == Scalar(0)) return Scalar(0);
  const Scalar c = u.dot(v) / (nu * nv);
  return std::clamp(c, Scalar(-1), Scalar(1));
}

struct EmbeddingTable {
  Space space = Space::hyperbolic;
  Index dim = 0;
  /// One row per vocabulary term; rows of uncovered terms are zero.
  Eigen::MatrixXd vectors;
  std::vector<bool> is_covered;
  /// Covered term indices in ascending order.
  std::vector<Index> covered;
  Index projected = 0;

  Index vocabulary_size() const { return vectors.rows(); }
  bool contains(Index term) const { return is_covered.at(static_cast<std::size_t>(term)); }
  double coverage() const {
    return vectors.rows() == 0 ? 0.0 : static_cast<double>(covered.size()) / static_cast<double>(vectors.rows());
  }

  /// Distance used for neighbor ranking: Poincare distance in hyperbolic
  /// space, 1 - cosine in euclidean space.
  double distance(Index a, Index b) const;
};

/// Builds a table directly from vectors (rows aligned with the vocabulary).
EmbeddingTable make_embedding_table(Eigen::MatrixXd vectors, std::vector<bool> is_covered, Space space);

EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab, Space space);

struct Neighborhood {
  Index center = 0;
  /// (term, distance) ranked by distance, ties by term index; center first.
  std::vector<std::pair<Index, double>> members;
};

Neighborhood knn(const EmbeddingTable& table, Index term, Index k);

enum class MaxDistanceMode {
  all_pairs,   // maximum over every unordered pair in the neighborhood
  center_max,  // approximation: maximum distance from the center
};

/// Neighborhood-normalized similarity of the center to each member. In
/// euclidean space this is the cosine similarity clamped at zero.
std::vector<std::pair<Index, double>> neighborhood_similarity(
    const Neighborhood& nbhd, const EmbeddingTable& table,
    MaxDistanceMode mode = MaxDistanceMode::all_pairs);

TermSimilarityMatrix build_similarity_matrix(const EmbeddingTable& table, Index k_s, double alpha,
                                             MaxDistanceMode mode = MaxDistanceMode::all_pairs);

TermHierarchyMatrix build_hierarchy_matrix(const EmbeddingTable& table, Index k_h);

}  // namespace hyhtm

#endif  // HYHTM_HYPSPACE_HPP_

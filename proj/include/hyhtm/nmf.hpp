#ifndef HYHTM_NMF_HPP_
#define HYHTM_NMF_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "hyhtm/common.hpp"
#include "hyhtm/corpus.hpp"

namespace hyhtm {

enum class NmfInit { random_uniform, nndsvd };

struct NmfConfig {
  Index n_topics = 10;
  int max_iter = 300;
  /// Stop once the relative objective change falls below this.
  double tol = 1e-5;
  std::uint64_t seed = 42;
  NmfInit init = NmfInit::random_uniform;
  /// Called after every completed iteration with the current factors and the
  /// objective 0.5 |A - WH|_F^2.
  std::function<void(int, const Eigen::MatrixXd&, const Eigen::MatrixXd&, double)> on_iteration;

  void validate() const;
};

/// W is documents x topics, H is topics x terms.
struct FactorPair {
  Eigen::MatrixXd W;
  Eigen::MatrixXd H;
  int iterations = 0;
  bool converged = false;
  /// Objective before the first update followed by one value per iteration.
  std::vector<double> objective;
};

inline constexpr double kNmfDenominatorFloor = 1e-12;

/// Lee-Seung multiplicative updates for the Frobenius objective.
FactorPair factorize(const SparseMatrix& a, const NmfConfig& config);
FactorPair factorize(const Eigen::MatrixXd& a, const NmfConfig& config);
inline FactorPair factorize(const DocTermRepresentation& a, const NmfConfig& config) {
  return factorize(a.values, config);
}

/// |A - WH|_F, accumulated row by row without forming WH.
template <typename DerivedW, typename DerivedH>
double reconstruction_error(const SparseMatrix& a, const Eigen::MatrixBase<DerivedW>& w,
                            const Eigen::MatrixBase<DerivedH>& h) {
  if (w.rows() != a.rows() || h.cols() != a.cols() || w.cols() != h.rows())
    throw ShapeError("reconstruction_error: inconsistent factor shapes");
  double total = 0;
  Eigen::RowVectorXd row(a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    row.noalias() = w.row(i) * h;
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) row[it.col()] -= it.value();
    total += row.squaredNorm();
  }
  return std::sqrt(total);
}

template <typename DerivedA, typename DerivedW, typename DerivedH>
double reconstruction_error(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedW>& w,
                            const Eigen::MatrixBase<DerivedH>& h) {
  if (w.rows() != a.rows() || h.cols() != a.cols() || w.cols() != h.rows())
    throw ShapeError("reconstruction_error: inconsistent factor shapes");
  return (a - w * h).norm();
}

}  // namespace hyhtm

#endif  // HYHTM_NMF_HPP_

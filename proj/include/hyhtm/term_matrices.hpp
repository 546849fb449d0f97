#ifndef HYHTM_TERM_MATRICES_HPP_
#define HYHTM_TERM_MATRICES_HPP_

#include "hyhtm/common.hpp"

namespace hyhtm {

/// Thresholded neighborhood similarity between terms. Row w holds the
/// similarities of w to the members of its own k_s-neighborhood, so the matrix
/// is not symmetric in general.
struct TermSimilarityMatrix {
  SparseMatrix entries;
  double alpha = 0.0;
  Index k_s = 0;

  Index size() const { return entries.rows(); }
};

/// Binary k_h-nearest-neighbor adjacency between terms.
struct TermHierarchyMatrix {
  SparseMatrix entries;
  Index k_h = 0;

  Index size() const { return entries.rows(); }
};

/// An m x m identity, usable as either matrix for ablations.
inline SparseMatrix sparse_identity(Index m) {
  SparseMatrix id(m, m);
  id.setIdentity();
  return id;
}

}  // namespace hyhtm

#endif  // HYHTM_TERM_MATRICES_HPP_

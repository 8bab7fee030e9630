#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tcsim {

/// Eigen-decomposition of a real symmetric tridiagonal matrix.
///
/// `vectors` is column-major: column k (eigenvector for values[k]) occupies
/// vectors[k*dim, (k+1)*dim). Values are ascending. Each eigenvector is
/// normalized and signed so its first component with magnitude above 1e-12
/// is positive.
struct TridiagonalEigen {
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<double> vectors;  // empty when only values were requested

  std::span<const double> column(std::size_t k) const {
    return {vectors.data() + k * dim, dim};
  }
};

/// Above this dimension eigenvectors come from inverse iteration on the QL
/// eigenvalues (O(dim) per vector) instead of accumulated QL rotations
/// (O(dim^3) overall).
inline constexpr std::size_t kQlVectorMaxDim = 512;

/// Implicit-shift QL iteration. `off` holds the dim-1 sub/super-diagonal
/// entries. Throws ConvergenceError if an eigenvalue needs more than
/// `max_sweeps_per_value` QL sweeps.
TridiagonalEigen solve_symmetric_tridiagonal(std::span<const double> diag,
                                             std::span<const double> off,
                                             bool want_vectors = true,
                                             int max_sweeps_per_value = 60);

/// Same result layout as solve_symmetric_tridiagonal, but eigenvectors come
/// from inverse iteration: the matrix is split where off-diagonals vanish,
/// each piece gets QL eigenvalues, and each vector is refined from those.
/// Members of tight eigenvalue clusters are reorthogonalized.
TridiagonalEigen solve_by_inverse_iteration(std::span<const double> diag,
                                            std::span<const double> off,
                                            int max_sweeps_per_value = 60);

}  // namespace tcsim

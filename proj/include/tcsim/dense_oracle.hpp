#pragma once

// Independent check of the block solver: builds H = R3 + a^dag a
// - kappa a R+ - kappa a^dag R- on the full (two-level)^N x truncated-Fock
// product space from explicit operator matrices, diagonalizes densely, and
// splits the spectrum into (r, c) sectors.

#include <cstddef>
#include <optional>
#include <vector>

#include "tcsim/half_integer.hpp"

namespace tcsim {

struct OracleSector {
  HalfInt r;
  HalfInt c;
  std::size_t multiplicity = 0;     // number of copies of the (r, c) block
  std::vector<double> eigenvalues;  // ascending, each block level repeated `multiplicity` times
};

struct DenseOracleResult {
  int molecules = 0;
  int photon_cutoff = 0;
  double kappa = 0.0;
  std::size_t full_dim = 0;
  std::vector<OracleSector> sectors;  // only sectors untouched by the Fock cutoff

  const OracleSector* find(HalfInt r, HalfInt c) const;
};

inline constexpr std::size_t kDenseOracleMaxDim = 4096;
inline constexpr int kDenseOracleMaxMolecules = 3;

/// Throws DomainError if molecules is outside [1, 3] or the product space
/// exceeds kDenseOracleMaxDim.
DenseOracleResult dense_oracle(int molecules, int photon_cutoff, double kappa);

}  // namespace tcsim

#pragma once

// Tavis-Cummings Hamiltonian on one invariant (r, c) block.
//
// Energies are in units of hbar*omega. The block basis is |n>|r, c-n> for
// photon numbers n in [max(0, c-r), c+r]. The coupling phases are absorbed
// into the basis so the block is real symmetric with non-negative
// off-diagonal entries; |A_n|^2 and eigenvalues do not depend on them.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tcsim/half_integer.hpp"

namespace tcsim {

struct BlockIndex {
  HalfInt r;          // cooperation number, r >= 0
  HalfInt c;          // conserved excitation number, eigenvalue of R3 + a^dag a
  double kappa = 1.0; // coupling magnitude |kappa| >= 0

  /// Throws DomainError on r < 0, c < -r, parity mismatch, or bad kappa.
  void validate() const;
};

struct BasisRange {
  std::int64_t n_min = 0;
  std::int64_t n_max = 0;
  std::size_t dim = 0;
};

struct HamiltonianBlock {
  BlockIndex index;
  BasisRange basis;
  std::vector<double> diagonal;     // every entry equals c
  std::vector<double> offdiagonal;  // t_n for n = n_min+1 .. n_max
};

struct EigenSolution {
  BlockIndex block;
  BasisRange basis;
  std::vector<double> eigenvalues;  // ascending; k = 0 is the ground state
  std::vector<double> amplitudes;   // column-major dim x dim, column k = A_n of state k

  std::size_t dim() const { return basis.dim; }
  std::span<const double> state(std::size_t k) const {
    return {amplitudes.data() + k * basis.dim, basis.dim};
  }
  /// j = k - r, defined only for full blocks (dim == 2r+1).
  std::optional<HalfInt> j_label(std::size_t k) const;
};

struct PhotonStatistics {
  double n0 = 0.0;      // mean photon number
  double sigma2 = 0.0;  // photon-number variance
  double m_mean = 0.0;  // <R3> = c - n0
  std::int64_t n_min = 0;
  std::vector<double> distribution;  // p_n for n = n_min ...
};

struct GroundMeanPrediction {
  double full = 0.0;        // (2/3)(c+1/2) + (1/3)sqrt(3r^2+3r+3/4+c^2+c+1/4)
  double asymptotic = 0.0;  // (2/3)c + (1/3)sqrt(3r^2+c^2)
};

struct GroundVariancePrediction {
  double sigma2 = 0.0;
  bool in_regime = false;  // c > r > 1
};

BasisRange block_basis(const BlockIndex& index);

/// Coupling between |n-1>|r,c-n+1> and |n>|r,c-n>.
double block_coupling(const BlockIndex& index, std::int64_t n);

HamiltonianBlock build_block(const BlockIndex& index);

/// Full spectrum and eigenvectors of the block. The constant diagonal is
/// removed before iterating and added back, so the spectrum is symmetric
/// about c to rounding.
EigenSolution diagonalize(const HamiltonianBlock& block);

/// Eigenvalues only, O(dim^2).
std::vector<double> block_eigenvalues(const HamiltonianBlock& block);

PhotonStatistics photon_statistics(const EigenSolution& solution, std::size_t k);

GroundMeanPrediction predicted_ground_mean(const BlockIndex& index);

/// sigma^2 = (1/2) sqrt(n0 [r^2 - (n0-c)^2] / (3 n0 - 2c)). Throws
/// DomainError when 3n0 - 2c <= 0 or the radicand is negative.
GroundVariancePrediction predicted_ground_variance(const BlockIndex& index, double n0);

/// Same formula on real-valued (r, c), for callers that fix c from n0.
GroundVariancePrediction ground_variance_formula(double r, double c, double n0);

/// q0 = (c - lambda_min) / |kappa|.
double effective_ground_eigenvalue(const EigenSolution& solution);

/// lambda_j = c + 2 j |kappa| sqrt(n0), j = -r .. r.
std::vector<double> predicted_spectrum_linear(const BlockIndex& index, double n0);

/// Normalized exp(-(n-n0)^2 / (2 sigma2)) over the basis range.
std::vector<double> gaussian_profile(double n0, double sigma2, const BasisRange& basis);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares line through (j, lambda_j) for a full block.
LinearFit fit_spectrum_slope(const EigenSolution& solution);

}  // namespace tcsim

#include "tcsim/tc_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcsim/errors.hpp"
#include "tcsim/tridiagonal.hpp"

namespace tcsim {

namespace {

std::string describe(const BlockIndex& index) {
  return "(r=" + index.r.to_string() + ", c=" + index.c.to_string() + ")";
}

}  // namespace

void BlockIndex::validate() const {
  if (r.twice() < 0) throw DomainError("cooperation number r must be >= 0 " + describe(*this));
  if (!same_parity(r, c)) {
    throw DomainError("2r and 2c must have equal parity " + describe(*this));
  }
  if (c < -r) throw DomainError("empty block: c < -r " + describe(*this));
  if (!std::isfinite(kappa) || kappa < 0.0) {
    throw DomainError("coupling |kappa| must be finite and >= 0");
  }
}

std::optional<HalfInt> EigenSolution::j_label(std::size_t k) const {
  if (basis.dim != static_cast<std::size_t>(block.r.twice() + 1) || k >= basis.dim) {
    return std::nullopt;
  }
  return HalfInt::from_int(static_cast<std::int64_t>(k)) - block.r;
}

BasisRange block_basis(const BlockIndex& index) {
  index.validate();
  // c - r and c + r are integers once parity holds.
  const std::int64_t c_minus_r = (index.c.twice() - index.r.twice()) / 2;
  const std::int64_t c_plus_r = (index.c.twice() + index.r.twice()) / 2;
  BasisRange basis;
  basis.n_min = std::max<std::int64_t>(0, c_minus_r);
  basis.n_max = c_plus_r;
  basis.dim = static_cast<std::size_t>(basis.n_max - basis.n_min + 1);
  return basis;
}

double block_coupling(const BlockIndex& index, std::int64_t n) {
  // 4[r(r+1) - m(m+1)] with m = c - n, in exact integers.
  const std::int64_t R = index.r.twice();
  const std::int64_t M = index.c.twice() - 2 * n;
  const std::int64_t radicand4 = R * (R + 2) - M * (M + 2);
  if (radicand4 < 0 || n < 0) {
    throw std::logic_error("negative coupling radicand at n=" + std::to_string(n) + " " +
                           describe(index));
  }
  return index.kappa * std::sqrt(static_cast<double>(n)) *
         std::sqrt(static_cast<double>(radicand4)) / 2.0;
}

HamiltonianBlock build_block(const BlockIndex& index) {
  HamiltonianBlock block;
  block.index = index;
  block.basis = block_basis(index);
  block.diagonal.assign(block.basis.dim, index.c.value());
  block.offdiagonal.reserve(block.basis.dim - 1);
  for (std::int64_t n = block.basis.n_min + 1; n <= block.basis.n_max; ++n) {
    block.offdiagonal.push_back(block_coupling(index, n));
  }
  return block;
}

namespace {

TridiagonalEigen solve_centered(const HamiltonianBlock& block, bool want_vectors) {
  std::vector<double> centered(block.basis.dim);
  const double c = block.index.c.value();
  for (std::size_t i = 0; i < centered.size(); ++i) centered[i] = block.diagonal[i] - c;
  try {
    auto eig = solve_symmetric_tridiagonal(centered, block.offdiagonal, want_vectors);
    for (double& v : eig.values) v += c;
    return eig;
  } catch (const ConvergenceError& err) {
    throw ConvergenceError(std::string(err.what()) + " in block " + describe(block.index) +
                           " dim=" + std::to_string(block.basis.dim));
  }
}

}  // namespace

EigenSolution diagonalize(const HamiltonianBlock& block) {
  auto eig = solve_centered(block, true);
  EigenSolution out;
  out.block = block.index;
  out.basis = block.basis;
  out.eigenvalues = std::move(eig.values);
  out.amplitudes = std::move(eig.vectors);
  return out;
}

std::vector<double> block_eigenvalues(const HamiltonianBlock& block) {
  return solve_centered(block, false).values;
}

PhotonStatistics photon_statistics(const EigenSolution& solution, std::size_t k) {
  if (k >= solution.dim()) {
    throw DomainError("state index " + std::to_string(k) + " out of range for dim " +
                      std::to_string(solution.dim()));
  }
  PhotonStatistics stats;
  stats.n_min = solution.basis.n_min;
  const auto amps = solution.state(k);
  stats.distribution.resize(amps.size());
  double total = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    stats.distribution[i] = amps[i] * amps[i];
    total += stats.distribution[i];
  }
  for (double& p : stats.distribution) p /= total;

  double mean = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    mean += stats.distribution[i] * static_cast<double>(stats.n_min + static_cast<std::int64_t>(i));
  }
  double var = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const double d = static_cast<double>(stats.n_min + static_cast<std::int64_t>(i)) - mean;
    var += stats.distribution[i] * d * d;
  }
  stats.n0 = mean;
  stats.sigma2 = var;
  stats.m_mean = solution.block.c.value() - mean;
  return stats;
}

GroundMeanPrediction predicted_ground_mean(const BlockIndex& index) {
  index.validate();
  const double r = index.r.value();
  const double c = index.c.value();
  GroundMeanPrediction out;
  out.full = (2.0 / 3.0) * (c + 0.5) +
             std::sqrt(3 * r * r + 3 * r + 0.75 + c * c + c + 0.25) / 3.0;
  out.asymptotic = (2.0 / 3.0) * c + std::sqrt(3 * r * r + c * c) / 3.0;
  return out;
}

GroundVariancePrediction predicted_ground_variance(const BlockIndex& index, double n0) {
  index.validate();
  return ground_variance_formula(index.r.value(), index.c.value(), n0);
}

GroundVariancePrediction ground_variance_formula(double r, double c, double n0) {
  const double denom = 3.0 * n0 - 2.0 * c;
  if (!(denom > 0.0)) {
    throw DomainError("ground variance formula needs 3 n0 - 2c > 0 (n0=" + std::to_string(n0) +
                      ", c=" + std::to_string(c) + ")");
  }
  const double radicand = n0 * (r * r - (n0 - c) * (n0 - c)) / denom;
  if (radicand < 0.0) {
    throw DomainError("ground variance formula has negative radicand: need |n0 - c| <= r");
  }
  return {0.5 * std::sqrt(radicand), c > r && r > 1.0};
}

double effective_ground_eigenvalue(const EigenSolution& solution) {
  if (!(solution.block.kappa > 0.0)) {
    throw DomainError("effective eigenvalue undefined for |kappa| = 0");
  }
  return (solution.block.c.value() - solution.eigenvalues.front()) / solution.block.kappa;
}

std::vector<double> predicted_spectrum_linear(const BlockIndex& index, double n0) {
  index.validate();
  const std::int64_t count = index.r.twice() + 1;
  std::vector<double> out(static_cast<std::size_t>(count));
  const double step = 2.0 * index.kappa * std::sqrt(n0);
  for (std::int64_t k = 0; k < count; ++k) {
    const double j = (HalfInt::from_int(k) - index.r).value();
    out[static_cast<std::size_t>(k)] = index.c.value() + j * step;
  }
  return out;
}

std::vector<double> gaussian_profile(double n0, double sigma2, const BasisRange& basis) {
  if (!(sigma2 > 0.0)) throw DomainError("gaussian profile needs sigma2 > 0");
  std::vector<double> out(basis.dim);
  double total = 0.0;
  for (std::size_t i = 0; i < basis.dim; ++i) {
    const double d = static_cast<double>(basis.n_min + static_cast<std::int64_t>(i)) - n0;
    out[i] = std::exp(-d * d / (2.0 * sigma2));
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

LinearFit fit_spectrum_slope(const EigenSolution& solution) {
  const std::size_t dim = solution.dim();
  if (!solution.j_label(0) || dim < 2) {
    throw DomainError("linear ladder fit needs a full block with dim = 2r+1 >= 2");
  }
  double mj = 0.0, ml = 0.0;
  std::vector<double> js(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    js[k] = solution.j_label(k)->value();
    mj += js[k];
    ml += solution.eigenvalues[k];
  }
  mj /= static_cast<double>(dim);
  ml /= static_cast<double>(dim);
  double sjj = 0.0, sjl = 0.0, sll = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double dj = js[k] - mj;
    const double dl = solution.eigenvalues[k] - ml;
    sjj += dj * dj;
    sjl += dj * dl;
    sll += dl * dl;
  }
  LinearFit fit;
  fit.slope = sjl / sjj;
  fit.intercept = ml - fit.slope * mj;
  double ss_res = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double e = solution.eigenvalues[k] - (fit.intercept + fit.slope * js[k]);
    ss_res += e * e;
  }
  fit.r_squared = sll > 0.0 ? 1.0 - ss_res / sll : 1.0;
  return fit;
}

}  // namespace tcsim

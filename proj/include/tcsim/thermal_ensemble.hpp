#pragma once

// Dicke multiplet counting and thermal-equilibrium moments of N
// non-interacting two-level molecules with level splitting E = 1 and
// Boltzmann weight exp(-beta m).

#include <array>
#include <cstdint>
#include <optional>

#include "tcsim/half_integer.hpp"

namespace tcsim {

inline constexpr int kExactDegeneracyMaxN = 30;
inline constexpr int kEnumerationMaxN = 14;

struct Degeneracy {
  std::optional<std::uint64_t> exact;  // present for N <= kExactDegeneracyMaxN
  double log_value = 0.0;              // ln P(r), always present
};

/// P(r) = N!(2r+1) / ((N/2+r+1)! (N/2-r)!), the number of spin-r multiplets.
Degeneracy degeneracy(int molecules, HalfInt r);

/// C(n, k) exactly. Throws DomainError if the result does not fit.
std::uint64_t binomial(int n, int k);

struct EnsembleParams {
  int molecules = 1;
  double beta = 0.0;  // +infinity selects the zero-temperature limit

  bool frozen() const;
  void validate() const;
};

struct MMean {
  double value = 0.0;               // -(N/2) tanh(beta/2)
  double small_beta_approx = 0.0;   // -N beta / 4
  bool approx_valid = false;        // beta < 1
};

struct ThermalMoments {
  double m_mean = 0.0;
  double m_variance = 0.0;
  double r2_mean = 0.0;
  double r2_variance = 0.0;  // approximate large-N closed form
  double sigma_r2_mean = 0.0;
};

MMean thermal_m_mean(const EnsembleParams& params);
double thermal_m_variance(const EnsembleParams& params);

/// Degeneracy-weighted average of r(r+1) at fixed m: N/2 + m^2.
double r2_mean_given_m(int molecules, HalfInt m);
/// Spread of r(r+1) at fixed m in closed form: N^2/4 - m^2.
double r2_spread_given_m(int molecules, HalfInt m);

/// 3N/4 + m_mean^2 (1 - 1/N).
double thermal_r2_mean(const EnsembleParams& params);
/// N(N-1)/8 + ((N-1)(N-2)/N) m_mean^2 - (2(2N-3)(N-1)/N^3) m_mean^4.
double thermal_r2_variance(const EnsembleParams& params);
/// (N(N-1)/4)(1 - 4 m_mean^2 / N^2).
double thermal_sigma_r2(const EnsembleParams& params);

ThermalMoments thermal_moments(const EnsembleParams& params);

/// Exact integer sums over multiplets reaching a fixed m:
/// count = sum_{r>=|m|} P(r), sum4 = sum P(r) 4r(r+1), sum16 = sum P(r) [4r(r+1)]^2.
struct FixedMSums {
  std::uint64_t count = 0;
  std::uint64_t sum4 = 0;
  std::uint64_t sum16 = 0;
};
FixedMSums fixed_m_sums(int molecules, HalfInt m);

struct EnumerationMoments {
  double partition = 0.0;          // sum_r P(r) sum_m exp(-beta m)
  double partition_product = 0.0;  // (2 cosh(beta/2))^N
  std::array<double, 5> m_raw{};   // <m^k>, k = 0..4
  std::array<double, 5> r2_raw{};  // <[r(r+1)]^k>, k = 0..4
  double m_mean = 0.0;
  double m_variance = 0.0;
  double r2_mean = 0.0;
  double r2_variance = 0.0;
  double sigma_r2_mean = 0.0;  // <N^2/4 - m^2>
};

/// Direct summation over (r, m) with degeneracy P(r). N <= kEnumerationMaxN.
EnumerationMoments enumeration_oracle(const EnsembleParams& params);

}  // namespace tcsim

#include "tcsim/thermal_ensemble.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tcsim/errors.hpp"

namespace tcsim {

namespace {

__extension__ typedef unsigned __int128 u128;

u128 factorial(int n) {
  u128 out = 1;
  for (int k = 2; k <= n; ++k) out *= static_cast<u128>(k);
  return out;
}

void check_molecules(int molecules) {
  if (molecules < 1) throw DomainError("molecule count N must be >= 1");
}

// m (or r) is reachable for N molecules: |x| <= N/2 and N/2 - x integer.
void check_projection(int molecules, HalfInt x, const char* what) {
  check_molecules(molecules);
  const HalfInt half_n = HalfInt::from_twice(molecules);
  if (!same_parity(x, half_n)) {
    throw DomainError(std::string(what) + " parity does not match N=" + std::to_string(molecules));
  }
  if (x > half_n || x < -half_n) {
    throw DomainError(std::string(what) + "=" + x.to_string() + " out of range for N=" +
                      std::to_string(molecules));
  }
}

}  // namespace

Degeneracy degeneracy(int molecules, HalfInt r) {
  check_projection(molecules, r, "r");
  if (r.twice() < 0) throw DomainError("r must be >= 0");
  const int upper = static_cast<int>((molecules + r.twice()) / 2);  // N/2 + r
  const int lower = static_cast<int>((molecules - r.twice()) / 2);  // N/2 - r
  const double two_r_plus_1 = static_cast<double>(r.twice() + 1);

  Degeneracy out;
  out.log_value = std::lgamma(molecules + 1.0) + std::log(two_r_plus_1) -
                  std::lgamma(upper + 2.0) - std::lgamma(lower + 1.0);
  if (molecules <= kExactDegeneracyMaxN) {
    const u128 num = factorial(molecules) * static_cast<u128>(r.twice() + 1);
    const u128 den = factorial(upper + 1) * factorial(lower);
    if (num % den != 0) throw std::logic_error("non-integral multiplet count");
    out.exact = static_cast<std::uint64_t>(num / den);
    out.log_value = std::log(static_cast<double>(*out.exact));
  }
  return out;
}

std::uint64_t binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n) throw DomainError("binomial arguments out of range");
  k = std::min(k, n - k);
  u128 out = 1;
  for (int i = 1; i <= k; ++i) {
    out = out * static_cast<u128>(n - k + i) / static_cast<u128>(i);
    if (out > std::numeric_limits<std::uint64_t>::max()) {
      throw DomainError("binomial overflows 64 bits");
    }
  }
  return static_cast<std::uint64_t>(out);
}

bool EnsembleParams::frozen() const { return std::isinf(beta) && beta > 0; }

void EnsembleParams::validate() const {
  check_molecules(molecules);
  if (std::isnan(beta) || beta < 0.0) throw DomainError("beta must be >= 0");
}

MMean thermal_m_mean(const EnsembleParams& params) {
  params.validate();
  const double n = params.molecules;
  MMean out;
  out.value = params.frozen() ? -n / 2.0 : -(n / 2.0) * std::tanh(params.beta / 2.0);
  out.small_beta_approx = params.frozen() ? -std::numeric_limits<double>::infinity()
                                          : -n * params.beta / 4.0;
  out.approx_valid = params.beta < 1.0;
  return out;
}

double thermal_m_variance(const EnsembleParams& params) {
  const double m = thermal_m_mean(params).value;
  const double n = params.molecules;
  if (params.frozen()) return 0.0;
  return n / 4.0 - m * m / n;
}

double r2_mean_given_m(int molecules, HalfInt m) {
  check_projection(molecules, m, "m");
  return molecules / 2.0 + m.value() * m.value();
}

double r2_spread_given_m(int molecules, HalfInt m) {
  check_projection(molecules, m, "m");
  const double n = molecules;
  return n * n / 4.0 - m.value() * m.value();
}

double thermal_r2_mean(const EnsembleParams& params) {
  const double m = thermal_m_mean(params).value;
  const double n = params.molecules;
  return 3.0 * n / 4.0 + m * m * (1.0 - 1.0 / n);
}

double thermal_r2_variance(const EnsembleParams& params) {
  const double m = thermal_m_mean(params).value;
  const double n = params.molecules;
  const double m2 = m * m;
  return n * (n - 1.0) / 8.0 + (n - 1.0) * (n - 2.0) / n * m2 -
         2.0 * (2.0 * n - 3.0) * (n - 1.0) / (n * n * n) * m2 * m2;
}

double thermal_sigma_r2(const EnsembleParams& params) {
  const double m = thermal_m_mean(params).value;
  const double n = params.molecules;
  return n * (n - 1.0) / 4.0 * (1.0 - 4.0 * m * m / (n * n));
}

ThermalMoments thermal_moments(const EnsembleParams& params) {
  ThermalMoments out;
  out.m_mean = thermal_m_mean(params).value;
  out.m_variance = thermal_m_variance(params);
  out.r2_mean = thermal_r2_mean(params);
  out.r2_variance = thermal_r2_variance(params);
  out.sigma_r2_mean = thermal_sigma_r2(params);
  return out;
}

FixedMSums fixed_m_sums(int molecules, HalfInt m) {
  check_projection(molecules, m, "m");
  if (molecules > kExactDegeneracyMaxN) throw DomainError("exact sums need N <= 30");
  FixedMSums out;
  const std::int64_t abs_twice_m = m.twice() < 0 ? -m.twice() : m.twice();
  for (std::int64_t tr = abs_twice_m; tr <= molecules; tr += 2) {
    const std::uint64_t p = *degeneracy(molecules, HalfInt::from_twice(tr)).exact;
    const std::uint64_t x4 = static_cast<std::uint64_t>(tr * (tr + 2));  // 4 r(r+1)
    out.count += p;
    out.sum4 += p * x4;
    out.sum16 += p * x4 * x4;
  }
  return out;
}

EnumerationMoments enumeration_oracle(const EnsembleParams& params) {
  params.validate();
  const int n = params.molecules;
  if (n > kEnumerationMaxN) {
    throw DomainError("enumeration oracle limited to N <= " + std::to_string(kEnumerationMaxN));
  }
  EnumerationMoments out;
  // Weights are shifted by exp(-beta N/2) so the ground multiplet carries weight 1.
  std::array<double, 5> m_sum{};
  std::array<double, 5> x_sum{};
  double z_shifted = 0.0;
  for (int tr = n % 2; tr <= n; tr += 2) {
    const double p = static_cast<double>(*degeneracy(n, HalfInt::from_twice(tr)).exact);
    const double r = tr / 2.0;
    const double x = r * (r + 1.0);
    for (int tm = -tr; tm <= tr; tm += 2) {
      const double m = tm / 2.0;
      double w = 0.0;
      if (params.frozen()) {
        w = (tm == -n) ? 1.0 : 0.0;
      } else {
        w = std::exp(-params.beta * (m + n / 2.0));
      }
      w *= p;
      z_shifted += w;
      double mk = 1.0, xk = 1.0;
      for (int k = 0; k < 5; ++k) {
        m_sum[k] += w * mk;
        x_sum[k] += w * xk;
        mk *= m;
        xk *= x;
      }
    }
  }
  for (int k = 0; k < 5; ++k) {
    out.m_raw[k] = m_sum[k] / z_shifted;
    out.r2_raw[k] = x_sum[k] / z_shifted;
  }
  if (params.frozen()) {
    out.partition = std::numeric_limits<double>::infinity();
    out.partition_product = std::numeric_limits<double>::infinity();
  } else {
    out.partition = z_shifted * std::exp(params.beta * n / 2.0);
    out.partition_product = std::pow(2.0 * std::cosh(params.beta / 2.0), n);
  }
  out.m_mean = out.m_raw[1];
  out.m_variance = out.m_raw[2] - out.m_raw[1] * out.m_raw[1];
  out.r2_mean = out.r2_raw[1];
  out.r2_variance = out.r2_raw[2] - out.r2_raw[1] * out.r2_raw[1];
  out.sigma_r2_mean = n * n / 4.0 - out.m_raw[2];
  return out;
}

}  // namespace tcsim

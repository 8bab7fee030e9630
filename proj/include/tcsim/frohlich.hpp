#pragma once

// Pumped, bath-coupled steady state of the 2r+1 collective levels.
//
// Each level l (energy omega_l) is pumped at rate p, loses Q to the cavity,
// and exchanges quanta with a bath at inverse temperature beta through a
// first-order channel (strength phi) and a second-order level-to-level
// channel (strength chi). Above a critical net supply s = p - Q the excess
// quanta pile up in the lowest level: a Bose-Einstein-like condensation.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tcsim/half_integer.hpp"
#include "tcsim/tc_spectrum.hpp"

namespace tcsim {

enum class LadderSource { analytic, spectral };

const char* to_string(LadderSource source);

struct LevelLadder {
  std::vector<double> omegas;  // ascending, index 0 is j = -r
  LadderSource source = LadderSource::analytic;

  std::size_t size() const { return omegas.size(); }
  double ground() const { return omegas.front(); }
  double top() const { return omegas.back(); }
  /// Some level above the ground coincides with it.
  bool degenerate() const;
  /// Throws DomainError unless non-empty, positive and non-decreasing.
  void validate() const;
};

struct BathParams {
  double beta = 1.0;
  double phi = 1.0;
  double chi = 0.0;

  void validate() const;
};

struct PumpParams {
  double p = 0.0;
  double Q = 0.0;

  double s() const { return p - Q; }
  static PumpParams from_supply(double s, double Q = 0.0) { return {s + Q, Q}; }
};

struct SteadyStateSolution {
  std::vector<double> occupations;
  double A = 1.0;
  double mu = 0.0;
  double eta = 0.0;         // sum of occupations
  double S_supply = 0.0;    // s * sum_j exp(-omega_j beta)
  double S_exchange = 0.0;  // phi * sum_j [n_j - (1 + n_j) exp(-omega_j beta)]
  double n_c = 0.0;
  double n_n = 0.0;
  std::vector<double> residuals;  // |p - L1_l - L2_l - Q|
  double max_residual = 0.0;
  double eta_mismatch = 0.0;      // |eta_root - sum n_l| / eta
  int iterations = 0;
};

struct SolverOptions {
  int max_iterations = 2000;
  double residual_tol = 1e-8;  // relative to max(p, phi)
  double eta_tol = 1e-10;      // relative to eta
};

// ladder construction

/// omega_j = omega (1 + j kappa / sqrt(c_ref)), j = -r..r.
LevelLadder ladder_analytic(HalfInt r, double c_ref, double omega, double kappa);

/// omega_j = omega lambda_j / c from a full (dim = 2r+1) block spectrum.
LevelLadder ladder_from_spectrum(const EigenSolution& solution, double omega);

// rate building blocks

double planck_occupation(double omega, double beta);

/// L1 = phi (n e^{omega beta} - (1 + n)).
double first_order_loss(double n, double omega, const BathParams& bath);

/// L2_l = chi sum_j [n_l (1+n_j) e^{(omega_l-omega_j) beta} - n_j (1+n_l)].
double second_order_loss(std::size_t l, std::span<const double> occupations,
                         const LevelLadder& ladder, const BathParams& bath);

/// (1 + s/(phi + chi eta)) / (A e^{omega beta} - 1).
double pumped_occupation(double omega, double s, const BathParams& bath, double eta, double A);

/// Quotient form: (phi + chi sum_j (1+n_j) e^{-omega_j beta}) / (phi + chi eta).
double amplification_factor(std::span<const double> occupations, const LevelLadder& ladder,
                            const BathParams& bath, double eta);

/// 1 - chi S / (phi (phi + chi eta)); equals the quotient form at a steady state.
double amplification_factor_from_transfer(double S, const BathParams& bath, double eta);

/// The variant with denominator (phi + eta phi), kept only for comparison.
double amplification_factor_phi_eta_variant(double S, const BathParams& bath, double eta);

double excitation_transfer_supply(double s, const LevelLadder& ladder, const BathParams& bath);
double excitation_transfer_exchange(std::span<const double> occupations,
                                    const LevelLadder& ladder, const BathParams& bath);

/// mu = -ln(A) / beta. Throws DomainError unless 0 < A <= 1.
double chemical_potential(double A, double beta);

// steady state

/// Reduces the stationarity conditions to one monotone equation in eta and
/// brackets its root by bisection above the condensation pole. Throws
/// DomainError for s < 0 or a degenerate ladder with chi > 0, and
/// ConvergenceError (with the bracket) if the tolerances are not met.
SteadyStateSolution solve_steady_state(const LevelLadder& ladder, const BathParams& bath,
                                       const PumpParams& pump, const SolverOptions& options = {});

std::vector<double> stationarity_residuals(std::span<const double> occupations,
                                           const LevelLadder& ladder, const BathParams& bath,
                                           const PumpParams& pump);

/// (n_c, n_n): ground-level occupation and the rest.
std::pair<double, double> condensate_split(const SteadyStateSolution& solution);

// threshold analysis

/// Equilibrium total sum_l Planck(omega_l).
double thermal_total(const LevelLadder& ladder, double beta);

/// B = sum_{j != -r} 1 / (e^{(omega_j - omega_{-r}) beta} - 1). Throws on a
/// degenerate ladder.
double level_sum_B(const LevelLadder& ladder, double beta);

struct NoncondensateBound {
  double bound = 0.0;      // largest n_n with n_n (phi + chi n_n) / (phi + chi n_n + s) <= B
  double B = 0.0;
  double asymptote = 0.0;  // sqrt(B s / chi); NaN when chi = 0
};

NoncondensateBound noncondensate_bound(double s, const BathParams& bath, const LevelLadder& ladder);

struct EffectiveFrequency {
  double omega_bar = 0.0;
  bool in_range = false;  // omega_{-r} <= omega_bar <= omega_r
};

/// Solves eta = eta_T + (2r+1) s / (phi (e^{omega_bar beta} - 1)) for omega_bar.
EffectiveFrequency fit_effective_frequency(double s, double eta, double eta_T,
                                           const LevelLadder& ladder, const BathParams& bath);

/// eta_T + (2r+1) s / (phi (e^{omega_bar beta} - 1)). Throws if omega_bar
/// lies outside the ladder.
double total_occupancy_prediction(double s, const BathParams& bath, const LevelLadder& ladder,
                                  double eta_T, double omega_bar);

/// eta_T - eta_n + (2r+1) s / (phi (e^{omega_bar beta} - 1)).
double condensate_prediction(double s, double eta_T, double eta_n, const BathParams& bath,
                             const LevelLadder& ladder, double omega_bar);

/// (2r+1) / (e^{omega_bar beta} - 1).
double eta_T_estimate(std::size_t levels, double omega_bar, double beta);

struct ThresholdEstimate {
  double s0 = 0.0;
  bool positive = false;  // false when 2B <= eta_T: condensation is immediate
};

/// s0 = (phi / eta_T^2) (eta_T + 2 phi / chi)(2B - eta_T). Never clamped.
ThresholdEstimate threshold(double eta_T, double B, const BathParams& bath);

struct AboveThresholdDispersion {
  double n_o = 0.0;  // s eta_T / phi
  double c = 0.0;    // excitation number consistent with n_o at the given r
  double sigma2 = 0.0;
  bool in_regime = false;
};

/// Identifies the lasing-mode mean with s eta_T / phi, picks c from the
/// asymptotic ground-mean relation at cooperation number r, and evaluates
/// the ground-state variance formula there.
AboveThresholdDispersion above_threshold_dispersion(double s, const BathParams& bath,
                                                    double eta_T, double r);

// sweeps

struct SweepPoint {
  double s = 0.0;
  std::optional<SteadyStateSolution> solution;
  std::optional<EffectiveFrequency> omega_bar;  // s > 0 only
  std::string status = "ok";
};

/// Solves every grid point independently; results are returned in grid
/// order regardless of `workers`.
std::vector<SweepPoint> run_sweep(const LevelLadder& ladder, const BathParams& bath,
                                  std::span<const double> s_grid, double Q = 0.0,
                                  int workers = 1);

/// s at the steepest rise of n_c/eta against ln s (geometric midpoint of the
/// steepest grid interval). Throws DomainError with fewer than three usable
/// positive-s points.
double condensation_knee(std::span<const SweepPoint> sweep);

std::vector<double> linear_grid(double lo, double hi, int points);
std::vector<double> log_grid(double lo, double hi, int points);

}  // namespace tcsim

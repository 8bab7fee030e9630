#include "tcsim/frohlich.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "tcsim/errors.hpp"

namespace tcsim {

const char* to_string(LadderSource source) {
  return source == LadderSource::analytic ? "analytic" : "spectral";
}

bool LevelLadder::degenerate() const {
  for (std::size_t j = 1; j < omegas.size(); ++j) {
    if (omegas[j] <= omegas.front()) return true;
  }
  return false;
}

void LevelLadder::validate() const {
  if (omegas.empty()) throw DomainError("level ladder is empty");
  for (std::size_t j = 0; j < omegas.size(); ++j) {
    if (!std::isfinite(omegas[j]) || !(omegas[j] > 0.0)) {
      throw DomainError("level energies must be positive (level " + std::to_string(j) + ")");
    }
    if (j > 0 && omegas[j] < omegas[j - 1]) throw DomainError("level ladder must be ascending");
  }
}

void BathParams::validate() const {
  if (!std::isfinite(beta) || !(beta > 0.0)) throw DomainError("bath beta must be > 0");
  if (!std::isfinite(phi) || !(phi > 0.0)) throw DomainError("bath phi must be > 0");
  if (!std::isfinite(chi) || chi < 0.0) throw DomainError("bath chi must be >= 0");
}

LevelLadder ladder_analytic(HalfInt r, double c_ref, double omega, double kappa) {
  if (r.twice() < 0) throw DomainError("ladder r must be >= 0");
  if (!(c_ref > 0.0)) throw DomainError("ladder c_ref must be > 0");
  if (!(omega > 0.0)) throw DomainError("ladder omega must be > 0");
  if (!(kappa >= 0.0)) throw DomainError("ladder kappa must be >= 0");
  LevelLadder ladder;
  ladder.source = LadderSource::analytic;
  const double step = kappa / std::sqrt(c_ref);
  for (std::int64_t k = 0; k <= r.twice(); ++k) {
    const double j = (HalfInt::from_int(k) - r).value();
    ladder.omegas.push_back(omega * (1.0 + j * step));
  }
  if (!(ladder.ground() > 0.0)) {
    throw DomainError("analytic ladder has non-positive ground level; reduce kappa*sqrt(r/c_ref)");
  }
  return ladder;
}

LevelLadder ladder_from_spectrum(const EigenSolution& solution, double omega) {
  if (!solution.j_label(0)) {
    throw DomainError("spectral ladder needs a full block (dim = 2r+1, c >= r)");
  }
  const double c = solution.block.c.value();
  if (!(c > 0.0)) throw DomainError("spectral ladder needs c > 0");
  if (!(omega > 0.0)) throw DomainError("ladder omega must be > 0");
  LevelLadder ladder;
  ladder.source = LadderSource::spectral;
  ladder.omegas.reserve(solution.dim());
  for (double lambda : solution.eigenvalues) ladder.omegas.push_back(omega * lambda / c);
  for (double w : ladder.omegas) {
    if (!(w > 0.0)) throw DomainError("spectral ladder has a non-positive level");
  }
  return ladder;
}

double planck_occupation(double omega, double beta) {
  const double x = omega * beta;
  if (!(x > 0.0)) throw DomainError("Planck occupation needs omega*beta > 0");
  return 1.0 / std::expm1(x);
}

double first_order_loss(double n, double omega, const BathParams& bath) {
  return bath.phi * (n * std::exp(omega * bath.beta) - (1.0 + n));
}

double second_order_loss(std::size_t l, std::span<const double> occupations,
                         const LevelLadder& ladder, const BathParams& bath) {
  if (occupations.size() != ladder.size() || l >= ladder.size()) {
    throw DomainError("occupation vector does not match the ladder");
  }
  if (bath.chi == 0.0) return 0.0;
  const double nl = occupations[l];
  double sum = 0.0;
  for (std::size_t j = 0; j < ladder.size(); ++j) {
    const double nj = occupations[j];
    sum += nl * (1.0 + nj) * std::exp((ladder.omegas[l] - ladder.omegas[j]) * bath.beta) -
           nj * (1.0 + nl);
  }
  return bath.chi * sum;
}

double pumped_occupation(double omega, double s, const BathParams& bath, double eta, double A) {
  const double denom = A * std::exp(omega * bath.beta) - 1.0;
  if (!(denom > 0.0)) {
    throw DomainError("pumped occupation pole: chemical potential reached the level energy");
  }
  return (1.0 + s / (bath.phi + bath.chi * eta)) / denom;
}

double amplification_factor(std::span<const double> occupations, const LevelLadder& ladder,
                            const BathParams& bath, double eta) {
  double x = 0.0;
  for (std::size_t j = 0; j < ladder.size(); ++j) {
    x += (1.0 + occupations[j]) * std::exp(-ladder.omegas[j] * bath.beta);
  }
  return (bath.phi + bath.chi * x) / (bath.phi + bath.chi * eta);
}

double amplification_factor_from_transfer(double S, const BathParams& bath, double eta) {
  return 1.0 - bath.chi * S / (bath.phi * (bath.phi + bath.chi * eta));
}

double amplification_factor_phi_eta_variant(double S, const BathParams& bath, double eta) {
  return 1.0 - bath.chi / (bath.phi + eta * bath.phi) * (S / bath.phi);
}

namespace {

double boltzmann_sum(const LevelLadder& ladder, double beta) {
  double sum = 0.0;
  for (double w : ladder.omegas) sum += std::exp(-w * beta);
  return sum;
}

}  // namespace

double excitation_transfer_supply(double s, const LevelLadder& ladder, const BathParams& bath) {
  return s * boltzmann_sum(ladder, bath.beta);
}

double excitation_transfer_exchange(std::span<const double> occupations,
                                    const LevelLadder& ladder, const BathParams& bath) {
  double sum = 0.0;
  for (std::size_t j = 0; j < ladder.size(); ++j) {
    sum += occupations[j] - (1.0 + occupations[j]) * std::exp(-ladder.omegas[j] * bath.beta);
  }
  return bath.phi * sum;
}

double chemical_potential(double A, double beta) {
  if (!(A > 0.0) || A > 1.0) {
    throw DomainError("amplification factor outside (0, 1] gives a negative or undefined "
                      "chemical potential");
  }
  return -std::log(A) / beta;
}

std::vector<double> stationarity_residuals(std::span<const double> occupations,
                                           const LevelLadder& ladder, const BathParams& bath,
                                           const PumpParams& pump) {
  std::vector<double> out(ladder.size());
  for (std::size_t l = 0; l < ladder.size(); ++l) {
    const double l1 = first_order_loss(occupations[l], ladder.omegas[l], bath);
    const double l2 = second_order_loss(l, occupations, ladder, bath);
    out[l] = std::fabs(pump.p - l1 - l2 - pump.Q);
  }
  return out;
}

namespace {

// The stationarity conditions as a function of the total eta alone.
// With x = 1 - A = chi S / (phi (phi + chi eta)), level l holds
// g / (expm1(omega_l beta) - e^{omega_l beta} x), g = 1 + s / (phi + chi eta).
//
// The unknown is delta = eta - base, where base is the condensation pole
// when it is positive and 0 otherwise. Near the pole the ground-level
// denominator equals expm1(omega_{-r} beta) chi delta / (phi + chi eta), which
// keeps full relative precision where the direct difference cancels.
class EtaEquation {
 public:
  EtaEquation(const LevelLadder& ladder, const BathParams& bath, double s)
      : ladder_(ladder), bath_(bath), s_(s) {
    S_ = excitation_transfer_supply(s, ladder, bath);
    for (double w : ladder.omegas) {
      expm1_.push_back(std::expm1(w * bath.beta));
      exp_.push_back(std::exp(w * bath.beta));
    }
    if (bath.chi > 0.0 && S_ > 0.0) {
      // phi + chi eta at the pole, where e^{omega_{-r} beta} x = expm1(omega_{-r} beta).
      const double p_pole = bath.chi * S_ / (bath.phi * -std::expm1(-ladder.ground() * bath.beta));
      const double eta_pole = (p_pole - bath.phi) / bath.chi;
      if (eta_pole > 0.0) {
        pole_active_ = true;
        base_ = eta_pole;
        p_base_ = p_pole;
      }
    }
    if (!pole_active_) p_base_ = bath.phi;
  }

  double S() const { return S_; }
  double base() const { return base_; }
  double eta(double delta) const { return base_ + delta; }

  double one_minus_A(double delta) const {
    return bath_.chi * S_ / (bath_.phi * denominator_p(delta));
  }

  // Fills occupations; returns false at or below the pole.
  bool occupations(double delta, std::vector<double>& out) const {
    const double P = denominator_p(delta);
    const double x = bath_.chi * S_ / (bath_.phi * P);
    const double g = 1.0 + s_ / P;
    out.resize(ladder_.size());
    for (std::size_t l = 0; l < ladder_.size(); ++l) {
      const double denom = pole_active_ && l == 0
                               ? expm1_[l] * bath_.chi * delta / P
                               : expm1_[l] - exp_[l] * x;
      if (!(denom > 0.0)) return false;
      out[l] = g / denom;
    }
    return true;
  }

  // sum_l n_l - eta, +inf at or below the pole. Strictly decreasing in delta.
  double excess(double delta, std::vector<double>& scratch) const {
    if (!occupations(delta, scratch)) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (double n : scratch) sum += n;
    return sum - eta(delta);
  }

 private:
  // phi + chi eta, accumulated from the base so the pole offset stays exact.
  double denominator_p(double delta) const { return p_base_ + bath_.chi * delta; }

  const LevelLadder& ladder_;
  const BathParams& bath_;
  double s_;
  double S_ = 0.0;
  bool pole_active_ = false;
  double base_ = 0.0;
  double p_base_ = 0.0;
  std::vector<double> expm1_;
  std::vector<double> exp_;
};

std::string bracket_text(double lo, double hi) {
  std::ostringstream os;
  os.precision(17);
  os << "[" << lo << ", " << hi << "]";
  return os.str();
}

}  // namespace

SteadyStateSolution solve_steady_state(const LevelLadder& ladder, const BathParams& bath,
                                       const PumpParams& pump, const SolverOptions& options) {
  ladder.validate();
  bath.validate();
  const double s = pump.s();
  if (!(s >= 0.0) || pump.p < 0.0 || pump.Q < 0.0) {
    throw DomainError("steady state needs p >= 0, Q >= 0 and s = p - Q >= 0");
  }
  if (bath.chi > 0.0 && ladder.degenerate()) {
    throw DomainError("degenerate ladder with chi > 0: the non-condensate sum B diverges");
  }

  const EtaEquation equation(ladder, bath, s);
  std::vector<double> scratch;

  // Bisection on delta = eta - base over (lo, hi].
  double lo = 0.0;
  double hi = std::max(1.0, 2.0 * (1.0 + s / bath.phi) * thermal_total(ladder, bath.beta));
  int doublings = 0;
  while (!(equation.excess(hi, scratch) < 0.0)) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 2000 || !std::isfinite(hi)) {
      throw ConvergenceError("no root of the occupancy equation in the admissible bracket " +
                             bracket_text(equation.eta(lo), equation.eta(hi)));
    }
  }

  int iterations = 0;
  while (iterations < options.max_iterations) {
    const double mid = lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;
    ++iterations;
    if (equation.excess(mid, scratch) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  // Pick the bracket end with the smaller imbalance.
  const double f_lo = std::fabs(equation.excess(lo, scratch));
  const double f_hi = std::fabs(equation.excess(hi, scratch));
  const double delta = f_lo < f_hi ? lo : hi;
  const double eta_root = equation.eta(delta);

  SteadyStateSolution sol;
  sol.iterations = iterations;
  if (!equation.occupations(delta, sol.occupations)) {
    throw ConvergenceError("steady-state root landed on the condensation pole " +
                           bracket_text(equation.eta(lo), equation.eta(hi)));
  }
  for (double n : sol.occupations) sol.eta += n;
  sol.n_c = sol.occupations.front();
  sol.n_n = 0.0;
  for (std::size_t l = 1; l < sol.occupations.size(); ++l) sol.n_n += sol.occupations[l];

  const double x = equation.one_minus_A(delta);
  sol.A = 1.0 - x;
  sol.mu = -std::log1p(-x) / bath.beta;
  sol.S_supply = equation.S();
  sol.S_exchange = excitation_transfer_exchange(sol.occupations, ladder, bath);
  sol.residuals = stationarity_residuals(sol.occupations, ladder, bath, pump);
  sol.max_residual = *std::max_element(sol.residuals.begin(), sol.residuals.end());
  sol.eta_mismatch = std::fabs(eta_root - sol.eta) / sol.eta;

  const double residual_scale = std::max(pump.p, bath.phi);
  if (!(sol.max_residual < options.residual_tol * residual_scale) ||
      !(sol.eta_mismatch < options.eta_tol)) {
    std::ostringstream os;
    os.precision(6);
    os << "steady state did not converge after " << iterations
       << " bisection steps: max residual " << sol.max_residual << ", eta mismatch "
       << sol.eta_mismatch << ", bracket " << bracket_text(equation.eta(lo), equation.eta(hi));
    throw ConvergenceError(os.str());
  }
  return sol;
}

std::pair<double, double> condensate_split(const SteadyStateSolution& solution) {
  return {solution.n_c, solution.n_n};
}

double thermal_total(const LevelLadder& ladder, double beta) {
  double sum = 0.0;
  for (double w : ladder.omegas) sum += planck_occupation(w, beta);
  return sum;
}

double level_sum_B(const LevelLadder& ladder, double beta) {
  if (ladder.degenerate()) {
    throw DomainError("degenerate ladder: B diverges");
  }
  double sum = 0.0;
  for (std::size_t j = 1; j < ladder.size(); ++j) {
    sum += 1.0 / std::expm1((ladder.omegas[j] - ladder.ground()) * beta);
  }
  return sum;
}

NoncondensateBound noncondensate_bound(double s, const BathParams& bath,
                                       const LevelLadder& ladder) {
  bath.validate();
  if (!(s >= 0.0)) throw DomainError("non-condensate bound needs s >= 0");
  NoncondensateBound out;
  out.B = level_sum_B(ladder, bath.beta);
  const double B = out.B;
  if (bath.chi == 0.0) {
    out.bound = B * (1.0 + s / bath.phi);
    out.asymptote = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  // chi n^2 + (phi - B chi) n - B (phi + s) <= 0; take the positive root.
  const double b = bath.phi - B * bath.chi;
  const double c = -B * (bath.phi + s);
  const double disc = std::sqrt(b * b - 4.0 * bath.chi * c);
  // Stable form of (-b + disc) / (2 chi).
  out.bound = b > 0.0 ? (2.0 * -c) / (b + disc) : (-b + disc) / (2.0 * bath.chi);
  out.asymptote = std::sqrt(B * s / bath.chi);
  return out;
}

EffectiveFrequency fit_effective_frequency(double s, double eta, double eta_T,
                                           const LevelLadder& ladder, const BathParams& bath) {
  if (!(s > 0.0) || !(eta > eta_T)) {
    throw DomainError("effective frequency fit needs s > 0 and eta > eta_T");
  }
  const double levels = static_cast<double>(ladder.size());
  EffectiveFrequency out;
  out.omega_bar = std::log1p(levels * s / (bath.phi * (eta - eta_T))) / bath.beta;
  out.in_range = out.omega_bar >= ladder.ground() && out.omega_bar <= ladder.top();
  return out;
}

double total_occupancy_prediction(double s, const BathParams& bath, const LevelLadder& ladder,
                                  double eta_T, double omega_bar) {
  if (omega_bar < ladder.ground() || omega_bar > ladder.top()) {
    throw DomainError("effective frequency outside [omega_{-r}, omega_r]");
  }
  return eta_T + static_cast<double>(ladder.size()) * s / (bath.phi * std::expm1(omega_bar * bath.beta));
}

double condensate_prediction(double s, double eta_T, double eta_n, const BathParams& bath,
                             const LevelLadder& ladder, double omega_bar) {
  return eta_T - eta_n +
         static_cast<double>(ladder.size()) * s / (bath.phi * std::expm1(omega_bar * bath.beta));
}

double eta_T_estimate(std::size_t levels, double omega_bar, double beta) {
  return static_cast<double>(levels) / std::expm1(omega_bar * beta);
}

ThresholdEstimate threshold(double eta_T, double B, const BathParams& bath) {
  if (!(eta_T > 0.0)) throw DomainError("threshold needs eta_T > 0");
  if (!(bath.chi > 0.0)) throw DomainError("threshold needs chi > 0");
  ThresholdEstimate out;
  out.s0 = bath.phi / (eta_T * eta_T) * ((eta_T + 2.0 * bath.phi / bath.chi) * (2.0 * B - eta_T));
  out.positive = out.s0 > 0.0;
  return out;
}

AboveThresholdDispersion above_threshold_dispersion(double s, const BathParams& bath,
                                                    double eta_T, double r) {
  if (!(s > 0.0)) throw DomainError("above-threshold dispersion needs s > 0");
  if (!(r >= 0.0)) throw DomainError("above-threshold dispersion needs r >= 0");
  AboveThresholdDispersion out;
  out.n_o = s * eta_T / bath.phi;
  // Invert n_o = (2/3)c + (1/3)sqrt(3r^2 + c^2) on the branch 3 n_o - 2c >= 0.
  out.c = 2.0 * out.n_o - std::sqrt(out.n_o * out.n_o + r * r);
  const auto var = ground_variance_formula(r, out.c, out.n_o);
  out.sigma2 = var.sigma2;
  out.in_regime = var.in_regime;
  return out;
}

std::vector<SweepPoint> run_sweep(const LevelLadder& ladder, const BathParams& bath,
                                  std::span<const double> s_grid, double Q, int workers) {
  std::vector<SweepPoint> points(s_grid.size());
  double eta_T = std::numeric_limits<double>::quiet_NaN();
  try {
    eta_T = thermal_total(ladder, bath.beta);
  } catch (const std::exception&) {
  }

  auto solve_one = [&](std::size_t i) {
    SweepPoint& pt = points[i];
    pt.s = s_grid[i];
    try {
      pt.solution = solve_steady_state(ladder, bath, PumpParams::from_supply(pt.s, Q));
      if (pt.s > 0.0) {
        pt.omega_bar = fit_effective_frequency(pt.s, pt.solution->eta, eta_T, ladder, bath);
      }
    } catch (const ConvergenceError& err) {
      pt.status = std::string("not_converged: ") + err.what();
    } catch (const std::exception& err) {
      pt.status = std::string("error: ") + err.what();
    }
  };

  const std::size_t n_workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, points.size() ? points.size() : 1);
  if (n_workers == 1) {
    for (std::size_t i = 0; i < points.size(); ++i) solve_one(i);
    return points;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < n_workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < points.size(); i = next++) solve_one(i);
    });
  }
  for (auto& t : pool) t.join();
  return points;
}

double condensation_knee(std::span<const SweepPoint> sweep) {
  std::vector<std::pair<double, double>> curve;  // (ln s, n_c / eta)
  for (const auto& pt : sweep) {
    if (pt.s > 0.0 && pt.solution) {
      curve.emplace_back(std::log(pt.s), pt.solution->n_c / pt.solution->eta);
    }
  }
  std::sort(curve.begin(), curve.end());
  if (curve.size() < 3) throw DomainError("knee detection needs at least three positive-s points");
  double best_slope = -std::numeric_limits<double>::infinity();
  double knee = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double dx = curve[i].first - curve[i - 1].first;
    if (!(dx > 0.0)) continue;
    const double slope = (curve[i].second - curve[i - 1].second) / dx;
    if (slope > best_slope) {
      best_slope = slope;
      knee = std::exp(0.5 * (curve[i].first + curve[i - 1].first));
    }
  }
  return knee;
}

std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 1 || !(hi >= lo)) throw DomainError("grid needs points >= 1 and hi >= lo");
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    out[static_cast<std::size_t>(i)] =
        points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (points - 1);
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0)) throw DomainError("log grid needs lo > 0");
  auto out = linear_grid(std::log(lo), std::log(hi), points);
  for (double& v : out) v = std::exp(v);
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace tcsim

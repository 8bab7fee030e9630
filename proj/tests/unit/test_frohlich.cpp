#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "tcsim/errors.hpp"
#include "tcsim/frohlich.hpp"

using namespace tcsim;

namespace {

// r = 5 ladder with spacing 0.01 around omega = 1.
LevelLadder reference_ladder() { return ladder_analytic(HalfInt::from_int(5), 1.0, 1.0, 0.01); }
BathParams reference_bath() { return {1.0, 1.0, 0.1}; }

// Stationarity written out from the rate definitions, independent of the
// library's loss helpers.
double worst_residual(const std::vector<double>& n, const LevelLadder& ladder, const BathParams& b,
                      const PumpParams& pump) {
  double worst = 0.0;
  for (std::size_t l = 0; l < n.size(); ++l) {
    const double wl = ladder.omegas[l];
    double l1 = b.phi * (n[l] * std::exp(wl * b.beta) - (1.0 + n[l]));
    double l2 = 0.0;
    for (std::size_t j = 0; j < n.size(); ++j) {
      l2 += n[l] * (1.0 + n[j]) * std::exp((wl - ladder.omegas[j]) * b.beta) - n[j] * (1.0 + n[l]);
    }
    l2 *= b.chi;
    worst = std::max(worst, std::fabs(pump.p - l1 - l2 - pump.Q));
  }
  return worst;
}

double bose(double x) { return 1.0 / std::expm1(x); }

}  // namespace

TEST_CASE("analytic ladders") {
  const auto flat = ladder_analytic(HalfInt::from_int(2), 50.0, 1.3, 0.0);
  CHECK(flat.size() == 5);
  for (double w : flat.omegas) CHECK(w == 1.3);
  CHECK(flat.degenerate());

  const auto l = ladder_analytic(HalfInt::from_int(1), 100.0, 1.0, 0.1);
  REQUIRE(l.size() == 3);
  CHECK(l.omegas[0] == doctest::Approx(0.99).epsilon(1e-15));
  CHECK(l.omegas[1] == 1.0);
  CHECK(l.omegas[2] == doctest::Approx(1.01).epsilon(1e-15));
  CHECK_FALSE(l.degenerate());

  CHECK_THROWS_AS(ladder_analytic(HalfInt::from_int(20), 1.0, 1.0, 0.1), DomainError);
  CHECK_THROWS_AS(ladder_analytic(HalfInt::from_int(1), 0.0, 1.0, 0.1), DomainError);
}

TEST_CASE("spectral ladders") {
  const auto flat = ladder_from_spectrum(diagonalize(build_block({HalfInt::from_int(3),
                                                                   HalfInt::from_int(40), 0.0})), 2.0);
  for (double w : flat.omegas) CHECK(w == doctest::Approx(2.0).epsilon(1e-15));

  // Level spacing follows the linear block spectrum: omega * 2 kappa sqrt(n0) / c.
  const double kappa = 0.02, c = 400.0;
  const auto sol = diagonalize(build_block({HalfInt::from_int(5), HalfInt::from_int(400), kappa}));
  const auto lad = ladder_from_spectrum(sol, 1.0);
  REQUIRE(lad.size() == 11);
  const double n0 = photon_statistics(sol, 0).n0;
  const double expect = 2.0 * kappa * std::sqrt(n0) / c;
  for (std::size_t j = 1; j < lad.size(); ++j) {
    CHECK(std::fabs((lad.omegas[j] - lad.omegas[j - 1]) - expect) / expect < 0.03);
  }
  CHECK(lad.source == LadderSource::spectral);
  CHECK_THROWS_AS(ladder_from_spectrum(diagonalize(build_block({HalfInt::from_int(5),
                                                                HalfInt::from_int(2), 1.0})), 1.0),
                  DomainError);
}

TEST_CASE("Planck occupation") {
  CHECK(planck_occupation(std::log(2.0), 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(planck_occupation(1000.0, 1.0) == 0.0);
  CHECK(planck_occupation(0.01, 1.0) == doctest::Approx(99.500833).epsilon(1e-7));
  CHECK_THROWS_AS(planck_occupation(0.0, 1.0), DomainError);
}

TEST_CASE("first-order loss") {
  const BathParams b{1.3, 1.0, 0.0};
  CHECK(std::fabs(first_order_loss(planck_occupation(0.7, 1.3), 0.7, b)) < 1e-14);
  CHECK(first_order_loss(0.0, 0.7, b) == -1.0);
  const double slope = (first_order_loss(3.0, 0.7, b) - first_order_loss(2.0, 0.7, b));
  CHECK(slope == doctest::Approx(std::expm1(0.7 * 1.3)).epsilon(1e-13));
}

TEST_CASE("second-order loss") {
  const auto ladder = reference_ladder();
  const BathParams b{0.8, 1.0, 0.3};
  std::vector<double> planck;
  for (double w : ladder.omegas) planck.push_back(planck_occupation(w, b.beta));
  for (std::size_t l = 0; l < ladder.size(); ++l) {
    CHECK(std::fabs(second_order_loss(l, planck, ladder, b)) < 1e-13);
  }
  const auto flat = ladder_analytic(HalfInt::from_twice(1), 1.0, 1.0, 0.0);
  const std::vector<double> occ{2.0, 0.0};
  CHECK(second_order_loss(0, occ, flat, b) == doctest::Approx(2.0 * b.chi));
  CHECK(second_order_loss(1, occ, flat, b) == doctest::Approx(-2.0 * b.chi));
  const BathParams no_chi{0.8, 1.0, 0.0};
  CHECK(second_order_loss(0, occ, flat, no_chi) == 0.0);
}

TEST_CASE("pumped occupation") {
  const BathParams b{1.0, 1.0, 0.0};
  CHECK(pumped_occupation(0.9, 0.0, b, 5.0, 1.0) == doctest::Approx(bose(0.9)).epsilon(1e-15));
  CHECK(pumped_occupation(0.9, 1.0, b, 5.0, 1.0) == doctest::Approx(2.0 * bose(0.9)).epsilon(1e-15));
  CHECK_THROWS_AS(pumped_occupation(0.9, 1.0, b, 5.0, std::exp(-0.9)), DomainError);
  CHECK_THROWS_AS(pumped_occupation(0.9, 1.0, b, 5.0, 0.3), DomainError);
}

TEST_CASE("amplification factor and excitation transfer") {
  const auto ladder = reference_ladder();
  const auto b = reference_bath();
  std::vector<double> planck;
  double eta = 0.0;
  for (double w : ladder.omegas) {
    planck.push_back(planck_occupation(w, b.beta));
    eta += planck.back();
  }
  CHECK(amplification_factor(planck, ladder, b, eta) == doctest::Approx(1.0).epsilon(1e-14));
  const BathParams no_chi{1.0, 1.0, 0.0};
  const std::vector<double> junk(11, 3.0);
  CHECK(amplification_factor(junk, ladder, no_chi, 33.0) == 1.0);

  CHECK(excitation_transfer_supply(0.0, ladder, b) == 0.0);
  CHECK(std::fabs(excitation_transfer_exchange(planck, ladder, b)) < 1e-13);
  const auto flat = ladder_analytic(HalfInt::from_int(2), 1.0, 1.5, 0.0);
  CHECK(excitation_transfer_supply(2.0, flat, b) == doctest::Approx(2.0 * 5.0 * std::exp(-1.5)).epsilon(1e-15));

  CHECK(amplification_factor_phi_eta_variant(0.0, b, 4.0) == 1.0);
  CHECK(amplification_factor_phi_eta_variant(1.0, b, 4.0) !=
        doctest::Approx(amplification_factor_from_transfer(1.0, b, 4.0)));
}

TEST_CASE("chemical potential") {
  CHECK(chemical_potential(1.0, 2.0) == 0.0);
  CHECK(chemical_potential(std::exp(-0.3), 1.0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK_THROWS_AS(chemical_potential(1.1, 1.0), DomainError);
  CHECK_THROWS_AS(chemical_potential(0.0, 1.0), DomainError);
}

TEST_CASE("equilibrium recovery on random ladders") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> twice_r(0, 12);
  std::uniform_real_distribution<double> spacing(0.001, 0.05), omega(0.5, 2.0), beta(0.2, 5.0),
      phi(0.1, 10.0), chi(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ladder = ladder_analytic(HalfInt::from_twice(twice_r(rng)), 1.0, omega(rng), spacing(rng));
    const BathParams b{beta(rng), phi(rng), trial % 4 == 0 ? 0.0 : chi(rng)};
    if (ladder.degenerate() && b.chi > 0.0) continue;
    const auto sol = solve_steady_state(ladder, b, PumpParams::from_supply(0.0));
    CHECK(sol.A == 1.0);
    CHECK(sol.mu == 0.0);
    for (std::size_t l = 0; l < ladder.size(); ++l) {
      const double p = planck_occupation(ladder.omegas[l], b.beta);
      CHECK(std::fabs(sol.occupations[l] - p) <= 1e-12 * p);
      CHECK(sol.residuals[l] < 1e-12);
    }
    CHECK(worst_residual(sol.occupations, ladder, b, {0.0, 0.0}) < 1e-12);
    const auto [nc, nn] = condensate_split(sol);
    CHECK(nc == doctest::Approx(planck_occupation(ladder.ground(), b.beta)).epsilon(1e-12));
    CHECK(std::fabs(nc + nn - sol.eta) <= 1e-12 * sol.eta);
  }
}

TEST_CASE("chi = 0 closed form") {
  const auto ladder = reference_ladder();
  const BathParams b{1.0, 2.0, 0.0};
  for (double s : {0.0, 0.01, 1.0, 37.0, 1e4}) {
    const auto sol = solve_steady_state(ladder, b, PumpParams::from_supply(s, 0.5));
    CHECK(sol.A == 1.0);
    for (std::size_t l = 0; l < ladder.size(); ++l) {
      const double expect = (1.0 + s / b.phi) * planck_occupation(ladder.omegas[l], b.beta);
      CHECK(std::fabs(sol.occupations[l] - expect) <= 1e-10 * expect);
    }
  }
  // A flat ladder is fine without the second-order channel.
  const auto flat = ladder_analytic(HalfInt::from_int(2), 1.0, 1.0, 0.0);
  const auto sol = solve_steady_state(flat, b, PumpParams::from_supply(3.0));
  CHECK(sol.occupations[0] == doctest::Approx(2.5 * bose(1.0)).epsilon(1e-12));
}

TEST_CASE("steady state above equilibrium") {
  const auto ladder = reference_ladder();
  const auto b = reference_bath();
  double last_eta = 0.0, last_frac = 0.0, last_mu = -1.0;
  for (double s : {0.1, 0.5, 1.0, 10.0, 100.0, 1e3, 1e4}) {
    const PumpParams pump = PumpParams::from_supply(s, 0.25);
    const auto sol = solve_steady_state(ladder, b, pump);
    CHECK(worst_residual(sol.occupations, ladder, b, pump) < 1e-8 * std::max(pump.p, b.phi));
    CHECK(sol.max_residual < 1e-8 * std::max(pump.p, b.phi));
    CHECK(sol.eta_mismatch < 1e-10);
    CHECK(sol.A > 0.0);
    CHECK(sol.A <= 1.0);
    CHECK(sol.mu >= 0.0);
    CHECK(sol.mu < ladder.ground());
    CHECK(std::fabs(sol.S_supply - sol.S_exchange) < 1e-8 * sol.S_supply);
    CHECK(sol.A == doctest::Approx(amplification_factor(sol.occupations, ladder, b, sol.eta)).epsilon(1e-12));
    CHECK(sol.A == doctest::Approx(amplification_factor_from_transfer(sol.S_supply, b, sol.eta)).epsilon(1e-12));
    // The direct formula cancels near the pole, so the ground level only
    // agrees to the conditioning of A e^{omega beta} - 1.
    for (std::size_t l = 0; l < ladder.size(); ++l) {
      CHECK(sol.occupations[l] ==
            doctest::Approx(pumped_occupation(ladder.omegas[l], s, b, sol.eta, sol.A)).epsilon(l == 0 ? 1e-8 : 1e-12));
    }
    const double frac = sol.n_c / sol.eta;
    CHECK(sol.eta > last_eta);
    CHECK(frac > last_frac);
    CHECK(sol.mu > last_mu);
    last_eta = sol.eta;
    last_frac = frac;
    last_mu = sol.mu;
    CHECK(sol.n_n <= noncondensate_bound(s, b, ladder).bound);
  }
  CHECK(last_frac > 0.9);
}

TEST_CASE("steady-state preconditions") {
  const auto b = reference_bath();
  CHECK_THROWS_AS(solve_steady_state(reference_ladder(), b, {1.0, 2.0}), DomainError);
  const auto flat = ladder_analytic(HalfInt::from_int(2), 1.0, 1.0, 0.0);
  CHECK_THROWS_AS(solve_steady_state(flat, b, PumpParams::from_supply(1.0)), DomainError);
  CHECK_THROWS_AS(BathParams({1.0, 0.0, 0.1}).validate(), DomainError);
  CHECK_THROWS_AS(BathParams({0.0, 1.0, 0.1}).validate(), DomainError);
  CHECK_THROWS_AS(BathParams({1.0, 1.0, -0.1}).validate(), DomainError);
}

TEST_CASE("non-condensate bound") {
  const auto ladder = reference_ladder();
  const auto b = reference_bath();
  const double B = level_sum_B(ladder, b.beta);
  double by_hand = 0.0;
  for (int j = 1; j <= 10; ++j) by_hand += bose(0.01 * j);
  CHECK(B == doctest::Approx(by_hand).epsilon(1e-13));
  CHECK(noncondensate_bound(0.0, b, ladder).bound == doctest::Approx(B).epsilon(1e-13));

  for (double s : {0.0, 3.0, 1e3, 1e6}) {
    const auto nb = noncondensate_bound(s, b, ladder);
    const double x = nb.bound;
    CHECK(x * (b.phi + b.chi * x) / (b.phi + b.chi * x + s) == doctest::Approx(B).epsilon(1e-12));
  }
  const auto far = noncondensate_bound(1e6, b, ladder);
  CHECK(std::fabs(far.bound / far.asymptote - 1.0) < 0.02);
  const double slope = std::log(far.bound / noncondensate_bound(1e3, b, ladder).bound) / std::log(1e3);
  CHECK(std::fabs(slope - 0.5) < 0.05);

  const BathParams no_chi{1.0, 1.0, 0.0};
  CHECK(noncondensate_bound(4.0, no_chi, ladder).bound == doctest::Approx(5.0 * B).epsilon(1e-13));
  CHECK(std::isnan(noncondensate_bound(4.0, no_chi, ladder).asymptote));
  CHECK_THROWS_AS(level_sum_B(ladder_analytic(HalfInt::from_int(1), 1.0, 1.0, 0.0), 1.0), DomainError);
}

TEST_CASE("threshold formula") {
  const BathParams b{1.0, 2.0, 0.5};
  const auto zero = threshold(4.0, 2.0, b);
  CHECK(zero.s0 == 0.0);
  CHECK_FALSE(zero.positive);
  const auto neg = threshold(4.0, 1.0, b);
  CHECK(neg.s0 < 0.0);
  CHECK_FALSE(neg.positive);
  const auto pos = threshold(4.0, 10.0, b);
  CHECK(pos.s0 == doctest::Approx((2.0 / 16.0) * (4.0 + 8.0) * 16.0));
  CHECK(pos.positive);
  const BathParams stiff{1.0, 2.0, 1e12};
  CHECK(threshold(4.0, 10.0, stiff).s0 == doctest::Approx((2.0 / 4.0) * 16.0).epsilon(1e-9));
  CHECK_THROWS_AS(threshold(4.0, 10.0, BathParams{1.0, 2.0, 0.0}), DomainError);

  CHECK(eta_T_estimate(11, std::log(2.0), 1.0) == doctest::Approx(11.0));
}

TEST_CASE("effective frequency and linear growth") {
  const auto ladder = reference_ladder();
  const auto b = reference_bath();
  const double eta_T = thermal_total(ladder, b.beta);
  double by_hand = 0.0;
  for (double w : ladder.omegas) by_hand += bose(w);
  CHECK(eta_T == doctest::Approx(by_hand).epsilon(1e-14));
  CHECK(total_occupancy_prediction(0.0, b, ladder, eta_T, 1.0) == eta_T);
  CHECK_THROWS_AS(total_occupancy_prediction(1.0, b, ladder, eta_T, 1.2), DomainError);

  const double B = level_sum_B(ladder, b.beta);
  const double s0 = threshold(eta_T, B, b).s0;

  // Fit at one reference point below threshold, then predict the rest.
  const auto ref = solve_steady_state(ladder, b, PumpParams::from_supply(s0 / 4.0));
  const auto fit = fit_effective_frequency(s0 / 4.0, ref.eta, eta_T, ladder, b);
  CHECK(fit.in_range);
  CHECK(total_occupancy_prediction(s0 / 4.0, b, ladder, eta_T, fit.omega_bar) ==
        doctest::Approx(ref.eta).epsilon(1e-12));
  for (int i = 0; i <= 10; ++i) {
    const double s = s0 / 2.0 * i / 10.0;
    const auto sol = solve_steady_state(ladder, b, PumpParams::from_supply(s));
    const double pred = total_occupancy_prediction(s, b, ladder, eta_T, fit.omega_bar);
    CHECK(std::fabs(pred - sol.eta) / sol.eta < 0.05);
  }

  // Far above threshold: calibrate at 10 s0, predict n_c at 100 s0.
  const auto cal = solve_steady_state(ladder, b, PumpParams::from_supply(10.0 * s0));
  const auto far_fit = fit_effective_frequency(10.0 * s0, cal.eta, eta_T, ladder, b);
  const auto far = solve_steady_state(ladder, b, PumpParams::from_supply(100.0 * s0));
  const double nc = condensate_prediction(100.0 * s0, eta_T, far.n_n, b, ladder, far_fit.omega_bar);
  CHECK(std::fabs(nc - far.n_c) / far.n_c < 0.10);

  // Equilibrium consistency and linearity of the prediction.
  const double p0 = planck_occupation(ladder.ground(), b.beta);
  CHECK(condensate_prediction(0.0, eta_T, eta_T - p0, b, ladder, 1.0) == doctest::Approx(p0));
  const double a = condensate_prediction(1.0, eta_T, 3.0, b, ladder, 1.0);
  const double c = condensate_prediction(2.0, eta_T, 3.0, b, ladder, 1.0);
  CHECK(c - a == doctest::Approx(11.0 / (b.phi * std::expm1(1.0))));

  // A flat ladder pins the effective frequency to the level.
  const auto flat = ladder_analytic(HalfInt::from_int(2), 1.0, 1.0, 0.0);
  const BathParams no_chi{1.0, 1.0, 0.0};
  const double flat_T = thermal_total(flat, 1.0);
  const auto fs = solve_steady_state(flat, no_chi, PumpParams::from_supply(2.0));
  const auto ff = fit_effective_frequency(2.0, fs.eta, flat_T, flat, no_chi);
  CHECK(ff.omega_bar == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("above-threshold dispersion") {
  const BathParams b{1.0, 1.0, 0.1};
  const auto one = above_threshold_dispersion(100.0, b, 6.0, 50.0);
  const auto two = above_threshold_dispersion(200.0, b, 6.0, 50.0);
  CHECK(one.n_o == doctest::Approx(600.0));
  CHECK(two.n_o == doctest::Approx(2.0 * one.n_o));
  // n_o = 1e4 with r = 7500 puts c at 7500, the r = c point.
  const auto rc = above_threshold_dispersion(1e4 / 6.0, b, 6.0, 7500.0);
  CHECK(rc.c == doctest::Approx(7500.0).epsilon(1e-12));
  CHECK(rc.sigma2 == doctest::Approx(1e4 / std::sqrt(12.0)).epsilon(1e-12));
  CHECK(rc.sigma2 == doctest::Approx(2886.8).epsilon(1e-4));
}

TEST_CASE("sweeps are ordered and worker-count independent") {
  const auto ladder = reference_ladder();
  const auto b = reference_bath();
  const auto grid = log_grid(0.1, 1e4, 25);
  const auto one = run_sweep(ladder, b, grid, 0.0, 1);
  const auto four = run_sweep(ladder, b, grid, 0.0, 4);
  REQUIRE(one.size() == grid.size());
  REQUIRE(four.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(one[i].s == grid[i]);
    CHECK(four[i].s == grid[i]);
    REQUIRE(one[i].solution.has_value());
    REQUIRE(four[i].solution.has_value());
    CHECK(one[i].solution->eta == four[i].solution->eta);
    CHECK(one[i].status == "ok");
  }
  const double knee = condensation_knee(one);
  CHECK(knee > 0.1);
  CHECK(knee < 1e4);
}

TEST_CASE("a failing sweep point does not abort the sweep") {
  const auto flat = ladder_analytic(HalfInt::from_int(1), 1.0, 1.0, 0.0);
  const BathParams b{1.0, 1.0, 0.2};
  const std::vector<double> grid{0.0, 1.0, 2.0};
  const auto pts = run_sweep(flat, b, grid, 0.0, 2);
  REQUIRE(pts.size() == 3);
  for (const auto& p : pts) {
    CHECK_FALSE(p.solution.has_value());
    CHECK(p.status.rfind("error:", 0) == 0);
  }
}

TEST_CASE("grids") {
  const auto lin = linear_grid(0.0, 1.0, 5);
  CHECK(lin == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  const auto lg = log_grid(1e-3, 1e3, 7);
  REQUIRE(lg.size() == 7);
  CHECK(lg.front() == 1e-3);
  CHECK(lg.back() == 1e3);
  CHECK(lg[3] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(linear_grid(2.0, 2.0, 1) == std::vector<double>{2.0});
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 4), DomainError);
  CHECK_THROWS_AS(linear_grid(1.0, 0.0, 4), DomainError);
}

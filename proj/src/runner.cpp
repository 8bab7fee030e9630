#include "tcsim/runner.hpp"

#include <zlib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <optional>

#include "json.hpp"

#include "tcsim/csv.hpp"
#include "tcsim/errors.hpp"
#include "tcsim/frohlich.hpp"
#include "tcsim/tc_spectrum.hpp"
#include "tcsim/thermal_ensemble.hpp"

namespace tcsim {

namespace {

namespace fs = std::filesystem;

// Plain `key = value` report lines.
class Report {
 public:
  void section(const std::string& name) { text_ += "[" + name + "]\n"; }
  void add(const std::string& key, double v) { text_ += key + " = " + format_number(v) + "\n"; }
  void add(const std::string& key, const std::string& v) { text_ += key + " = " + v + "\n"; }
  void add(const std::string& key, const char* v) { add(key, std::string(v)); }
  void add(const std::string& key, bool v) { add(key, v ? "true" : "false"); }
  void add(const std::string& key, std::size_t v) { add(key, std::to_string(v)); }
  void blank() { text_ += "\n"; }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

class Context {
 public:
  explicit Context(const RunConfig& cfg) : cfg_(cfg), dir_(cfg.output_dir) {
    fs::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    write_text_file(dir_ / name, content);
    OutputFile f;
    f.name = name;
    f.bytes = content.size();
    const auto crc = ::crc32(0L, reinterpret_cast<const Bytef*>(content.data()),
                             static_cast<uInt>(content.size()));
    char hex[16];
    std::snprintf(hex, sizeof hex, "%08lx", static_cast<unsigned long>(crc));
    f.crc32 = hex;
    result.files.push_back(std::move(f));
  }

  void flag(std::string message) { result.flags.push_back(std::move(message)); }
  void error(std::string message) { result.errors.push_back(std::move(message)); }

  void residual(double r) {
    residual_min_ = std::min(residual_min_, r);
    residual_max_ = std::max(residual_max_, r);
    ++residual_count_;
  }

  const RunConfig& cfg() const { return cfg_; }
  RunResult result;

  nlohmann::json residual_summary() const {
    if (residual_count_ == 0) return nullptr;
    return {{"points", residual_count_}, {"min", residual_min_}, {"max", residual_max_}};
  }

  fs::path dir() const { return dir_; }

 private:
  const RunConfig& cfg_;
  fs::path dir_;
  double residual_min_ = std::numeric_limits<double>::infinity();
  double residual_max_ = 0.0;
  std::size_t residual_count_ = 0;
};

std::string block_tag(HalfInt r, HalfInt c) {
  return "r" + format_number(r.value()) + "_c" + format_number(c.value());
}

void run_spectrum(Context& ctx) {
  const auto& sc = ctx.cfg().spectrum;
  CsvBuilder table({"r", "c", "kappa", "k", "lambda", "n0", "sigma2"});
  Report summary;
  for (HalfInt r : sc.r) {
    for (HalfInt c : sc.c) {
      const BlockIndex idx{r, c, sc.kappa};
      const std::string tag = block_tag(r, c);
      EigenSolution sol;
      try {
        sol = diagonalize(build_block(idx));
      } catch (const std::exception& err) {
        ctx.error("spectrum " + tag + ": " + err.what());
        continue;
      }
      const std::size_t dim = sol.dim();
      for (std::size_t k = 0; k < dim; ++k) {
        const auto st = photon_statistics(sol, k);
        table.cell(r.value()).cell(c.value()).cell(sc.kappa).cell(static_cast<long long>(k));
        table.cell(sol.eigenvalues[k]).cell(st.n0).cell(st.sigma2);
        table.end_row();
      }

      const auto chosen = photon_statistics(sol, sc.state);
      CsvBuilder dist({"n", "p_n"});
      for (std::size_t i = 0; i < chosen.distribution.size(); ++i) {
        dist.cell(static_cast<long long>(chosen.n_min + static_cast<std::int64_t>(i)))
            .cell(chosen.distribution[i]);
        dist.end_row();
      }
      ctx.write("distribution_" + tag + ".csv", dist.text());

      // Invariant checks.
      double sym = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        sym = std::max(sym, std::fabs(sol.eigenvalues[k] + sol.eigenvalues[dim - 1 - k] -
                                      2.0 * c.value()));
      }
      double gram = 0.0;
      if (dim <= 2000) {
        for (std::size_t a = 0; a < dim; ++a) {
          for (std::size_t b = a; b < dim; ++b) {
            double dot = 0.0;
            const auto va = sol.state(a);
            const auto vb = sol.state(b);
            for (std::size_t i = 0; i < dim; ++i) dot += va[i] * vb[i];
            gram = std::max(gram, std::fabs(dot - (a == b ? 1.0 : 0.0)));
          }
        }
      }
      const double sym_tol = 1e-9 * std::max(1.0, std::fabs(c.value()));
      if (sym > sym_tol) ctx.flag("spectrum " + tag + ": spectrum symmetry error " + format_number(sym));
      if (gram > 1e-10) ctx.flag("spectrum " + tag + ": orthonormality error " + format_number(gram));

      const auto ground = photon_statistics(sol, 0);
      const auto pred = predicted_ground_mean(idx);
      summary.section("block " + tag);
      summary.add("r", r.value());
      summary.add("c", c.value());
      summary.add("kappa", sc.kappa);
      summary.add("dim", dim);
      summary.add("symmetry_max_error", sym);
      summary.add("orthonormality_max_error", gram);
      summary.add("ground_lambda", sol.eigenvalues.front());
      summary.add("ground_n0", ground.n0);
      summary.add("ground_sigma2", ground.sigma2);
      summary.add("ground_m_mean", ground.m_mean);
      summary.add("predicted_n0_full", pred.full);
      summary.add("predicted_n0_asymptotic", pred.asymptotic);
      try {
        const auto var = predicted_ground_variance(idx, pred.asymptotic);
        summary.add("predicted_sigma2", var.sigma2);
        summary.add("predicted_sigma2_in_regime", var.in_regime);
      } catch (const DomainError& err) {
        summary.add("predicted_sigma2", std::string("undefined: ") + err.what());
      }
      if (ground.sigma2 > 0.0) {
        const auto gauss = gaussian_profile(ground.n0, ground.sigma2, sol.basis);
        double dev = 0.0, peak = 0.0;
        for (std::size_t i = 0; i < gauss.size(); ++i) {
          dev = std::max(dev, std::fabs(gauss[i] - ground.distribution[i]));
          peak = std::max(peak, ground.distribution[i]);
        }
        summary.add("gaussian_max_deviation_over_peak", dev / peak);
      }
      if (sc.kappa > 0.0) summary.add("q0", effective_ground_eigenvalue(sol));
      if (sol.j_label(0) && dim >= 2) {
        const auto fit = fit_spectrum_slope(sol);
        summary.add("ladder_slope", fit.slope);
        summary.add("ladder_slope_predicted", 2.0 * sc.kappa * std::sqrt(ground.n0));
        summary.add("ladder_r_squared", fit.r_squared);
      }
      summary.add("distribution_state", sc.state);
      summary.blank();
    }
  }
  ctx.write("spectrum.csv", table.text());
  ctx.write("spectrum_summary.txt", summary.text());
}

void run_thermal(Context& ctx) {
  const auto& tc = ctx.cfg().thermal;
  CsvBuilder table({"N", "beta", "m_mean", "m_var", "r2_mean", "r2_var", "sigma_r2",
                    "oracle_m_mean", "oracle_m_var", "oracle_r2_mean", "oracle_r2_var",
                    "oracle_sigma_r2"});
  auto close = [](double a, double b) {
    return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(b));
  };
  for (int n : tc.molecules) {
    for (double beta : tc.betas) {
      const EnsembleParams params{n, beta};
      const auto mom = thermal_moments(params);
      table.cell(static_cast<long long>(n)).cell(beta);
      table.cell(mom.m_mean).cell(mom.m_variance).cell(mom.r2_mean).cell(mom.r2_variance);
      table.cell(mom.sigma_r2_mean);
      if (n <= kEnumerationMaxN) {
        const auto ora = enumeration_oracle(params);
        table.cell(ora.m_mean).cell(ora.m_variance).cell(ora.r2_mean).cell(ora.r2_variance);
        table.cell(ora.sigma_r2_mean);
        const std::string tag = "thermal N=" + std::to_string(n) + " beta=" + format_number(beta);
        if (!close(mom.m_mean, ora.m_mean)) ctx.flag(tag + ": m_mean disagrees with enumeration");
        if (!close(mom.m_variance, ora.m_variance)) ctx.flag(tag + ": m_var disagrees with enumeration");
        if (!close(mom.r2_mean, ora.r2_mean)) ctx.flag(tag + ": r2_mean disagrees with enumeration");
        if (!close(mom.sigma_r2_mean, ora.sigma_r2_mean)) {
          ctx.flag(tag + ": sigma_r2 disagrees with enumeration");
        }
      } else {
        table.empty().empty().empty().empty().empty();
      }
      table.end_row();
    }
  }
  ctx.write("thermal.csv", table.text());
}

struct ThresholdContext {
  double eta_T = 0.0;
  std::optional<double> B;
  std::optional<ThresholdEstimate> s0;
};

ThresholdContext threshold_context(const LevelLadder& ladder, const BathParams& bath) {
  ThresholdContext t;
  t.eta_T = thermal_total(ladder, bath.beta);
  if (!ladder.degenerate()) t.B = level_sum_B(ladder, bath.beta);
  if (t.B && bath.chi > 0.0) t.s0 = threshold(t.eta_T, *t.B, bath);
  return t;
}

void check_solution(Context& ctx, const std::string& tag, const SteadyStateSolution& sol,
                    const LevelLadder& ladder, const BathParams& bath, double s) {
  ctx.residual(sol.max_residual);
  if (!(sol.A > 0.0 && sol.A <= 1.0)) ctx.flag(tag + ": amplification factor outside (0, 1]");
  if (!(sol.mu >= 0.0 && sol.mu < ladder.ground())) {
    ctx.flag(tag + ": chemical potential outside [0, omega_{-r})");
  }
  if (!ladder.degenerate()) {
    const auto bound = noncondensate_bound(s, bath, ladder);
    if (sol.n_n > bound.bound * (1.0 + 1e-12)) ctx.flag(tag + ": n_n exceeds the non-condensate bound");
  }
  if (s > 0.0 && std::fabs(sol.S_supply - sol.S_exchange) > 1e-8 * std::fabs(sol.S_supply)) {
    ctx.flag(tag + ": the two excitation-transfer forms disagree");
  }
}

void run_steady_state(Context& ctx) {
  const auto& cfg = ctx.cfg();
  const LevelLadder ladder = build_ladder(cfg.ladder);
  const PumpParams pump = PumpParams::from_supply(cfg.pump.s, cfg.pump.Q);
  const auto th = threshold_context(ladder, cfg.bath);
  SteadyStateSolution sol;
  try {
    sol = solve_steady_state(ladder, cfg.bath, pump);
  } catch (const std::exception& err) {
    ctx.error(std::string("steady-state: ") + err.what());
    return;
  }
  check_solution(ctx, "steady-state", sol, ladder, cfg.bath, pump.s());

  CsvBuilder table({"l", "j", "omega", "n", "planck", "L1", "L2", "residual"});
  for (std::size_t l = 0; l < ladder.size(); ++l) {
    table.cell(static_cast<long long>(l));
    table.cell((HalfInt::from_int(static_cast<std::int64_t>(l)) - cfg.ladder.r).value());
    table.cell(ladder.omegas[l]).cell(sol.occupations[l]);
    table.cell(planck_occupation(ladder.omegas[l], cfg.bath.beta));
    table.cell(first_order_loss(sol.occupations[l], ladder.omegas[l], cfg.bath));
    table.cell(second_order_loss(l, sol.occupations, ladder, cfg.bath));
    table.cell(sol.residuals[l]);
    table.end_row();
  }
  ctx.write("steady_state.csv", table.text());

  Report rep;
  rep.section("steady-state");
  rep.add("ladder_source", to_string(ladder.source));
  rep.add("levels", ladder.size());
  rep.add("p", pump.p);
  rep.add("Q", pump.Q);
  rep.add("s", pump.s());
  rep.add("eta", sol.eta);
  rep.add("A", sol.A);
  rep.add("mu", sol.mu);
  rep.add("n_c", sol.n_c);
  rep.add("n_n", sol.n_n);
  rep.add("cond_frac", sol.n_c / sol.eta);
  rep.add("S_iv9", sol.S_supply);
  rep.add("S_iv10", sol.S_exchange);
  rep.add("resid_max", sol.max_residual);
  rep.add("eta_mismatch", sol.eta_mismatch);
  rep.add("eta_T", th.eta_T);
  if (th.B) {
    const auto bound = noncondensate_bound(pump.s(), cfg.bath, ladder);
    rep.add("B", *th.B);
    rep.add("n_n_bound", bound.bound);
  }
  if (th.s0) rep.add("s0", th.s0->s0);
  if (pump.s() > 0.0) {
    const auto fit = fit_effective_frequency(pump.s(), sol.eta, th.eta_T, ladder, cfg.bath);
    rep.add("omega_bar_fit", fit.omega_bar);
    rep.add("omega_bar_in_range", fit.in_range);
    if (!fit.in_range) ctx.flag("steady-state: fitted omega_bar outside the ladder");
  }
  ctx.write("steady_state_summary.txt", rep.text());
}

std::string sweep_csv(Context& ctx, const std::vector<SweepPoint>& points, const LevelLadder& ladder,
                      const BathParams& bath, const std::string& label) {
  CsvBuilder table({"s", "eta", "A", "mu", "n_c", "n_n", "cond_frac", "S_iv9", "S_iv10",
                    "resid_max", "omega_bar_fit", "status"});
  std::optional<double> last_mu, last_frac;
  const bool monotone_expected = bath.chi > 0.0 && !ladder.degenerate();
  for (const auto& pt : points) {
    table.cell(pt.s);
    if (!pt.solution) {
      for (int i = 0; i < 10; ++i) table.empty();
      table.cell(std::string_view("failed"));
      table.end_row();
      ctx.error(label + " s=" + format_number(pt.s) + ": " + pt.status);
      continue;
    }
    const auto& sol = *pt.solution;
    const std::string tag = label + " s=" + format_number(pt.s);
    check_solution(ctx, tag, sol, ladder, bath, pt.s);
    const double frac = sol.n_c / sol.eta;
    table.cell(sol.eta).cell(sol.A).cell(sol.mu).cell(sol.n_c).cell(sol.n_n).cell(frac);
    table.cell(sol.S_supply).cell(sol.S_exchange).cell(sol.max_residual);
    if (pt.omega_bar) {
      table.cell(pt.omega_bar->omega_bar);
      if (!pt.omega_bar->in_range) ctx.flag(tag + ": fitted omega_bar outside the ladder");
    } else {
      table.empty();
    }
    table.cell(std::string_view("ok"));
    table.end_row();
    if (monotone_expected) {
      if (last_mu && sol.mu < *last_mu) ctx.flag(tag + ": mu decreased along the sweep");
      if (last_frac && frac < *last_frac) ctx.flag(tag + ": condensate fraction decreased along the sweep");
    }
    last_mu = sol.mu;
    last_frac = frac;
  }
  return table.text();
}

void run_sweep_command(Context& ctx) {
  const auto& cfg = ctx.cfg();
  const LevelLadder ladder = build_ladder(cfg.ladder);
  const auto th = threshold_context(ladder, cfg.bath);
  double s0 = 1.0;
  if (cfg.pump.threshold_units) {
    if (!th.s0 || !th.s0->positive) {
      ctx.error("sweep: threshold units requested but s0 is not positive");
      return;
    }
    s0 = th.s0->s0;
  }
  const auto grid = pump_grid(cfg.pump, s0);
  const auto points = run_sweep(ladder, cfg.bath, grid, cfg.pump.Q, cfg.workers);
  ctx.write("sweep.csv", sweep_csv(ctx, points, ladder, cfg.bath, "sweep"));
}

void run_threshold(Context& ctx) {
  const auto& cfg = ctx.cfg();
  const LevelLadder ladder = build_ladder(cfg.ladder);
  const auto th = threshold_context(ladder, cfg.bath);
  if (!th.B || !th.s0) {
    ctx.error("threshold: needs a non-degenerate ladder and chi > 0");
    return;
  }
  const auto est = *th.s0;
  Report rep;
  rep.section("threshold");
  rep.add("levels", ladder.size());
  rep.add("beta", cfg.bath.beta);
  rep.add("phi", cfg.bath.phi);
  rep.add("chi", cfg.bath.chi);
  rep.add("eta_T", th.eta_T);
  rep.add("B", *th.B);
  rep.add("s0", est.s0);
  rep.add("s0_positive", est.positive);
  const auto bound0 = noncondensate_bound(0.0, cfg.bath, ladder);
  rep.add("n_n_bound_at_zero_supply", bound0.bound);
  if (!est.positive) {
    ctx.flag("threshold: 2B <= eta_T, the threshold estimate is not positive");
    rep.add("knee", "not computed");
    ctx.write("threshold.txt", rep.text());
    return;
  }

  const auto grid = pump_grid(cfg.pump, cfg.pump.threshold_units ? est.s0 : 1.0);
  const auto points = run_sweep(ladder, cfg.bath, grid, cfg.pump.Q, cfg.workers);
  ctx.write("threshold_sweep.csv", sweep_csv(ctx, points, ladder, cfg.bath, "threshold"));
  try {
    const double knee = condensation_knee(points);
    rep.add("knee", knee);
    rep.add("knee_over_s0", knee / est.s0);
    if (knee < est.s0 / 3.0 || knee > 3.0 * est.s0) {
      ctx.flag("threshold: sweep knee is not within a factor of 3 of s0");
    }
    // The nearest converged point to the knee calibrates omega_bar for eta_T's estimate.
    const SweepPoint* nearest = nullptr;
    for (const auto& pt : points) {
      if (!pt.omega_bar) continue;
      if (!nearest || std::fabs(std::log(pt.s / knee)) < std::fabs(std::log(nearest->s / knee))) {
        nearest = &pt;
      }
    }
    if (nearest) {
      const double wbar = nearest->omega_bar->omega_bar;
      const double eta_est = eta_T_estimate(ladder.size(), wbar, cfg.bath.beta);
      rep.add("omega_bar_at_knee", wbar);
      rep.add("eta_T_estimate", eta_est);
      rep.add("s0_with_eta_T_estimate", threshold(eta_est, *th.B, cfg.bath).s0);
    }
  } catch (const DomainError& err) {
    rep.add("knee", std::string("not computed: ") + err.what());
    ctx.flag(std::string("threshold: ") + err.what());
  }
  ctx.write("threshold.txt", rep.text());
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunResult run(const RunConfig& config) {
  Context ctx(config);
  try {
    switch (config.command) {
      case Command::spectrum: run_spectrum(ctx); break;
      case Command::thermal: run_thermal(ctx); break;
      case Command::steady_state: run_steady_state(ctx); break;
      case Command::sweep: run_sweep_command(ctx); break;
      case Command::threshold: run_threshold(ctx); break;
    }
  } catch (const std::exception& err) {
    ctx.error(std::string(to_string(config.command)) + ": " + err.what());
  }

  RunResult& result = ctx.result;
  result.exit_code = !result.errors.empty() ? kExitError
                     : !result.flags.empty() ? kExitFlagged
                                             : kExitOk;

  nlohmann::json manifest;
  manifest["artifact"] = "tcsim";
  manifest["version"] = kArtifactVersion;
  manifest["timestamp"] = utc_timestamp();
  manifest["command"] = to_string(config.command);
  nlohmann::json echo = nlohmann::json::object();
  for (const auto& [k, v] : config.entries) echo[k] = v;
  echo["output.dir"] = config.output_dir;
  echo["run.workers"] = std::to_string(config.workers);
  manifest["config"] = echo;
  manifest["files"] = nlohmann::json::array();
  for (const auto& f : result.files) {
    manifest["files"].push_back({{"name", f.name}, {"bytes", f.bytes}, {"crc32", f.crc32}});
  }
  manifest["flags"] = result.flags;
  manifest["errors"] = result.errors;
  manifest["residuals"] = ctx.residual_summary();
  manifest["exit_code"] = result.exit_code;
  result.manifest = ctx.dir() / "manifest.json";
  write_text_file(result.manifest, manifest.dump(2) + "\n");
  return result;
}

}  // namespace tcsim

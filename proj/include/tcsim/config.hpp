#pragma once

// Run configuration: flat `key = value` lines with dotted section prefixes,
// `#` comments and blank lines. Lists are comma separated.
//
//   command        spectrum | thermal | steady-state | sweep | threshold
//   output.dir     output directory (default "out")
//   run.workers    worker threads for sweeps (default 1)
//   spectrum.r     list of cooperation numbers (half-integers)
//   spectrum.c     list of excitation numbers (half-integers)
//   spectrum.kappa coupling magnitude
//   spectrum.state eigenstate index k for the distribution export (default 0)
//   thermal.N      list of molecule counts
//   thermal.beta   list of inverse temperatures ("inf" allowed)
//   ladder.source  analytic | spectral (default analytic)
//   ladder.r, ladder.c_ref, ladder.kappa, ladder.omega (default 1)
//   bath.beta, bath.phi (default 1), bath.chi
//   pump.s         net supply for steady-state
//   pump.Q         cavity loss per level (default 0)
//   pump.s_min, pump.s_max, pump.points, pump.grid (linear | log),
//   pump.units (absolute | threshold), pump.include_zero (true | false)

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tcsim/frohlich.hpp"
#include "tcsim/half_integer.hpp"

namespace tcsim {

enum class Command { spectrum, thermal, steady_state, sweep, threshold };

const char* to_string(Command command);
std::optional<Command> parse_command(std::string_view text);

struct SpectrumConfig {
  std::vector<HalfInt> r;
  std::vector<HalfInt> c;
  double kappa = 1.0;
  std::size_t state = 0;
};

struct ThermalConfig {
  std::vector<int> molecules;
  std::vector<double> betas;
};

struct LadderConfig {
  LadderSource source = LadderSource::analytic;
  HalfInt r;
  double c_ref = 0.0;
  double omega = 1.0;
  double kappa = 0.0;
};

struct PumpConfig {
  double s = 0.0;
  double Q = 0.0;
  double s_min = 0.0;
  double s_max = 0.0;
  int points = 0;
  bool log_grid = false;
  bool threshold_units = false;
  bool include_zero = false;
};

struct RunConfig {
  Command command = Command::spectrum;
  SpectrumConfig spectrum;
  ThermalConfig thermal;
  LadderConfig ladder;
  BathParams bath;
  PumpConfig pump;
  std::string output_dir = "out";
  int workers = 1;
  std::map<std::string, std::string> entries;  // raw key/value echo
};

/// Carries every validation problem found, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// `command` overrides (and must agree with) any `command` key in the text.
RunConfig parse_config(std::string_view text, std::optional<Command> command = std::nullopt);

/// Builds the ladder described by the config (diagonalizing the block for
/// the spectral source).
LevelLadder build_ladder(const LadderConfig& config);

/// The pump grid in absolute units; `s0` is used when threshold units are set.
std::vector<double> pump_grid(const PumpConfig& config, double s0);

}  // namespace tcsim

#include "tcsim/config.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "tcsim/errors.hpp"
#include "tcsim/tc_spectrum.hpp"

namespace tcsim {

namespace {

const std::set<std::string, std::less<>> kKnownKeys = {
    "command",       "output.dir",     "run.workers",   "spectrum.r",   "spectrum.c",
    "spectrum.kappa", "spectrum.state", "thermal.N",     "thermal.beta", "ladder.source",
    "ladder.r",      "ladder.c_ref",   "ladder.omega",  "ladder.kappa", "bath.beta",
    "bath.phi",      "bath.chi",       "pump.s",        "pump.Q",       "pump.s_min",
    "pump.s_max",    "pump.points",    "pump.grid",     "pump.units",   "pump.include_zero",
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (s == "inf" || s == "+inf" || s == "infinity") return HUGE_VAL;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<long long> to_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

// Collects problems while reading typed values from the entry map.
class Reader {
 public:
  explicit Reader(const std::map<std::string, std::string>& entries) : entries_(entries) {}

  std::vector<std::string> problems;

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  void require(const std::string& key) {
    if (!has(key)) problems.push_back(key + ": missing required key");
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    if (auto v = to_double(entries_.at(key))) return *v;
    problems.push_back(key + ": not a number: '" + entries_.at(key) + "'");
    return fallback;
  }

  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    if (auto v = to_int(entries_.at(key))) return *v;
    problems.push_back(key + ": not an integer: '" + entries_.at(key) + "'");
    return fallback;
  }

  HalfInt half(const std::string& key) {
    if (!has(key)) return {};
    try {
      return HalfInt::parse(entries_.at(key));
    } catch (const DomainError& err) {
      problems.push_back(key + ": " + err.what());
      return {};
    }
  }

  std::vector<HalfInt> half_list(const std::string& key) {
    std::vector<HalfInt> out;
    if (!has(key)) return out;
    for (auto item : split_list(entries_.at(key))) {
      try {
        out.push_back(HalfInt::parse(item));
      } catch (const DomainError& err) {
        problems.push_back(key + ": " + err.what());
      }
    }
    return out;
  }

  std::vector<double> number_list(const std::string& key) {
    std::vector<double> out;
    if (!has(key)) return out;
    for (auto item : split_list(entries_.at(key))) {
      if (auto v = to_double(item)) {
        out.push_back(*v);
      } else {
        problems.push_back(key + ": not a number: '" + std::string(item) + "'");
      }
    }
    return out;
  }

  std::string choice(const std::string& key, std::initializer_list<const char*> options,
                     const std::string& fallback) {
    if (!has(key)) return fallback;
    const std::string& v = entries_.at(key);
    for (const char* o : options) {
      if (v == o) return v;
    }
    std::string msg = key + ": '" + v + "' is not one of";
    for (const char* o : options) msg += std::string(" ") + o;
    problems.push_back(msg);
    return fallback;
  }

 private:
  const std::map<std::string, std::string>& entries_;
};

void read_ladder_and_bath(Reader& in, RunConfig& cfg) {
  for (const char* key : {"ladder.r", "ladder.c_ref", "ladder.kappa", "bath.beta", "bath.chi"}) {
    in.require(key);
  }
  cfg.ladder.source = in.choice("ladder.source", {"analytic", "spectral"}, "analytic") == "spectral"
                          ? LadderSource::spectral
                          : LadderSource::analytic;
  cfg.ladder.r = in.half("ladder.r");
  cfg.ladder.c_ref = in.number("ladder.c_ref", 0.0);
  cfg.ladder.omega = in.number("ladder.omega", 1.0);
  cfg.ladder.kappa = in.number("ladder.kappa", 0.0);
  cfg.bath.beta = in.number("bath.beta", 1.0);
  cfg.bath.phi = in.number("bath.phi", 1.0);
  cfg.bath.chi = in.number("bath.chi", 0.0);
  cfg.pump.Q = in.number("pump.Q", 0.0);
  if (cfg.pump.Q < 0.0) in.problems.push_back("pump.Q: must be >= 0");

  try {
    cfg.bath.validate();
  } catch (const DomainError& err) {
    in.problems.push_back(std::string("bath: ") + err.what());
  }
  if (in.problems.empty()) {
    try {
      const LevelLadder ladder = build_ladder(cfg.ladder);
      if (cfg.bath.chi > 0.0 && ladder.degenerate()) {
        in.problems.push_back("ladder: degenerate ladder is not allowed with bath.chi > 0");
      }
    } catch (const std::exception& err) {
      in.problems.push_back(std::string("ladder: ") + err.what());
    }
  }
}

void read_pump_grid(Reader& in, RunConfig& cfg, bool threshold_defaults) {
  PumpConfig& p = cfg.pump;
  if (threshold_defaults) {
    p.threshold_units = in.choice("pump.units", {"absolute", "threshold"}, "threshold") == "threshold";
    p.log_grid = in.choice("pump.grid", {"linear", "log"}, "log") == "log";
    p.s_min = in.number("pump.s_min", 1e-3);
    p.s_max = in.number("pump.s_max", 100.0);
    p.points = static_cast<int>(in.integer("pump.points", 59));
    p.include_zero = in.choice("pump.include_zero", {"true", "false"}, "true") == "true";
  } else {
    in.require("pump.s_max");
    in.require("pump.points");
    p.threshold_units = in.choice("pump.units", {"absolute", "threshold"}, "absolute") == "threshold";
    p.log_grid = in.choice("pump.grid", {"linear", "log"}, "linear") == "log";
    p.s_min = in.number("pump.s_min", 0.0);
    p.s_max = in.number("pump.s_max", 0.0);
    p.points = static_cast<int>(in.integer("pump.points", 0));
    p.include_zero = in.choice("pump.include_zero", {"true", "false"}, "false") == "true";
  }
  if (p.points < 1) in.problems.push_back("pump.points: must be >= 1");
  if (p.s_min < 0.0) in.problems.push_back("pump.s_min: must be >= 0");
  if (p.s_max < p.s_min) in.problems.push_back("pump.s_max: must be >= pump.s_min (grid must be sorted)");
  if (p.log_grid && !(p.s_min > 0.0)) {
    in.problems.push_back("pump.s_min: log grid needs s_min > 0 (use pump.include_zero for s = 0)");
  }
  if (p.threshold_units && !(cfg.bath.chi > 0.0)) {
    in.problems.push_back("pump.units: threshold units need bath.chi > 0");
  }
}

}  // namespace

const char* to_string(Command command) {
  switch (command) {
    case Command::spectrum: return "spectrum";
    case Command::thermal: return "thermal";
    case Command::steady_state: return "steady-state";
    case Command::sweep: return "sweep";
    case Command::threshold: return "threshold";
  }
  return "?";
}

std::optional<Command> parse_command(std::string_view text) {
  for (Command c : {Command::spectrum, Command::thermal, Command::steady_state, Command::sweep,
                    Command::threshold}) {
    if (text == to_string(c)) return c;
  }
  return std::nullopt;
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& p : problems) msg += "\n  " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

RunConfig parse_config(std::string_view text, std::optional<Command> command) {
  RunConfig cfg;
  std::vector<std::string> problems;

  std::istringstream lines{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(lines, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      problems.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!kKnownKeys.count(key)) {
      problems.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      continue;
    }
    if (cfg.entries.count(key)) {
      problems.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
      continue;
    }
    cfg.entries[key] = value;
  }

  Reader in(cfg.entries);
  in.problems = std::move(problems);

  std::optional<Command> from_text;
  if (in.has("command")) {
    from_text = parse_command(cfg.entries.at("command"));
    if (!from_text) in.problems.push_back("command: unknown command '" + cfg.entries.at("command") + "'");
  }
  if (command && from_text && *command != *from_text) {
    in.problems.push_back(std::string("command: config says '") + to_string(*from_text) +
                          "' but '" + to_string(*command) + "' was requested");
  }
  if (!command && !from_text && !in.has("command")) {
    in.problems.push_back("command: missing (give it on the command line or as 'command = ...')");
  }
  cfg.command = command ? *command : from_text.value_or(Command::spectrum);

  if (in.has("output.dir")) cfg.output_dir = cfg.entries.at("output.dir");
  cfg.workers = static_cast<int>(in.integer("run.workers", 1));
  if (cfg.workers < 1) in.problems.push_back("run.workers: must be >= 1");

  switch (cfg.command) {
    case Command::spectrum: {
      for (const char* key : {"spectrum.r", "spectrum.c", "spectrum.kappa"}) in.require(key);
      cfg.spectrum.r = in.half_list("spectrum.r");
      cfg.spectrum.c = in.half_list("spectrum.c");
      cfg.spectrum.kappa = in.number("spectrum.kappa", 1.0);
      const long long state = in.integer("spectrum.state", 0);
      if (state < 0) in.problems.push_back("spectrum.state: must be >= 0");
      cfg.spectrum.state = static_cast<std::size_t>(std::max(0LL, state));
      for (HalfInt r : cfg.spectrum.r) {
        for (HalfInt c : cfg.spectrum.c) {
          try {
            const BlockIndex idx{r, c, cfg.spectrum.kappa};
            const BasisRange basis = block_basis(idx);
            if (cfg.spectrum.state >= basis.dim) {
              in.problems.push_back("spectrum.state: index " + std::to_string(cfg.spectrum.state) +
                                    " out of range for block (r=" + r.to_string() +
                                    ", c=" + c.to_string() + ")");
            }
          } catch (const DomainError& err) {
            in.problems.push_back(std::string("spectrum.c: ") + err.what());
          }
        }
      }
      break;
    }
    case Command::thermal: {
      in.require("thermal.N");
      in.require("thermal.beta");
      for (double n : in.number_list("thermal.N")) {
        if (n != std::floor(n) || n < 1 || n > 1e9) {
          in.problems.push_back("thermal.N: must be positive integers");
        } else {
          cfg.thermal.molecules.push_back(static_cast<int>(n));
        }
      }
      cfg.thermal.betas = in.number_list("thermal.beta");
      for (double b : cfg.thermal.betas) {
        if (std::isnan(b) || b < 0.0) in.problems.push_back("thermal.beta: must be >= 0");
      }
      break;
    }
    case Command::steady_state: {
      read_ladder_and_bath(in, cfg);
      in.require("pump.s");
      cfg.pump.s = in.number("pump.s", 0.0);
      if (cfg.pump.s < 0.0) in.problems.push_back("pump.s: net supply must be >= 0");
      break;
    }
    case Command::sweep:
      read_ladder_and_bath(in, cfg);
      read_pump_grid(in, cfg, false);
      break;
    case Command::threshold:
      read_ladder_and_bath(in, cfg);
      if (!(cfg.bath.chi > 0.0)) in.problems.push_back("bath.chi: threshold needs chi > 0");
      read_pump_grid(in, cfg, true);
      break;
  }

  if (!in.problems.empty()) throw ConfigError(std::move(in.problems));
  return cfg;
}

LevelLadder build_ladder(const LadderConfig& config) {
  if (config.source == LadderSource::analytic) {
    return ladder_analytic(config.r, config.c_ref, config.omega, config.kappa);
  }
  const BlockIndex idx{config.r, HalfInt::from_double(config.c_ref), config.kappa};
  return ladder_from_spectrum(diagonalize(build_block(idx)), config.omega);
}

std::vector<double> pump_grid(const PumpConfig& config, double s0) {
  const double scale = config.threshold_units ? s0 : 1.0;
  std::vector<double> grid = config.log_grid
                                 ? log_grid(config.s_min * scale, config.s_max * scale, config.points)
                                 : linear_grid(config.s_min * scale, config.s_max * scale, config.points);
  if (config.include_zero && grid.front() != 0.0) grid.insert(grid.begin(), 0.0);
  return grid;
}

}  // namespace tcsim

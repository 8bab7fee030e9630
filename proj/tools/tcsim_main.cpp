// tcsim: Tavis-Cummings spectra, thermal ensembles and pumped-ladder steady states.
//
//   tcsim <command> --config <file> [--out <dir>] [--workers <k>]
//
// Exit status: 0 all good, 2 outputs written but a check was flagged, 1 error.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tcsim/config.hpp"
#include "tcsim/csv.hpp"
#include "tcsim/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Tavis-Cummings spectra, thermal ensembles and pumped-ladder steady states"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<int> workers;

  const char* names[] = {"spectrum", "thermal", "steady-state", "sweep", "threshold"};
  const char* about[] = {
      "diagonalize (r, c) blocks and export spectra and photon distributions",
      "thermal moments of the molecular ensemble",
      "pumped steady state at one supply rate",
      "steady states over a grid of supply rates",
      "threshold estimate and a sweep around it",
  };
  for (int i = 0; i < 5; ++i) {
    auto* sub = app.add_subcommand(names[i], about[i]);
    sub->add_option("-c,--config", config_path, "run configuration file")->required();
    sub->add_option("-o,--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("-w,--workers", workers, "worker threads (overrides run.workers)")
        ->check(CLI::PositiveNumber);
  }
  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  const auto command = tcsim::parse_command(name);

  tcsim::RunConfig cfg;
  try {
    cfg = tcsim::parse_config(tcsim::read_text_file(config_path), command);
  } catch (const tcsim::ConfigError& err) {
    std::cerr << "tcsim: invalid configuration " << config_path << "\n";
    for (const auto& p : err.problems()) std::cerr << "  " << p << "\n";
    return tcsim::kExitError;
  } catch (const std::exception& err) {
    std::cerr << "tcsim: " << err.what() << "\n";
    return tcsim::kExitError;
  }
  if (out_dir) cfg.output_dir = *out_dir;
  if (workers) cfg.workers = *workers;

  tcsim::RunResult result;
  try {
    result = tcsim::run(cfg);
  } catch (const std::exception& err) {
    std::cerr << "tcsim: " << err.what() << "\n";
    return tcsim::kExitError;
  }
  for (const auto& f : result.files) std::cout << "wrote " << (cfg.output_dir + "/" + f.name) << "\n";
  std::cout << "wrote " << result.manifest.string() << "\n";
  for (const auto& f : result.flags) std::cerr << "flag: " << f << "\n";
  for (const auto& e : result.errors) std::cerr << "error: " << e << "\n";
  return result.exit_code;
}

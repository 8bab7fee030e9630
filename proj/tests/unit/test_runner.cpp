#include <filesystem>
#include <random>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "tcsim/config.hpp"
#include "tcsim/csv.hpp"
#include "tcsim/runner.hpp"

using namespace tcsim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tcsim_unit_" + std::to_string(std::random_device{}()) + "_" + name);
  fs::remove_all(dir);
  return dir;
}

RunResult run_text(const std::string& text, const fs::path& out) {
  auto cfg = parse_config(text);
  cfg.output_dir = out.string();
  return run(cfg);
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char ch : s) n += ch == '\n';
  return n;
}

}  // namespace

TEST_CASE("csv formatting") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(1e300) == "1.0000000000000001e+300");
  CHECK(format_number(std::nan("")) == "nan");
  CsvBuilder b({"a", "b"});
  b.cell(1.5).cell(std::string_view("x"));
  b.end_row();
  b.empty().cell(3LL);
  b.end_row();
  CHECK(b.text() == "a,b\n1.5,x\n,3\n");
}

TEST_CASE("spectrum run writes data, summary and manifest") {
  const auto out = scratch("spectrum");
  const auto res = run_text("command = spectrum\nspectrum.r = 60\nspectrum.c = 60\nspectrum.kappa = 1\n", out);
  CHECK(res.exit_code == kExitOk);
  CHECK(res.errors.empty());
  CHECK(res.flags.empty());
  REQUIRE(res.files.size() == 3);
  const auto table = read_text_file(out / "spectrum.csv");
  CHECK(table.rfind("r,c,kappa,k,lambda,n0,sigma2\n", 0) == 0);
  CHECK(count_lines(table) == 122);
  CHECK(fs::exists(out / "distribution_r60_c60.csv"));
  const auto summary = read_text_file(out / "spectrum_summary.txt");
  CHECK(summary.find("gaussian_max_deviation_over_peak") != std::string::npos);

  const auto manifest = nlohmann::json::parse(read_text_file(res.manifest));
  CHECK(manifest["command"] == "spectrum");
  CHECK(manifest["version"] == kArtifactVersion);
  CHECK(manifest["exit_code"] == 0);
  CHECK(manifest["config"]["spectrum.r"] == "60");
  REQUIRE(manifest["files"].size() == 3);
  for (const auto& f : manifest["files"]) {
    CHECK(fs::file_size(out / f["name"].get<std::string>()) == f["bytes"].get<std::size_t>());
    CHECK(f["crc32"].get<std::string>().size() == 8);
  }
  fs::remove_all(out);
}

TEST_CASE("repeated runs give identical data files") {
  const std::string text = std::string("command = sweep\nladder.r = 5\nladder.c_ref = 1\nladder.kappa = 0.01\n") +
                           "bath.beta = 1\nbath.chi = 0.1\npump.s_max = 500\npump.points = 12\n";
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  auto cfg = parse_config(text);
  cfg.output_dir = a.string();
  cfg.workers = 1;
  const auto ra = run(cfg);
  cfg.output_dir = b.string();
  cfg.workers = 3;
  const auto rb = run(cfg);
  CHECK(ra.exit_code == kExitOk);
  CHECK(rb.exit_code == kExitOk);
  CHECK(read_text_file(a / "sweep.csv") == read_text_file(b / "sweep.csv"));
  CHECK(count_lines(read_text_file(a / "sweep.csv")) == 13);
  REQUIRE(ra.files.size() == rb.files.size());
  CHECK(ra.files[0].crc32 == rb.files[0].crc32);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("thermal run fills oracle columns only for small N") {
  const auto out = scratch("thermal");
  const auto res = run_text("command = thermal\nthermal.N = 6, 40\nthermal.beta = 0, 0.7\n", out);
  CHECK(res.exit_code == kExitOk);
  const auto text = read_text_file(out / "thermal.csv");
  CHECK(count_lines(text) == 5);
  CHECK(text.find("\n40,0,0,10,30,195,390,,,,,\n") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("a non-positive threshold is flagged, not hidden") {
  const auto out = scratch("threshold");
  const auto res = run_text("command = threshold\nladder.r = 1\nladder.c_ref = 1\nladder.kappa = 0.9\n"
                            "bath.beta = 1\nbath.chi = 0.1\n", out);
  CHECK(res.exit_code == kExitFlagged);
  REQUIRE_FALSE(res.flags.empty());
  const auto rep = read_text_file(out / "threshold.txt");
  CHECK(rep.find("s0_positive = false") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("steady-state run") {
  const auto out = scratch("steady");
  const auto res = run_text("command = steady-state\nladder.r = 5\nladder.c_ref = 1\nladder.kappa = 0.01\n"
                            "bath.beta = 1\nbath.chi = 0.1\npump.s = 50\npump.Q = 2\n", out);
  CHECK(res.exit_code == kExitOk);
  const auto table = read_text_file(out / "steady_state.csv");
  CHECK(table.rfind("l,j,omega,n,planck,L1,L2,residual\n", 0) == 0);
  CHECK(count_lines(table) == 12);
  const auto manifest = nlohmann::json::parse(read_text_file(res.manifest));
  CHECK(manifest["residuals"]["points"] == 1);
  fs::remove_all(out);
}

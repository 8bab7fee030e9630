#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tcsim/config.hpp"

namespace tcsim {

inline constexpr const char* kArtifactVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitFlagged = 2 };

struct OutputFile {
  std::string name;
  std::size_t bytes = 0;
  std::string crc32;  // 8 hex digits
};

struct RunResult {
  int exit_code = kExitOk;
  std::vector<OutputFile> files;     // data files, excluding the manifest
  std::vector<std::string> flags;    // computed, but an invariant or regime check failed
  std::vector<std::string> errors;   // a computation failed
  std::filesystem::path manifest;
};

/// Executes the configured command, writes its data files and
/// `manifest.json` into config.output_dir. Data files are byte-identical
/// across runs of the same config; only the manifest timestamp differs.
RunResult run(const RunConfig& config);

}  // namespace tcsim

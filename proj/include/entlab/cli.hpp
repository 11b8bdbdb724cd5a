#pragma once

// Batch entry points. Each subcommand reads one config file, writes its data
// products into an output directory and maps failures to a stage-specific
// exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "entlab/config.hpp"

namespace entlab {

enum class Command { modes, simulate, tomo, metrics, report };

std::string_view to_string(Command command);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;  // bad flags or unwritable output
inline constexpr int config = 2;
inline constexpr int physics = 3;
inline constexpr int simulate = 4;
inline constexpr int tomo = 5;
inline constexpr int metrics = 6;
}  // namespace exit_code

inline constexpr const char* kFormatVersion = "1";

struct RunManifest {
  Command command = Command::report;
  std::filesystem::path config_path;  // empty: built-in defaults
  std::filesystem::path output_dir = ".";
  std::filesystem::path input_dir;  // tomo/metrics: where the CSVs live; empty means output_dir
  std::optional<std::uint64_t> seed;
  std::optional<int> resamples;
  std::optional<double> acquisition;
  std::string format_version = kFormatVersion;
};

// File names inside the output directory.
namespace files {
inline constexpr const char* modes = "modes.json";
inline constexpr const char* tomography_counts = "tomography_counts.csv";
inline constexpr const char* witness_counts = "witness_counts.csv";
inline constexpr const char* histogram = "histogram.csv";
inline constexpr const char* reconstruction = "reconstruction.json";
inline constexpr const char* metrics = "metrics.json";
inline constexpr const char* summary = "summary.txt";
inline constexpr const char* config_echo = "config.txt";
inline constexpr const char* manifest = "manifest.json";
}  // namespace files

// Config with manifest overrides applied. Throws ConfigError.
RunConfig resolve_config(const RunManifest& manifest);

// Runs one command; diagnostics go to `log`. Returns an exit code.
int run_command(const RunManifest& manifest, std::ostream& log);

// Parses argv and runs.
int run_cli(int argc, char** argv);

}  // namespace entlab

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "traffic/csv_io.hpp"
#include "traffic/experiments.hpp"
#include "traffic/params.hpp"
#include "traffic/sde.hpp"

namespace traffic {

/// Malformed / out-of-range configuration. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Command { Simulate, Diagram, Scan, Validate, Moments, Crossings };

Command command_from_string(const std::string& s);
const char* command_name(Command c);

/// Knobs for the experiment drivers; defaults are the desk-scale setup.
struct ExperimentSettings {
  std::size_t paths = 20;           // runs per scenario / per grid N
  std::size_t combos = 50;          // parameter combinations per study
  std::size_t sims_per_combo = 100;
  std::size_t sample_size = 100;    // confidence-table sample size
  double epsilon = 0.1;             // convergence detector rate
  double window_lo = 29.0, window_hi = 29.5;  // moment-study window
  std::vector<std::array<double, 2>> ci_windows{{12.5, 14.5}, {97.5, 99.5}};
  std::vector<double> levels = default_ci_levels();
  double scan_t_lo = 25.0, scan_t_hi = 27.0;  // diagram sampling window
  double grid_lo = 1.0;
  std::optional<double> grid_hi;              // default: n_cut
  std::vector<double> scan_c1{0.5, 1.0, 2.0};
  std::vector<double> scan_sigma{0.5, 1.0, 1.2};
  std::optional<double> crossing_level;       // default: xi of the scenario
  std::size_t series_stride = 10;             // row thinning for series CSVs
  SamplerRanges sampler;
};

struct RunConfig {
  Command command = Command::Moments;
  ModelParams model;  // defaults are the reference parameter set
  double n_total = 150.0;
  std::optional<double> n_cut = 150.0;
  InitPolicy init = InitPolicy::uniform_to_n();
  SimConfig sim;
  ExperimentSettings experiment;
  unsigned workers = 0;  // 0 = hardware concurrency
  std::filesystem::path output_dir = "out";
  bool emit_svg = false;

  /// Builds the scenario, converting invariant violations to ConfigError.
  Scenario scenario() const;
  void validate() const;
};

/// Values gathered from command-line flags; set fields win over the file.
struct FlagOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma, c1, c2, v1, v2, road_length;
  std::optional<double> n_total, n_max, n_cut;
  std::optional<double> t_end;
  std::optional<std::size_t> steps, paths, combos, sims_per_combo, sample_size;
  std::optional<std::string> scheme;
  std::optional<unsigned> workers;
  std::optional<std::string> out_dir;
  std::optional<bool> svg;
  std::optional<double> crossing_level;
};

RunConfig default_config();

/// Strict parse: unknown keys and type mismatches are rejected with the
/// offending field path in the message.
RunConfig parse_config(const std::string& json_text);
RunConfig config_from_json(const Json& j);

void apply_overrides(RunConfig& cfg, const FlagOverrides& flags);

Json to_json(const RunConfig& cfg);
std::string serialize(const RunConfig& cfg);

}  // namespace traffic

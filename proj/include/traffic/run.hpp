#pragma once

#include <string>
#include <vector>

#include "traffic/config.hpp"
#include "traffic/csv_io.hpp"

namespace traffic {

struct RunOutcome {
  Json manifest;
  std::vector<std::string> summary;  // human-readable result lines
};

/// Executes one command: runs the simulations/experiments the command asks
/// for and writes CSV tables (plus optional SVG/JSON artifacts) and a
/// manifest into cfg.output_dir. Identical (config, seed) pairs produce
/// byte-identical output files for any worker count.
RunOutcome run_command(const RunConfig& cfg);

}  // namespace traffic

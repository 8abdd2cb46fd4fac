// trafficsde: simulation and analysis CLI for the two-speed-state
// stochastic traffic model.
//
// Usage:
//   trafficsde <command> [--config FILE] [--seed U64] [--sigma F] [--c1 F]
//              [--c2 F] [--n-total F] [--n-max F] [--n-cut F] [--t-end F]
//              [--steps U] [--paths U] [--out DIR] [--svg] ...
//
// Commands: simulate, diagram, scan, validate, moments, crossings.
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "traffic/run.hpp"
#include "traffic/version.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw traffic::ConfigError("cannot read config file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-speed-state stochastic traffic model toolkit"};
  app.set_version_flag("--version", traffic::kVersion);
  app.require_subcommand(1);

  std::string config_file;
  traffic::FlagOverrides flags;

  // Temporaries bound to CLI11; moved into optionals only when set.
  std::uint64_t seed = 0;
  double sigma = 0, c1 = 0, c2 = 0, v1 = 0, v2 = 0, length = 0;
  double n_total = 0, n_max = 0, n_cut = 0, t_end = 0, level = 0;
  std::size_t steps = 0, paths = 0, combos = 0, sims = 0, sample_size = 0;
  unsigned workers = 0;
  std::string scheme, out_dir;
  bool svg = false;

  const std::vector<std::string> commands = {"simulate", "diagram",  "scan",
                                             "validate", "moments", "crossings"};
  for (const std::string& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_file, "JSON config file");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--sigma", sigma, "noise intensity");
    sub->add_option("--c1", c1, "slow->fast transition rate");
    sub->add_option("--c2", c2, "fast->slow transition rate");
    sub->add_option("--v1", v1, "slow-state speed");
    sub->add_option("--v2", v2, "fast-state speed");
    sub->add_option("--length", length, "road length L");
    sub->add_option("--n-total", n_total, "total vehicle count N");
    sub->add_option("--n-max", n_max, "maximum occupancy N_max");
    sub->add_option("--n-cut", n_cut, "concentration truncation N_cut");
    sub->add_option("--t-end", t_end, "integration horizon");
    sub->add_option("--steps", steps, "integration steps");
    sub->add_option("--paths", paths, "runs per scenario / grid point");
    sub->add_option("--combos", combos, "parameter combinations");
    sub->add_option("--sims-per-combo", sims, "runs per combination");
    sub->add_option("--sample-size", sample_size, "confidence sample size");
    sub->add_option("--scheme", scheme, "euler-maruyama|milstein");
    sub->add_option("--workers", workers, "worker threads (0 = hardware)");
    sub->add_option("--level", level, "crossing level (default: xi)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--svg", svg, "emit SVG charts");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  auto picked = [&](const char* flag) { return sub->count(flag) > 0; };
  if (picked("--seed")) flags.seed = seed;
  if (picked("--sigma")) flags.sigma = sigma;
  if (picked("--c1")) flags.c1 = c1;
  if (picked("--c2")) flags.c2 = c2;
  if (picked("--v1")) flags.v1 = v1;
  if (picked("--v2")) flags.v2 = v2;
  if (picked("--length")) flags.road_length = length;
  if (picked("--n-total")) flags.n_total = n_total;
  if (picked("--n-max")) flags.n_max = n_max;
  if (picked("--n-cut")) flags.n_cut = n_cut;
  if (picked("--t-end")) flags.t_end = t_end;
  if (picked("--steps")) flags.steps = steps;
  if (picked("--paths")) flags.paths = paths;
  if (picked("--combos")) flags.combos = combos;
  if (picked("--sims-per-combo")) flags.sims_per_combo = sims;
  if (picked("--sample-size")) flags.sample_size = sample_size;
  if (picked("--scheme")) flags.scheme = scheme;
  if (picked("--workers")) flags.workers = workers;
  if (picked("--level")) flags.crossing_level = level;
  if (picked("--out")) flags.out_dir = out_dir;
  if (picked("--svg")) flags.svg = true;

  try {
    traffic::RunConfig cfg;
    if (!config_file.empty()) {
      cfg = traffic::parse_config(read_file(config_file));
    }
    cfg.command = traffic::command_from_string(sub->get_name());
    traffic::apply_overrides(cfg, flags);

    const traffic::RunOutcome outcome = traffic::run_command(cfg);
    for (const std::string& line : outcome.summary) {
      std::cout << line << '\n';
    }
    std::cout << "results written to " << cfg.output_dir.string() << '\n';
    return 0;
  } catch (const traffic::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

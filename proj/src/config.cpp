#include "traffic/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace traffic {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path.empty() ? what : path + ": " + what);
}

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void check_keys(const Json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& item : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return item.key() == k;
        }) == allowed.end()) {
      fail(join_path(path, item.key()), "unknown key");
    }
  }
}

double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::size_t as_count(const Json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    fail(path, "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected a boolean");
  return v.get<bool>();
}

std::vector<double> as_number_list(const Json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::array<double, 2> as_window(const Json& v, const std::string& path) {
  const auto xs = as_number_list(v, path);
  if (xs.size() != 2) fail(path, "expected [lo, hi]");
  return {xs[0], xs[1]};
}

Scheme scheme_from_string(const std::string& s, const std::string& path) {
  if (s == "euler-maruyama" || s == "euler") return Scheme::EulerMaruyama;
  if (s == "milstein") return Scheme::Milstein;
  fail(path, "unknown scheme '" + s + "' (euler-maruyama|milstein)");
}

const char* scheme_name(Scheme s) {
  return s == Scheme::Milstein ? "milstein" : "euler-maruyama";
}

void parse_model(const Json& j, const std::string& path, ModelParams& m) {
  check_keys(j, path,
             {"c1", "c2", "v1", "v2", "sigma", "n_max", "road_length"});
  if (j.contains("c1")) m.c1 = as_number(j["c1"], join_path(path, "c1"));
  if (j.contains("c2")) m.c2 = as_number(j["c2"], join_path(path, "c2"));
  if (j.contains("v1")) m.v1 = as_number(j["v1"], join_path(path, "v1"));
  if (j.contains("v2")) m.v2 = as_number(j["v2"], join_path(path, "v2"));
  if (j.contains("sigma"))
    m.sigma = as_number(j["sigma"], join_path(path, "sigma"));
  if (j.contains("n_max"))
    m.n_max = as_number(j["n_max"], join_path(path, "n_max"));
  if (j.contains("road_length"))
    m.road_length = as_number(j["road_length"], join_path(path, "road_length"));
}

void parse_init(const Json& j, const std::string& path, InitPolicy& init) {
  check_keys(j, path, {"policy", "value", "lo", "hi"});
  const std::string policy =
      j.contains("policy") ? as_string(j["policy"], join_path(path, "policy"))
                           : "uniform";
  if (policy == "fixed") {
    if (!j.contains("value")) fail(path, "fixed policy needs 'value'");
    init = InitPolicy::fixed(as_number(j["value"], join_path(path, "value")));
  } else if (policy == "uniform") {
    init = InitPolicy::uniform_to_n();
    if (j.contains("lo")) init.lo = as_number(j["lo"], join_path(path, "lo"));
    if (j.contains("hi")) init.hi = as_number(j["hi"], join_path(path, "hi"));
  } else {
    fail(join_path(path, "policy"), "unknown policy '" + policy + "'");
  }
}

void parse_sim(const Json& j, const std::string& path, SimConfig& sim) {
  check_keys(j, path, {"t_end", "steps", "scheme", "seed", "boundary_epsilon"});
  if (j.contains("t_end"))
    sim.t_end = as_number(j["t_end"], join_path(path, "t_end"));
  if (j.contains("steps"))
    sim.n_steps = as_count(j["steps"], join_path(path, "steps"));
  if (j.contains("scheme"))
    sim.scheme = scheme_from_string(
        as_string(j["scheme"], join_path(path, "scheme")),
        join_path(path, "scheme"));
  if (j.contains("seed")) {
    const std::string p = join_path(path, "seed");
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
      fail(p, "expected an unsigned integer");
    }
    sim.master_seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("boundary_epsilon"))
    sim.boundary_epsilon =
        as_number(j["boundary_epsilon"], join_path(path, "boundary_epsilon"));
}

void parse_sampler(const Json& j, const std::string& path, SamplerRanges& r) {
  check_keys(j, path, {"n_lo", "n_hi", "c1_lo", "c1_hi", "c2_lo", "c2_hi",
                       "sigma_lo", "sigma_hi"});
  auto num = [&](const char* key, double& target) {
    if (j.contains(key)) target = as_number(j[key], join_path(path, key));
  };
  num("n_lo", r.n_lo);
  num("n_hi", r.n_hi);
  num("c1_lo", r.c1_lo);
  num("c1_hi", r.c1_hi);
  num("c2_lo", r.c2_lo);
  num("c2_hi", r.c2_hi);
  num("sigma_lo", r.sigma_lo);
  num("sigma_hi", r.sigma_hi);
}

void parse_experiment(const Json& j, const std::string& path,
                      ExperimentSettings& e) {
  check_keys(j, path,
             {"paths", "combos", "sims_per_combo", "sample_size", "epsilon",
              "window", "ci_windows", "levels", "scan_window", "grid",
              "scan_c1", "scan_sigma", "crossing_level", "series_stride",
              "sampler"});
  if (j.contains("paths"))
    e.paths = as_count(j["paths"], join_path(path, "paths"));
  if (j.contains("combos"))
    e.combos = as_count(j["combos"], join_path(path, "combos"));
  if (j.contains("sims_per_combo"))
    e.sims_per_combo =
        as_count(j["sims_per_combo"], join_path(path, "sims_per_combo"));
  if (j.contains("sample_size"))
    e.sample_size = as_count(j["sample_size"], join_path(path, "sample_size"));
  if (j.contains("epsilon"))
    e.epsilon = as_number(j["epsilon"], join_path(path, "epsilon"));
  if (j.contains("window")) {
    const auto w = as_window(j["window"], join_path(path, "window"));
    e.window_lo = w[0];
    e.window_hi = w[1];
  }
  if (j.contains("ci_windows")) {
    const std::string p = join_path(path, "ci_windows");
    if (!j["ci_windows"].is_array()) fail(p, "expected an array of [lo, hi]");
    e.ci_windows.clear();
    for (std::size_t i = 0; i < j["ci_windows"].size(); ++i) {
      e.ci_windows.push_back(
          as_window(j["ci_windows"][i], p + "[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("levels"))
    e.levels = as_number_list(j["levels"], join_path(path, "levels"));
  if (j.contains("scan_window")) {
    const auto w = as_window(j["scan_window"], join_path(path, "scan_window"));
    e.scan_t_lo = w[0];
    e.scan_t_hi = w[1];
  }
  if (j.contains("grid")) {
    const auto w = as_window(j["grid"], join_path(path, "grid"));
    e.grid_lo = w[0];
    e.grid_hi = w[1];
  }
  if (j.contains("scan_c1"))
    e.scan_c1 = as_number_list(j["scan_c1"], join_path(path, "scan_c1"));
  if (j.contains("scan_sigma"))
    e.scan_sigma =
        as_number_list(j["scan_sigma"], join_path(path, "scan_sigma"));
  if (j.contains("crossing_level"))
    e.crossing_level =
        as_number(j["crossing_level"], join_path(path, "crossing_level"));
  if (j.contains("series_stride"))
    e.series_stride =
        as_count(j["series_stride"], join_path(path, "series_stride"));
  if (j.contains("sampler"))
    parse_sampler(j["sampler"], join_path(path, "sampler"), e.sampler);
}

}  // namespace

Command command_from_string(const std::string& s) {
  if (s == "simulate") return Command::Simulate;
  if (s == "diagram") return Command::Diagram;
  if (s == "scan") return Command::Scan;
  if (s == "validate") return Command::Validate;
  if (s == "moments") return Command::Moments;
  if (s == "crossings") return Command::Crossings;
  throw ConfigError("unknown command '" + s + "'");
}

const char* command_name(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Diagram: return "diagram";
    case Command::Scan: return "scan";
    case Command::Validate: return "validate";
    case Command::Moments: return "moments";
    case Command::Crossings: return "crossings";
  }
  return "moments";
}

Scenario RunConfig::scenario() const {
  try {
    return Scenario(model, n_total, n_cut, init);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void RunConfig::validate() const {
  (void)scenario();
  try {
    sim.validate(n_total);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (double level : experiment.levels) {
    if (!(level > 0.0 && level < 1.0)) {
      throw ConfigError("experiment.levels entries must lie in (0, 1)");
    }
  }
  for (const auto& w : experiment.ci_windows) {
    if (!(w[0] >= 0.0 && w[0] <= w[1])) {
      throw ConfigError("experiment.ci_windows entries must be ordered [lo, hi]");
    }
  }
  if (!(experiment.window_lo >= 0.0 &&
        experiment.window_lo <= experiment.window_hi)) {
    throw ConfigError("experiment.window must be ordered [lo, hi]");
  }
  if (!(experiment.scan_t_lo >= 0.0 &&
        experiment.scan_t_lo <= experiment.scan_t_hi)) {
    throw ConfigError("experiment.scan_window must be ordered [lo, hi]");
  }
  if (experiment.series_stride < 1) {
    throw ConfigError("experiment.series_stride must be >= 1");
  }
}

RunConfig default_config() { return RunConfig{}; }

RunConfig config_from_json(const Json& j) {
  RunConfig cfg;
  const std::string root;
  check_keys(j, root, {"command", "model", "scenario", "sim", "experiment",
                       "output", "workers"});
  if (j.contains("command")) {
    cfg.command = command_from_string(as_string(j["command"], "command"));
  }
  if (j.contains("model")) parse_model(j["model"], "model", cfg.model);
  if (j.contains("scenario")) {
    const Json& s = j["scenario"];
    check_keys(s, "scenario", {"n_total", "n_cut", "init"});
    if (s.contains("n_total"))
      cfg.n_total = as_number(s["n_total"], "scenario.n_total");
    if (s.contains("n_cut")) {
      if (s["n_cut"].is_null()) {
        cfg.n_cut.reset();
      } else {
        cfg.n_cut = as_number(s["n_cut"], "scenario.n_cut");
      }
    }
    if (s.contains("init")) parse_init(s["init"], "scenario.init", cfg.init);
  }
  if (j.contains("sim")) parse_sim(j["sim"], "sim", cfg.sim);
  if (j.contains("experiment"))
    parse_experiment(j["experiment"], "experiment", cfg.experiment);
  if (j.contains("output")) {
    const Json& o = j["output"];
    check_keys(o, "output", {"dir", "svg"});
    if (o.contains("dir"))
      cfg.output_dir = as_string(o["dir"], "output.dir");
    if (o.contains("svg")) cfg.emit_svg = as_bool(o["svg"], "output.svg");
  }
  if (j.contains("workers")) {
    cfg.workers = static_cast<unsigned>(as_count(j["workers"], "workers"));
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

void apply_overrides(RunConfig& cfg, const FlagOverrides& f) {
  if (f.seed) cfg.sim.master_seed = *f.seed;
  if (f.sigma) cfg.model.sigma = *f.sigma;
  if (f.c1) cfg.model.c1 = *f.c1;
  if (f.c2) cfg.model.c2 = *f.c2;
  if (f.v1) cfg.model.v1 = *f.v1;
  if (f.v2) cfg.model.v2 = *f.v2;
  if (f.road_length) cfg.model.road_length = *f.road_length;
  if (f.n_total) cfg.n_total = *f.n_total;
  if (f.n_max) cfg.model.n_max = *f.n_max;
  if (f.n_cut) cfg.n_cut = *f.n_cut;
  if (f.t_end) cfg.sim.t_end = *f.t_end;
  if (f.steps) cfg.sim.n_steps = *f.steps;
  if (f.paths) cfg.experiment.paths = *f.paths;
  if (f.combos) cfg.experiment.combos = *f.combos;
  if (f.sims_per_combo) cfg.experiment.sims_per_combo = *f.sims_per_combo;
  if (f.sample_size) cfg.experiment.sample_size = *f.sample_size;
  if (f.scheme) cfg.sim.scheme = scheme_from_string(*f.scheme, "--scheme");
  if (f.workers) cfg.workers = *f.workers;
  if (f.out_dir) cfg.output_dir = *f.out_dir;
  if (f.svg) cfg.emit_svg = *f.svg;
  if (f.crossing_level) cfg.experiment.crossing_level = *f.crossing_level;
  cfg.validate();
}

Json to_json(const RunConfig& cfg) {
  Json j;
  j["command"] = command_name(cfg.command);
  Json model;
  model["c1"] = cfg.model.c1;
  model["c2"] = cfg.model.c2;
  model["v1"] = cfg.model.v1;
  model["v2"] = cfg.model.v2;
  model["sigma"] = cfg.model.sigma;
  model["n_max"] = cfg.model.n_max;
  model["road_length"] = cfg.model.road_length;
  j["model"] = model;

  Json scenario;
  scenario["n_total"] = cfg.n_total;
  if (cfg.n_cut) scenario["n_cut"] = *cfg.n_cut;
  Json init;
  if (cfg.init.kind == InitPolicy::Kind::FixedValue) {
    init["policy"] = "fixed";
    init["value"] = cfg.init.value;
  } else {
    init["policy"] = "uniform";
    init["lo"] = cfg.init.lo;
    if (cfg.init.hi) init["hi"] = *cfg.init.hi;
  }
  scenario["init"] = init;
  j["scenario"] = scenario;

  Json sim;
  sim["t_end"] = cfg.sim.t_end;
  sim["steps"] = cfg.sim.n_steps;
  sim["scheme"] = scheme_name(cfg.sim.scheme);
  sim["seed"] = cfg.sim.master_seed;
  if (cfg.sim.boundary_epsilon)
    sim["boundary_epsilon"] = *cfg.sim.boundary_epsilon;
  j["sim"] = sim;

  Json exp;
  exp["paths"] = cfg.experiment.paths;
  exp["combos"] = cfg.experiment.combos;
  exp["sims_per_combo"] = cfg.experiment.sims_per_combo;
  exp["sample_size"] = cfg.experiment.sample_size;
  exp["epsilon"] = cfg.experiment.epsilon;
  exp["window"] = {cfg.experiment.window_lo, cfg.experiment.window_hi};
  Json windows = Json::array();
  for (const auto& w : cfg.experiment.ci_windows) {
    windows.push_back({w[0], w[1]});
  }
  exp["ci_windows"] = windows;
  exp["levels"] = cfg.experiment.levels;
  exp["scan_window"] = {cfg.experiment.scan_t_lo, cfg.experiment.scan_t_hi};
  if (cfg.experiment.grid_hi) {
    exp["grid"] = {cfg.experiment.grid_lo, *cfg.experiment.grid_hi};
  }
  exp["scan_c1"] = cfg.experiment.scan_c1;
  exp["scan_sigma"] = cfg.experiment.scan_sigma;
  if (cfg.experiment.crossing_level)
    exp["crossing_level"] = *cfg.experiment.crossing_level;
  exp["series_stride"] = cfg.experiment.series_stride;
  Json sampler;
  sampler["n_lo"] = cfg.experiment.sampler.n_lo;
  sampler["n_hi"] = cfg.experiment.sampler.n_hi;
  sampler["c1_lo"] = cfg.experiment.sampler.c1_lo;
  sampler["c1_hi"] = cfg.experiment.sampler.c1_hi;
  sampler["c2_lo"] = cfg.experiment.sampler.c2_lo;
  sampler["c2_hi"] = cfg.experiment.sampler.c2_hi;
  sampler["sigma_lo"] = cfg.experiment.sampler.sigma_lo;
  sampler["sigma_hi"] = cfg.experiment.sampler.sigma_hi;
  exp["sampler"] = sampler;
  j["experiment"] = exp;

  Json output;
  output["dir"] = cfg.output_dir.string();
  output["svg"] = cfg.emit_svg;
  j["output"] = output;
  j["workers"] = cfg.workers;
  return j;
}

std::string serialize(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

}  // namespace traffic

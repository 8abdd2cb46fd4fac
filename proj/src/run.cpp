#include "traffic/run.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "traffic/analysis.hpp"
#include "traffic/model.hpp"
#include "traffic/parallel.hpp"
#include "traffic/rng.hpp"
#include "traffic/svg.hpp"

namespace traffic {

namespace {

// Per-study seed decorrelation tags.
constexpr std::uint64_t kStudyPaths = 0x53494d;      // simulate
constexpr std::uint64_t kStudyDiagram = 0x444941;    // diagram / scan
constexpr std::uint64_t kStudyMap = 0x4d4150;        // convergence map
constexpr std::uint64_t kStudyCi = 0x4349;           // confidence tables
constexpr std::uint64_t kStudyRatio = 0x524154;      // moment ratios
constexpr std::uint64_t kStudyCross = 0x58494e;      // crossing counts

std::string fmt_u64(std::uint64_t v) { return std::to_string(v); }
std::string fmt_size(std::size_t v) { return std::to_string(v); }
std::string fmt_bool(bool b) { return b ? "1" : "0"; }

/// Config as recorded in the manifest: the output location is dropped so
/// the same run written to two directories yields identical manifests.
Json manifest_config(const RunConfig& cfg) {
  Json j = to_json(cfg);
  j["output"].erase("dir");
  return j;
}

std::string fmt_line(const char* label, double value) {
  std::ostringstream os;
  os << label << " = " << format_double(value);
  return os.str();
}

Table make_series_table(const std::string& name, const std::vector<Path>& paths,
                        std::size_t stride) {
  Table t(name, {"path_index", "t", "n1"});
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const Path& p = paths[i];
    const std::size_t last = p.values.size() - 1;
    for (std::size_t j = 0; j <= last; j += stride) {
      t.add_row({fmt_size(i), format_double(p.times[j]),
                 format_double(p.values[j])});
    }
    if (last % stride != 0) {
      t.add_row({fmt_size(i), format_double(p.times[last]),
                 format_double(p.values[last])});
    }
  }
  return t;
}

Json thresholds_to_json(const ThresholdSet& t) {
  Json j;
  j["alpha"] = t.alpha;
  j["r0"] = t.r0;
  j["r0s"] = t.r0s;
  j["n_c"] = t.n_c;
  j["n_s"] = t.n_s;
  j["delta_n_c"] = t.delta_n_c;
  j["n_c_prime_approx"] = t.n_c_prime_approx;
  j["sigma_sq_freeflow_cap"] = t.sigma_sq_freeflow_cap;
  j["sigma_sq_decay_cap"] = t.sigma_sq_decay_cap;
  if (t.sigma_tilde) j["sigma_tilde"] = *t.sigma_tilde;
  if (t.xi) j["xi"] = *t.xi;
  return j;
}

DiagramOptions diagram_options(const RunConfig& cfg) {
  DiagramOptions opt;
  const double hi = cfg.experiment.grid_hi.value_or(
      cfg.n_cut.value_or(cfg.model.n_max - 1.0));
  opt.n_grid = integer_grid(cfg.experiment.grid_lo, hi);
  opt.sims_per_n = cfg.experiment.paths;
  opt.t_lo = cfg.experiment.scan_t_lo;
  opt.t_hi = cfg.experiment.scan_t_hi;
  opt.n_cut = cfg.n_cut;
  opt.sim = cfg.sim;
  opt.sim.master_seed = sub_seed(cfg.sim.master_seed, kStudyDiagram);
  opt.workers = resolve_workers(cfg.workers);
  return opt;
}

void append_diagram_rows(Table& samples, Table& speeds, Table& points,
                         const DiagramScan& scan, const std::string& cell_id) {
  for (const DiagramPoint& pt : scan.points) {
    for (const DiagramSample& s : pt.samples) {
      std::vector<std::string> row;
      if (!cell_id.empty()) row.push_back(cell_id);
      row.insert(row.end(),
                 {format_double(pt.k), format_double(s.q), fmt_size(s.sim_index),
                  format_double(s.sample_time), fmt_bool(s.free_flow)});
      samples.add_row(row);

      std::vector<std::string> srow;
      if (!cell_id.empty()) srow.push_back(cell_id);
      srow.insert(srow.end(),
                  {format_double(pt.k), fmt_size(s.sim_index),
                   format_double(s.mean_speed), format_double(s.q),
                   fmt_bool(s.free_flow)});
      speeds.add_row(srow);
    }
    std::vector<std::string> prow;
    if (!cell_id.empty()) prow.push_back(cell_id);
    prow.insert(prow.end(),
                {format_double(pt.k), format_double(pt.n_total),
                 format_double(pt.q_det), format_double(pt.q_mean),
                 format_double(pt.q_variance),
                 format_double(pt.free_flow_fraction)});
    points.add_row(prow);
  }
}

// ---------------------------------------------------------------------------

RunOutcome run_simulate(const RunConfig& cfg) {
  const Scenario sc = cfg.scenario();
  SimConfig sim = cfg.sim;
  sim.master_seed = sub_seed(cfg.sim.master_seed, kStudyPaths);
  const auto paths = simulate_ensemble(sc, sim, cfg.experiment.paths,
                                       sc.init_policy(),
                                       resolve_workers(cfg.workers));

  std::vector<Table> tables;
  tables.push_back(
      make_series_table("paths", paths, cfg.experiment.series_stride));
  Table summary("paths_summary", {"path_index", "seed", "n1_final",
                                  "clamp_count", "n1_min", "n1_max"});
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const Path& p = paths[i];
    const auto [mn, mx] = std::minmax_element(p.values.begin(), p.values.end());
    summary.add_row({fmt_size(i), fmt_u64(p.seed),
                     format_double(p.values.back()), fmt_size(p.clamp_count),
                     format_double(*mn), format_double(*mx)});
  }
  tables.push_back(std::move(summary));

  RunOutcome out;
  out.manifest = write_results(cfg.output_dir, manifest_config(cfg),
                               cfg.sim.master_seed, tables);
  std::ostringstream os;
  os << "simulated " << paths.size() << " path(s), t_end="
     << format_double(cfg.sim.t_end) << ", dt=" << format_double(cfg.sim.dt());
  out.summary.push_back(os.str());
  return out;
}

RunOutcome run_moments(const RunConfig& cfg) {
  const Scenario sc = cfg.scenario();
  const RegimeReport rep = classify_regime(sc);

  Json report;
  report["regime"] = regime_name(rep.regime);
  report["thresholds"] = thresholds_to_json(rep.thresholds);
  if (rep.moments) {
    Json m;
    m["mu"] = rep.moments->mu;
    m["gamma"] = rep.moments->gamma;
    m["n1_g"] = rep.moments->n1_g;
    report["moments"] = m;
  } else {
    report["moments"] = nullptr;
  }
  report["notes"] = rep.notes;

  RunOutcome out;
  out.manifest =
      write_results(cfg.output_dir, manifest_config(cfg), cfg.sim.master_seed, {},
                    {{"report.json", report.dump(2) + "\n"}});
  out.summary.push_back(std::string("regime: ") + regime_name(rep.regime));
  out.summary.push_back(fmt_line("r0", rep.thresholds.r0));
  out.summary.push_back(fmt_line("r0s", rep.thresholds.r0s));
  out.summary.push_back(fmt_line("n_c", rep.thresholds.n_c));
  out.summary.push_back(fmt_line("n_s", rep.thresholds.n_s));
  out.summary.push_back(fmt_line("n_c_prime", rep.thresholds.n_c_prime_approx));
  if (rep.thresholds.sigma_tilde)
    out.summary.push_back(fmt_line("sigma_tilde", *rep.thresholds.sigma_tilde));
  if (rep.thresholds.xi) out.summary.push_back(fmt_line("xi", *rep.thresholds.xi));
  if (rep.moments) {
    out.summary.push_back(fmt_line("mu", rep.moments->mu));
    out.summary.push_back(fmt_line("gamma", rep.moments->gamma));
  }
  for (const std::string& n : rep.notes) out.summary.push_back("note: " + n);
  return out;
}

RunOutcome run_diagram(const RunConfig& cfg) {
  const DiagramOptions opt = diagram_options(cfg);
  const DiagramScan scan = fundamental_diagram_scan(cfg.model, opt);

  Table samples("diagram",
                {"k", "q_sample", "sim_index", "sample_time", "is_free_flow"});
  Table speeds("speed_projection",
               {"k", "sim_index", "mean_speed", "q_sample", "is_free_flow"});
  Table points("diagram_points", {"k", "n_total", "q_det", "q_mean",
                                  "q_variance", "free_flow_fraction"});
  append_diagram_rows(samples, speeds, points, scan, "");

  std::vector<NamedBlob> blobs;
  if (cfg.emit_svg) {
    SvgOptions so;
    so.title = "flow-concentration scan";
    blobs.push_back({"diagram.svg", render_svg(scan, so)});
  }

  RunOutcome out;
  out.manifest = write_results(cfg.output_dir, manifest_config(cfg),
                               cfg.sim.master_seed,
                               {samples, speeds, points}, blobs);
  std::ostringstream os;
  os << "diagram scan: " << scan.points.size() << " concentrations x "
     << opt.sims_per_n << " runs";
  out.summary.push_back(os.str());
  if (!scan.truncation_valid) out.summary.push_back("warning: " + scan.warning);
  return out;
}

RunOutcome run_scan(const RunConfig& cfg) {
  GridScanOptions opt;
  opt.c1_values = cfg.experiment.scan_c1;
  opt.sigma_values = cfg.experiment.scan_sigma;
  opt.n_c = critical_n(cfg.model);
  opt.diagram = diagram_options(cfg);

  const GridScanResult grid = parameter_grid_scan(cfg.model, opt);

  Table cells("scan_cells",
              {"cell_index", "c1", "sigma", "c2", "capacity_drop",
               "sig_cond1_ok", "truncation_valid", "n_s"});
  Table samples("scan_samples", {"cell_index", "k", "q_sample", "sim_index",
                                 "sample_time", "is_free_flow"});
  Table speeds("scan_speed_projection",
               {"cell_index", "k", "sim_index", "mean_speed", "q_sample",
                "is_free_flow"});
  Table points("scan_points", {"cell_index", "k", "n_total", "q_det", "q_mean",
                               "q_variance", "free_flow_fraction"});
  std::vector<NamedBlob> blobs;
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    const GridCell& cell = grid.cells[i];
    cells.add_row({fmt_size(i), format_double(cell.c1),
                   format_double(cell.sigma), format_double(cell.c2),
                   cell.capacity_drop ? format_double(*cell.capacity_drop) : "",
                   fmt_bool(cell.sig_cond1_ok),
                   fmt_bool(cell.scan.truncation_valid),
                   format_double(cell.scan.n_s)});
    append_diagram_rows(samples, speeds, points, cell.scan, fmt_size(i));
    if (cfg.emit_svg) {
      SvgOptions so;
      std::ostringstream title;
      title << "c1=" << format_double(cell.c1)
            << " sigma=" << format_double(cell.sigma);
      so.title = title.str();
      std::ostringstream name;
      name << "scan_cell_" << i << ".svg";
      blobs.push_back({name.str(), render_svg(cell.scan, so)});
    }
  }

  RunOutcome out;
  out.manifest =
      write_results(cfg.output_dir, manifest_config(cfg), cfg.sim.master_seed,
                    {cells, samples, speeds, points}, blobs);
  std::ostringstream os;
  os << "parameter grid scan: " << grid.cells.size() << " cells";
  out.summary.push_back(os.str());
  return out;
}

void crossing_tables(const RunConfig& cfg, const Scenario& sc, double level,
                     std::vector<Table>& tables,
                     std::vector<std::string>& summary) {
  SimConfig sim = cfg.sim;
  sim.master_seed = sub_seed(cfg.sim.master_seed, kStudyCross);
  const auto paths = simulate_ensemble(sc, sim, cfg.experiment.paths,
                                       sc.init_policy(),
                                       resolve_workers(cfg.workers));

  Table series("crossings", {"path_index", "t", "cumulative_count"});
  Table summary_table("crossings_summary",
                      {"path_index", "level", "total_count", "count_mid",
                       "ratio_end_mid"});
  std::vector<double> ratios;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const Path& p = paths[i];
    const auto counts = count_crossings(p, level);
    const std::size_t last = counts.size() - 1;
    const std::size_t stride = cfg.experiment.series_stride;
    for (std::size_t j = 0; j <= last; j += stride) {
      series.add_row({fmt_size(i), format_double(p.times[j]),
                      std::to_string(counts[j])});
    }
    if (last % stride != 0) {
      series.add_row({fmt_size(i), format_double(p.times[last]),
                      std::to_string(counts[last])});
    }
    const std::size_t mid = last / 2;
    const double ratio =
        counts[mid] > 0
            ? static_cast<double>(counts[last]) / counts[mid]
            : std::numeric_limits<double>::quiet_NaN();
    if (counts[mid] > 0) ratios.push_back(ratio);
    summary_table.add_row({fmt_size(i), format_double(level),
                           std::to_string(counts[last]),
                           std::to_string(counts[mid]), format_double(ratio)});
  }
  tables.push_back(std::move(series));
  tables.push_back(std::move(summary_table));

  std::ostringstream os;
  os << "crossing study at level " << format_double(level) << " over "
     << paths.size() << " path(s)";
  if (!ratios.empty()) {
    os << ", median end/mid count ratio "
       << format_double(sample_quantile(ratios, 0.5));
  }
  summary.push_back(os.str());
}

RunOutcome run_crossings(const RunConfig& cfg) {
  const Scenario sc = cfg.scenario();
  double level;
  if (cfg.experiment.crossing_level) {
    level = *cfg.experiment.crossing_level;
  } else {
    try {
      level = xi(sc);
    } catch (const std::domain_error& e) {
      throw ConfigError(std::string("crossing level unavailable: ") + e.what() +
                        " (pass an explicit level)");
    }
  }
  std::vector<Table> tables;
  RunOutcome out;
  crossing_tables(cfg, sc, level, tables, out.summary);
  out.manifest = write_results(cfg.output_dir, manifest_config(cfg),
                               cfg.sim.master_seed, tables);
  return out;
}

RunOutcome run_validate(const RunConfig& cfg) {
  const Scenario sc = cfg.scenario();
  const unsigned workers = resolve_workers(cfg.workers);
  std::vector<Table> tables;
  RunOutcome out;

  // Convergence-time map.
  {
    ConvergenceMapOptions opt;
    opt.n_combos = cfg.experiment.combos;
    opt.sims_per_combo = cfg.experiment.sims_per_combo;
    opt.epsilon = cfg.experiment.epsilon;
    opt.ranges = cfg.experiment.sampler;
    opt.base = cfg.model;
    opt.sim = cfg.sim;
    opt.sim.master_seed = sub_seed(cfg.sim.master_seed, kStudyMap);
    opt.workers = workers;
    const ConvergenceMapResult map = convergence_time_map(opt);

    Table t("convergence_map",
            {"combo_id", "n_total", "c1", "c2", "sigma", "r0s", "sigma_sq_cap",
             "mean_t_s", "n_converged", "n_not_converged", "n_truncated"});
    std::size_t total_converged = 0;
    for (const ConvergenceMapRow& r : map.rows) {
      t.add_row({fmt_size(r.combo_id), format_double(r.combo.n_total),
                 format_double(r.combo.c1), format_double(r.combo.c2),
                 format_double(r.combo.sigma), format_double(r.r0s),
                 format_double(r.sigma_sq_cap),
                 r.mean_t_s ? format_double(*r.mean_t_s) : "",
                 fmt_size(r.n_converged), fmt_size(r.n_not_converged),
                 fmt_size(r.n_truncated)});
      total_converged += r.n_converged;
    }
    tables.push_back(std::move(t));
    std::ostringstream os;
    os << "convergence map: " << map.rows.size() << " combos, "
       << total_converged << " converged runs, " << map.n_excluded
       << " sampler draws excluded";
    out.summary.push_back(os.str());
  }

  // Percentile confidence tables, one per window.
  {
    Table t("ci_table",
            {"window_lo", "window_hi", "level", "point_estimate", "lower",
             "upper", "amplitude", "se_lower", "se_upper", "sample_quantile",
             "degenerate"});
    for (std::size_t w = 0; w < cfg.experiment.ci_windows.size(); ++w) {
      const auto& window = cfg.experiment.ci_windows[w];
      CiOptions opt;
      opt.sample_size = cfg.experiment.sample_size;
      opt.levels = cfg.experiment.levels;
      opt.t_lo = window[0];
      opt.t_hi = window[1];
      opt.sim = cfg.sim;
      const double t_end = std::max(cfg.sim.t_end, std::ceil(window[1]));
      opt.sim.t_end = t_end;
      opt.sim.n_steps = static_cast<std::size_t>(
          std::llround(t_end / cfg.sim.dt()));
      opt.sim.master_seed = sub_seed(cfg.sim.master_seed, kStudyCi, w);
      opt.workers = workers;
      const CiTableResult table = ci_table(sc, opt);
      for (const CiRow& r : table.rows) {
        t.add_row({format_double(table.t_lo), format_double(table.t_hi),
                   format_double(r.level), format_double(r.point),
                   format_double(r.lower), format_double(r.upper),
                   format_double(r.amplitude), format_double(r.se_lower),
                   format_double(r.se_upper), format_double(r.sample_quantile),
                   fmt_bool(table.degenerate)});
      }
      std::ostringstream os;
      os << "ci window [" << format_double(window[0]) << ", "
         << format_double(window[1]) << "]: mean "
         << format_double(table.sample_mean) << ", std "
         << format_double(table.sample_std);
      out.summary.push_back(os.str());
    }
    tables.push_back(std::move(t));
  }

  // Stationary moment ratios.
  {
    MomentStudyOptions opt;
    opt.n_combos = cfg.experiment.combos;
    opt.sims_per_combo = cfg.experiment.sims_per_combo;
    opt.t_lo = cfg.experiment.window_lo;
    opt.t_hi = cfg.experiment.window_hi;
    opt.ranges = cfg.experiment.sampler;
    opt.base = cfg.model;
    opt.sim = cfg.sim;
    opt.sim.master_seed = sub_seed(cfg.sim.master_seed, kStudyRatio);
    opt.workers = workers;
    const MomentRatioResult res = moment_ratio_study(opt);

    Table t("moment_ratios",
            {"combo_id", "r0s", "mu_theory", "mu_sim", "ratio_mean",
             "gamma_theory", "gamma_sim", "ratio_var"});
    std::vector<double> rm, rv;
    for (const MomentRatioRow& r : res.rows) {
      t.add_row({fmt_size(r.combo_id), format_double(r.r0s),
                 format_double(r.mu_theory), format_double(r.mu_sim),
                 format_double(r.ratio_mean), format_double(r.gamma_theory),
                 format_double(r.gamma_sim), format_double(r.ratio_var)});
      rm.push_back(r.ratio_mean);
      rv.push_back(r.ratio_var);
    }
    tables.push_back(std::move(t));

    Table s("moment_ratios_summary",
            {"measure", "ratio_of_means", "ratio_of_variances"});
    auto add_stat = [&](const char* name, double a, double b) {
      s.add_row({name, format_double(a), format_double(b)});
    };
    add_stat("mean", res.mean_ratio_of_means, res.mean_ratio_of_variances);
    add_stat("std", res.std_ratio_of_means, res.std_ratio_of_variances);
    if (!rm.empty()) {
      add_stat("min", *std::min_element(rm.begin(), rm.end()),
               *std::min_element(rv.begin(), rv.end()));
      add_stat("p25", sample_quantile(rm, 0.25), sample_quantile(rv, 0.25));
      add_stat("p50", sample_quantile(rm, 0.50), sample_quantile(rv, 0.50));
      add_stat("p75", sample_quantile(rm, 0.75), sample_quantile(rv, 0.75));
      add_stat("max", *std::max_element(rm.begin(), rm.end()),
               *std::max_element(rv.begin(), rv.end()));
    }
    tables.push_back(std::move(s));

    std::ostringstream os;
    os << "moment ratios over " << res.rows.size()
       << " combos: means ratio " << format_double(res.mean_ratio_of_means)
       << ", variances ratio " << format_double(res.mean_ratio_of_variances)
       << " (" << res.n_skipped_invalid << " invalid draws skipped)";
    out.summary.push_back(os.str());
  }

  // Crossing counts at xi, when the scenario is persistent.
  {
    double level = 0.0;
    bool have_level = false;
    if (cfg.experiment.crossing_level) {
      level = *cfg.experiment.crossing_level;
      have_level = true;
    } else {
      try {
        level = xi(sc);
        have_level = true;
      } catch (const std::domain_error&) {
        out.summary.push_back(
            "crossing study skipped: scenario not in the persistence regime");
      }
    }
    if (have_level) crossing_tables(cfg, sc, level, tables, out.summary);
  }

  out.manifest = write_results(cfg.output_dir, manifest_config(cfg),
                               cfg.sim.master_seed, tables);
  return out;
}

}  // namespace

RunOutcome run_command(const RunConfig& cfg) {
  cfg.validate();
  switch (cfg.command) {
    case Command::Simulate: return run_simulate(cfg);
    case Command::Diagram: return run_diagram(cfg);
    case Command::Scan: return run_scan(cfg);
    case Command::Validate: return run_validate(cfg);
    case Command::Moments: return run_moments(cfg);
    case Command::Crossings: return run_crossings(cfg);
  }
  throw ConfigError("unhandled command");
}

}  // namespace traffic

#include "traffic/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "traffic/analysis.hpp"
#include "traffic/model.hpp"
#include "traffic/parallel.hpp"

namespace traffic {

namespace {

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

/// Pre-draws one sampling time per run so that parallel extraction cannot
/// reorder the stream.
std::vector<TimeSample> draw_time_samples(const std::vector<Path>& paths,
                                          double t_lo, double t_hi,
                                          RngStream& rng) {
  std::vector<TimeSample> out;
  out.reserve(paths.size());
  for (const Path& p : paths) {
    out.push_back(sample_at_random_time(p, t_lo, t_hi, rng));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

ConvergenceResult detect_convergence(const Path& path, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  const std::size_t n = path.values.size();
  ConvergenceResult res;
  res.epsilon = epsilon;
  if (n == 0) return res;

  std::vector<char> ok(n);
  for (std::size_t i = 0; i < n; ++i) {
    ok[i] = path.values[i] < std::exp(-epsilon * path.times[i]);
  }
  // next_bad[i]: first index >= i violating the bound, n if none.
  std::vector<std::size_t> next_bad(n + 1);
  next_bad[n] = n;
  for (std::size_t i = n; i-- > 0;) {
    next_bad[i] = ok[i] ? next_bad[i + 1] : i;
  }

  const double dt = path.dt();
  const double t_end = path.times.back();
  for (std::size_t i = 0; i < n; ++i) {
    if (!ok[i]) continue;
    const double t_s = path.times[i];
    const double t_f = 3.0 * t_s;
    std::size_t j_end;
    bool truncated;
    if (t_f >= t_end || dt == 0.0) {
      j_end = n - 1;
      truncated = t_f > t_end;
    } else {
      j_end = std::min<std::size_t>(
          n - 1, static_cast<std::size_t>(std::floor(t_f / dt + 1e-9)));
      truncated = false;
    }
    if (next_bad[i] > j_end) {
      res.t_s = t_s;
      res.converged = true;
      res.truncated = truncated;
      return res;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------

ComboDraw draw_combo(const SamplerRanges& r, RngStream& rng) {
  ComboDraw c;
  const auto span = static_cast<std::size_t>(r.n_hi - r.n_lo) + 1;
  c.n_total = r.n_lo + static_cast<double>(rng.next_index(span));
  c.c1 = rng.next_uniform(r.c1_lo, r.c1_hi);
  c.c2 = rng.next_uniform(r.c2_lo, r.c2_hi);
  c.sigma = rng.next_uniform(r.sigma_lo, r.sigma_hi);
  return c;
}

Scenario combo_scenario(const ModelParams& base, const ComboDraw& combo) {
  ModelParams p = base;
  p.c1 = combo.c1;
  p.c2 = combo.c2;
  p.sigma = combo.sigma;
  return Scenario(p, combo.n_total, std::nullopt, InitPolicy::uniform_to_n());
}

// ---------------------------------------------------------------------------

ConvergenceMapResult convergence_time_map(const ConvergenceMapOptions& opt) {
  ConvergenceMapResult result;
  RngStream sampler =
      RngStream::derive(opt.sim.master_seed, kDomainSampler);

  // Phase 1: sequential combo draws (keeps the sampler stream replayable).
  std::vector<ComboDraw> combos;
  combos.reserve(opt.n_combos);
  for (std::size_t id = 0; id < opt.n_combos; ++id) {
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt > 10000) {
        throw std::runtime_error(
            "convergence_time_map: sampler exclusion zones reject everything");
      }
      const ComboDraw c = draw_combo(opt.ranges, sampler);
      const Scenario sc = combo_scenario(opt.base, c);
      const ThresholdSet t = thresholds(sc);
      const double s2 = c.sigma * c.sigma;
      const bool near_r0s = std::abs(t.r0s - 1.0) < opt.r0s_margin;
      const bool near_cap = std::abs(s2 - t.sigma_sq_freeflow_cap) <
                            opt.cap_margin * t.sigma_sq_freeflow_cap;
      if (near_r0s || near_cap) {
        ++result.n_excluded;
        continue;
      }
      combos.push_back(c);
      break;
    }
  }

  // Phase 2: simulate combos (parallel; rows are keyed by combo id).
  result.rows.resize(opt.n_combos);
  parallel_for_index(opt.n_combos, opt.workers, [&](std::size_t id) {
    const ComboDraw& c = combos[id];
    const Scenario sc = combo_scenario(opt.base, c);
    const ThresholdSet t = thresholds(sc);

    SimConfig sim = opt.sim;
    sim.master_seed = sub_seed(opt.sim.master_seed, kDomainCombos, id);
    const std::vector<Path> paths = simulate_ensemble(
        sc, sim, opt.sims_per_combo, sc.init_policy(), 1);

    ConvergenceMapRow row;
    row.combo_id = id;
    row.combo = c;
    row.r0s = t.r0s;
    row.sigma_sq_cap = t.sigma_sq_freeflow_cap;
    double sum = 0.0;
    for (const Path& p : paths) {
      const ConvergenceResult cr = detect_convergence(p, opt.epsilon);
      if (cr.converged) {
        ++row.n_converged;
        sum += *cr.t_s;
        if (cr.truncated) ++row.n_truncated;
      } else {
        ++row.n_not_converged;
      }
    }
    if (row.n_converged > 0) {
      row.mean_t_s = sum / static_cast<double>(row.n_converged);
    }
    result.rows[id] = std::move(row);
  });
  return result;
}

// ---------------------------------------------------------------------------

std::vector<double> default_ci_levels() {
  return {0.50, 0.75, 0.85, 0.90, 0.95, 0.99, 0.995, 0.999};
}

double student_t_quantile(double level, double df) {
  boost::math::students_t_distribution<double> dist(df);
  return boost::math::quantile(dist, 0.5 * (1.0 + level));
}

CiTableResult ci_table(const Scenario& sc, const CiOptions& opt) {
  if (opt.sample_size < 2) {
    throw std::invalid_argument("ci_table needs sample_size >= 2");
  }
  if (!(opt.t_lo >= 0.0 && opt.t_lo <= opt.t_hi && opt.t_hi <= opt.sim.t_end)) {
    throw std::invalid_argument("ci_table window must lie inside [0, t_end]");
  }

  const std::vector<Path> paths = simulate_ensemble(
      sc, opt.sim, opt.sample_size, sc.init_policy(), opt.workers);
  RngStream t_rng = RngStream::derive(opt.sim.master_seed, kDomainTimes);
  const std::vector<TimeSample> picks =
      draw_time_samples(paths, opt.t_lo, opt.t_hi, t_rng);

  std::vector<double> xs;
  xs.reserve(picks.size());
  for (const TimeSample& s : picks) xs.push_back(s.value);

  const SampleStats stats = sample_stats(xs);
  const double sd = std::sqrt(stats.variance);
  const double df = static_cast<double>(opt.sample_size - 1);
  const double sqrt_n = std::sqrt(static_cast<double>(opt.sample_size));

  CiTableResult table;
  table.t_lo = opt.t_lo;
  table.t_hi = opt.t_hi;
  table.sample_size = opt.sample_size;
  table.sample_mean = stats.mean;
  table.sample_std = sd;
  table.degenerate = (sd == 0.0);
  for (double level : opt.levels) {
    if (!(level > 0.0 && level < 1.0)) {
      throw std::invalid_argument("ci levels must lie in (0, 1)");
    }
    const double tq = student_t_quantile(level, df);
    CiRow row;
    row.level = level;
    row.point = stats.mean;
    row.lower = stats.mean - tq * sd;
    row.upper = stats.mean + tq * sd;
    row.amplitude = row.upper - row.lower;
    row.se_lower = stats.mean - tq * sd / sqrt_n;
    row.se_upper = stats.mean + tq * sd / sqrt_n;
    row.sample_quantile = sample_quantile(xs, level);
    table.rows.push_back(row);
  }
  return table;
}

// ---------------------------------------------------------------------------

MomentRatioResult moment_ratio_study(const MomentStudyOptions& opt) {
  MomentRatioResult result;
  RngStream sampler = RngStream::derive(opt.sim.master_seed, kDomainSampler);

  struct ComboTask {
    ComboDraw combo;
    double r0s = 0.0;
    double mu = 0.0, gamma = 0.0;
  };
  std::vector<ComboTask> tasks;
  tasks.reserve(opt.n_combos);
  for (std::size_t id = 0; id < opt.n_combos; ++id) {
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt > 10000) {
        throw std::runtime_error(
            "moment_ratio_study: no persistent combos in the sampler ranges");
      }
      const ComboDraw c = draw_combo(opt.ranges, sampler);
      const Scenario sc = combo_scenario(opt.base, c);
      const ThresholdSet t = thresholds(sc);
      if (!(t.r0s >= opt.r0s_min)) continue;
      ComboTask task;
      task.combo = c;
      task.r0s = t.r0s;
      try {
        const StationaryMoments m = stationary_moments(sc);
        task.mu = m.mu;
        task.gamma = m.gamma;
      } catch (const std::domain_error&) {
        ++result.n_skipped_invalid;
        continue;
      }
      tasks.push_back(task);
      break;
    }
  }

  result.rows.resize(tasks.size());
  parallel_for_index(tasks.size(), opt.workers, [&](std::size_t id) {
    const ComboTask& task = tasks[id];
    const Scenario sc = combo_scenario(opt.base, task.combo);

    SimConfig sim = opt.sim;
    sim.master_seed = sub_seed(opt.sim.master_seed, kDomainCombos, id);
    const std::vector<Path> paths = simulate_ensemble(
        sc, sim, opt.sims_per_combo, sc.init_policy(), 1);
    RngStream t_rng = RngStream::derive(sim.master_seed, kDomainTimes);
    const std::vector<TimeSample> picks =
        draw_time_samples(paths, opt.t_lo, opt.t_hi, t_rng);

    std::vector<double> xs;
    xs.reserve(picks.size());
    for (const TimeSample& s : picks) xs.push_back(s.value);
    const SampleStats stats = sample_stats(xs);

    MomentRatioRow row;
    row.combo_id = id;
    row.combo = task.combo;
    row.r0s = task.r0s;
    row.mu_theory = task.mu;
    row.mu_sim = stats.mean;
    row.ratio_mean = stats.mean / task.mu;
    row.gamma_theory = task.gamma;
    row.gamma_sim = stats.variance;
    row.ratio_var = stats.variance / task.gamma;
    result.rows[id] = row;
  });

  std::vector<double> rm, rv;
  rm.reserve(result.rows.size());
  rv.reserve(result.rows.size());
  for (const MomentRatioRow& r : result.rows) {
    rm.push_back(r.ratio_mean);
    rv.push_back(r.ratio_var);
  }
  const SampleStats srm = sample_stats(rm);
  const SampleStats srv = sample_stats(rv);
  result.mean_ratio_of_means = srm.mean;
  result.std_ratio_of_means = std::sqrt(srm.variance);
  result.mean_ratio_of_variances = srv.mean;
  result.std_ratio_of_variances = std::sqrt(srv.variance);
  return result;
}

// ---------------------------------------------------------------------------

std::vector<std::uint32_t> count_crossings(const Path& path, double level) {
  const std::size_t n = path.values.size();
  std::vector<std::uint32_t> counts(n, 0);
  if (n == 0) return counts;
  std::uint32_t c = 0;
  int prev = sign_of(path.values[0] - level);
  for (std::size_t i = 1; i < n; ++i) {
    const int s = sign_of(path.values[i] - level);
    if (s == 0) {
      if (prev != 0) ++c;  // exact hit counts once
    } else if (prev != 0 && s != prev) {
      ++c;
    }
    // leaving an exact hit is not a second crossing
    counts[i] = c;
    prev = s;
  }
  return counts;
}

// ---------------------------------------------------------------------------

DiagramScan fundamental_diagram_scan(const ModelParams& params,
                                     const DiagramOptions& opt) {
  params.validate();
  const double upper = opt.n_cut ? std::min(*opt.n_cut, params.n_max)
                                 : params.n_max;
  std::vector<double> grid = opt.n_grid;
  if (grid.empty()) grid = integer_grid(1.0, upper);
  for (double n : grid) {
    if (!(n > 0.0 && n <= upper && n < params.n_max)) {
      std::ostringstream os;
      os << "diagram grid value " << n << " outside (0, min(n_cut, n_max)]";
      throw std::invalid_argument(os.str());
    }
  }
  if (!(opt.t_lo >= 0.0 && opt.t_lo <= opt.t_hi && opt.t_hi <= opt.sim.t_end)) {
    throw std::invalid_argument(
        "diagram sampling window must lie inside [0, t_end]");
  }

  DiagramScan scan;
  scan.n_s = params.c2 * params.n_max / (params.sigma * params.sigma + params.c2);
  if (opt.n_cut && !(*opt.n_cut < scan.n_s)) {
    scan.truncation_valid = false;
    std::ostringstream os;
    os << "truncation check violated: n_cut=" << *opt.n_cut
       << " >= n_s=" << scan.n_s;
    scan.warning = os.str();
  }

  scan.points.resize(grid.size());
  parallel_for_index(grid.size(), opt.workers, [&](std::size_t cell) {
    const double n = grid[cell];
    const InitPolicy init = InitPolicy::uniform(std::min(1.0, n), n);
    const Scenario sc(params, n, opt.n_cut, init);

    SimConfig sim = opt.sim;
    sim.master_seed = sub_seed(opt.sim.master_seed, kDomainCells, cell);
    const std::vector<Path> paths =
        simulate_ensemble(sc, sim, opt.sims_per_n, init, 1);
    RngStream t_rng = RngStream::derive(sim.master_seed, kDomainTimes);
    const std::vector<TimeSample> picks =
        draw_time_samples(paths, opt.t_lo, opt.t_hi, t_rng);

    DiagramPoint pt;
    pt.n_total = n;
    pt.k = n / params.road_length;
    pt.q_det = deterministic_flow(params, n);
    const double q_free = pt.k * params.v2;
    std::vector<double> qs;
    qs.reserve(picks.size());
    for (std::size_t i = 0; i < picks.size(); ++i) {
      DiagramSample s;
      s.sim_index = i;
      s.sample_time = picks[i].t;
      s.n1 = picks[i].value;
      s.q = flow(params, s.n1, n);
      s.mean_speed = s.q * params.road_length / n;
      s.free_flow = s.q >= opt.free_flow_threshold * q_free;
      qs.push_back(s.q);
      pt.samples.push_back(s);
    }
    const SampleStats stats = sample_stats(qs);
    pt.q_mean = stats.mean;
    pt.q_variance = stats.variance;
    std::size_t ff = 0;
    for (const DiagramSample& s : pt.samples) ff += s.free_flow ? 1 : 0;
    pt.free_flow_fraction =
        pt.samples.empty() ? 0.0
                           : static_cast<double>(ff) / pt.samples.size();
    scan.points[cell] = std::move(pt);
  });
  return scan;
}

// ---------------------------------------------------------------------------

GridScanResult parameter_grid_scan(const ModelParams& base,
                                   const GridScanOptions& opt) {
  if (!(opt.n_c > 0.0 && opt.n_c < base.n_max)) {
    throw std::invalid_argument("grid scan n_c must lie in (0, n_max)");
  }
  GridScanResult result;
  std::size_t cell_index = 0;
  for (double c1 : opt.c1_values) {
    for (double sigma : opt.sigma_values) {
      GridCell cell;
      cell.c1 = c1;
      cell.sigma = sigma;
      cell.c2 = c1 * (base.n_max - opt.n_c) / opt.n_c;
      cell.sig_cond1_ok = sigma * sigma <= cell.c2 * cell.c2 / c1;

      ModelParams params = base;
      params.c1 = c1;
      params.c2 = cell.c2;
      params.sigma = sigma;
      params.validate();

      DiagramOptions dopt = opt.diagram;
      dopt.sim.master_seed =
          sub_seed(opt.diagram.sim.master_seed, kDomainCombos, cell_index);
      cell.scan = fundamental_diagram_scan(params, dopt);
      cell.capacity_drop =
          capacity_drop_magnitude(cell.scan, opt.n_c, opt.drop_neighborhood);
      result.cells.push_back(std::move(cell));
      ++cell_index;
    }
  }
  return result;
}

std::optional<double> capacity_drop_magnitude(const DiagramScan& scan,
                                              double n_c, double neighborhood) {
  double best_q = 0.0;
  double best_k = 0.0;
  bool found = false;
  for (const DiagramPoint& pt : scan.points) {
    if (!(pt.n_total > n_c)) continue;
    for (const DiagramSample& s : pt.samples) {
      if (s.free_flow && (!found || s.q > best_q)) {
        best_q = s.q;
        best_k = pt.k;
        found = true;
      }
    }
  }
  if (!found) return std::nullopt;

  double sum = 0.0;
  std::size_t count = 0;
  for (const DiagramPoint& pt : scan.points) {
    if (std::abs(pt.k - best_k) > neighborhood) continue;
    for (const DiagramSample& s : pt.samples) {
      if (!s.free_flow) {
        sum += s.q;
        ++count;
      }
    }
  }
  if (count == 0) return std::nullopt;
  return best_q - sum / static_cast<double>(count);
}

// ---------------------------------------------------------------------------

TimeSample sample_at_random_time(const Path& path, double t_lo, double t_hi,
                                 RngStream& rng) {
  if (path.times.size() < 1 || !(t_lo <= t_hi)) {
    throw std::invalid_argument("invalid path or sampling window");
  }
  const double dt = path.dt();
  std::size_t i_lo, i_hi;
  if (dt == 0.0) {
    i_lo = i_hi = 0;
  } else {
    const double lo = std::max(t_lo, 0.0);
    i_lo = static_cast<std::size_t>(std::max(0.0, std::ceil(lo / dt - 1e-9)));
    i_hi = std::min<std::size_t>(
        path.times.size() - 1,
        static_cast<std::size_t>(std::floor(t_hi / dt + 1e-9)));
  }
  if (i_lo > i_hi) {
    throw std::invalid_argument("sampling window contains no grid points");
  }
  TimeSample s;
  s.index = i_lo + rng.next_index(i_hi - i_lo + 1);
  s.t = path.times[s.index];
  s.value = path.values[s.index];
  return s;
}

SampleStats sample_stats(const std::vector<double>& xs) {
  SampleStats st;
  if (xs.empty()) return st;
  double sum = 0.0;
  for (double x : xs) sum += x;
  st.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) {
      const double d = x - st.mean;
      ss += d * d;
    }
    st.variance = ss / static_cast<double>(xs.size() - 1);
  }
  return st;
}

double sample_quantile(std::vector<double> xs, double p) {
  if (xs.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(xs.begin(), xs.end());
  if (xs.size() == 1) return xs[0];
  const double pos = p * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] + frac * (xs[hi] - xs[lo]);
}

}  // namespace traffic

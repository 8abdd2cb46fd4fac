#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "traffic/params.hpp"
#include "traffic/rng.hpp"
#include "traffic/sde.hpp"

namespace traffic {

// ---------------------------------------------------------------------------
// Convergence-time detection (free-flow decay studies)
// ---------------------------------------------------------------------------

struct ConvergenceResult {
  std::optional<double> t_s;  // time of convergence, when detected
  bool converged = false;
  bool truncated = false;  // sustain window 3*t_s ran past t_end
  double epsilon = 0.1;
};

/// Finds the earliest grid time t_s at which n1(t) < exp(-epsilon*t) holds
/// and keeps holding at every grid point through min(3*t_s, t_end). When
/// the sustain window is cut off by t_end the result is flagged truncated.
ConvergenceResult detect_convergence(const Path& path, double epsilon = 0.1);

// ---------------------------------------------------------------------------
// Random parameter combinations for the validation studies
// ---------------------------------------------------------------------------

struct SamplerRanges {
  double n_lo = 50.0, n_hi = 150.0;  // integer N, inclusive
  double c1_lo = 1.0, c1_hi = 6.0;
  double c2_lo = 1.0, c2_hi = 6.0;
  double sigma_lo = 0.2, sigma_hi = 1.2;
};

struct ComboDraw {
  double n_total = 0.0, c1 = 0.0, c2 = 0.0, sigma = 0.0;
};

/// Draw order is fixed (N, c1, c2, sigma) so streams replay exactly.
ComboDraw draw_combo(const SamplerRanges& ranges, RngStream& rng);

/// Base params with the combo's rates/noise substituted; init U(1, N).
Scenario combo_scenario(const ModelParams& base, const ComboDraw& combo);

// ---------------------------------------------------------------------------
// Convergence-time map
// ---------------------------------------------------------------------------

struct ConvergenceMapOptions {
  std::size_t n_combos = 50;
  std::size_t sims_per_combo = 100;
  double epsilon = 0.1;
  double r0s_margin = 0.1;  // exclusion half-width around r0s = 1
  double cap_margin = 0.1;  // relative exclusion around sigma^2 = c2/(alpha*N)
  SamplerRanges ranges;
  ModelParams base;
  SimConfig sim;
  unsigned workers = 1;
};

struct ConvergenceMapRow {
  std::size_t combo_id = 0;
  ComboDraw combo;
  double r0s = 0.0;
  double sigma_sq_cap = 0.0;  // c2/(alpha*N) for the combo
  std::optional<double> mean_t_s;
  std::size_t n_converged = 0;
  std::size_t n_not_converged = 0;
  std::size_t n_truncated = 0;
};

struct ConvergenceMapResult {
  std::vector<ConvergenceMapRow> rows;
  std::size_t n_excluded = 0;  // sampler draws rejected by the exclusion zones
};

ConvergenceMapResult convergence_time_map(const ConvergenceMapOptions& opt);

// ---------------------------------------------------------------------------
// Percentile confidence tables
// ---------------------------------------------------------------------------

std::vector<double> default_ci_levels();

/// Two-sided Student-t quantile at confidence `level`: the (1+level)/2
/// quantile with `df` degrees of freedom.
double student_t_quantile(double level, double df);

struct CiOptions {
  std::size_t sample_size = 100;
  std::vector<double> levels = default_ci_levels();
  double t_lo = 12.5, t_hi = 14.5;
  SimConfig sim;
  unsigned workers = 1;
};

/// One interval row. The default interval is mean +- t*(sample std); the
/// mean +- t*(std/sqrt(n)) variant and the empirical sample quantile are
/// emitted alongside since the estimator choice is a judgment call.
struct CiRow {
  double level = 0.0;
  double point = 0.0;  // sample mean
  double lower = 0.0, upper = 0.0, amplitude = 0.0;
  double se_lower = 0.0, se_upper = 0.0;
  double sample_quantile = 0.0;
};

struct CiTableResult {
  std::vector<CiRow> rows;
  double t_lo = 0.0, t_hi = 0.0;
  std::size_t sample_size = 0;
  double sample_mean = 0.0, sample_std = 0.0;
  bool degenerate = false;  // zero-variance sample
};

/// Each of sample_size runs contributes n1 at one uniformly random grid
/// time inside [t_lo, t_hi]; intervals use Student-t quantiles at
/// (1+level)/2 with sample_size - 1 degrees of freedom.
CiTableResult ci_table(const Scenario& scenario, const CiOptions& opt);

// ---------------------------------------------------------------------------
// Stationary moment-ratio study
// ---------------------------------------------------------------------------

struct MomentStudyOptions {
  std::size_t n_combos = 50;
  std::size_t sims_per_combo = 100;
  double t_lo = 29.0, t_hi = 29.5;
  double r0s_min = 1.25;  // keep clear of the persistence boundary
  SamplerRanges ranges;
  ModelParams base;
  SimConfig sim;
  unsigned workers = 1;
};

struct MomentRatioRow {
  std::size_t combo_id = 0;
  ComboDraw combo;
  double r0s = 0.0;
  double mu_theory = 0.0, mu_sim = 0.0, ratio_mean = 0.0;
  double gamma_theory = 0.0, gamma_sim = 0.0, ratio_var = 0.0;
};

struct MomentRatioResult {
  std::vector<MomentRatioRow> rows;
  std::size_t n_skipped_invalid = 0;  // draws with out-of-validity moments
  double mean_ratio_of_means = 0.0, std_ratio_of_means = 0.0;
  double mean_ratio_of_variances = 0.0, std_ratio_of_variances = 0.0;
};

MomentRatioResult moment_ratio_study(const MomentStudyOptions& opt);

// ---------------------------------------------------------------------------
// Level crossings
// ---------------------------------------------------------------------------

/// Cumulative crossing counts of (n1(t) - level) per grid time. A crossing
/// is a strict sign change between consecutive grid points; landing exactly
/// on the level counts once.
std::vector<std::uint32_t> count_crossings(const Path& path, double level);

// ---------------------------------------------------------------------------
// Fundamental-diagram scans
// ---------------------------------------------------------------------------

struct DiagramOptions {
  std::vector<double> n_grid;  // empty -> integers 1..n_cut
  std::size_t sims_per_n = 20;
  double t_lo = 25.0, t_hi = 27.0;
  std::optional<double> n_cut = 150.0;
  double free_flow_threshold = 0.85;  // q >= threshold * k * v2
  SimConfig sim;
  unsigned workers = 1;
};

struct DiagramSample {
  std::size_t sim_index = 0;
  double sample_time = 0.0;
  double n1 = 0.0;
  double q = 0.0;
  double mean_speed = 0.0;  // q*L/N
  bool free_flow = false;
};

struct DiagramPoint {
  double n_total = 0.0;
  double k = 0.0;
  double q_det = 0.0;
  double q_mean = 0.0;
  double q_variance = 0.0;
  double free_flow_fraction = 0.0;
  std::vector<DiagramSample> samples;
};

struct DiagramScan {
  std::vector<DiagramPoint> points;
  double n_s = 0.0;
  bool truncation_valid = true;  // n_cut < n_s
  std::string warning;           // set when the truncation check fails
};

DiagramScan fundamental_diagram_scan(const ModelParams& params,
                                     const DiagramOptions& opt);

// ---------------------------------------------------------------------------
// (c1, sigma) parameter-grid scan
// ---------------------------------------------------------------------------

struct GridScanOptions {
  std::vector<double> c1_values{0.5, 1.0, 2.0};
  std::vector<double> sigma_values{0.5, 1.0, 1.2};
  double n_c = 50.0;  // held fixed; c2 = c1*(N_max - N_c)/N_c per cell
  DiagramOptions diagram;
  double drop_neighborhood = 2.0;  // concentration half-window for the drop
};

struct GridCell {
  double c1 = 0.0, sigma = 0.0, c2 = 0.0;
  bool sig_cond1_ok = true;  // sigma^2 <= c2^2/c1
  std::optional<double> capacity_drop;
  DiagramScan scan;
};

struct GridScanResult {
  std::vector<GridCell> cells;
};

GridScanResult parameter_grid_scan(const ModelParams& base,
                                   const GridScanOptions& opt);

/// Best free-flow-classified flow beyond n_c minus the mean congested flow
/// in a +-neighborhood of its concentration; absent when either side has no
/// samples.
std::optional<double> capacity_drop_magnitude(const DiagramScan& scan,
                                              double n_c, double neighborhood);

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

struct TimeSample {
  std::size_t index = 0;
  double t = 0.0;
  double value = 0.0;
};

/// Value of the path at a uniformly random grid time inside [t_lo, t_hi].
TimeSample sample_at_random_time(const Path& path, double t_lo, double t_hi,
                                 RngStream& rng);

struct SampleStats {
  double mean = 0.0;
  double variance = 0.0;  // unbiased (n-1)
};

SampleStats sample_stats(const std::vector<double>& xs);

/// Empirical quantile with linear interpolation between order statistics.
double sample_quantile(std::vector<double> xs, double p);

}  // namespace traffic

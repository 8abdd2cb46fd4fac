#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "traffic/params.hpp"

namespace traffic {

enum class Scheme { EulerMaruyama, Milstein };

/// Time grid and integration controls for one simulation run.
struct SimConfig {
  double t_end = 30.0;
  std::size_t n_steps = 30000;  // dt = t_end / n_steps
  Scheme scheme = Scheme::EulerMaruyama;
  std::uint64_t master_seed = 1;
  /// Projection margin for boundary overshoot; defaults to 1e-9 * N.
  std::optional<double> boundary_epsilon;

  double dt() const { return t_end / static_cast<double>(n_steps); }
  void validate(double n_total) const;
};

/// One simulated trajectory on a uniform grid.
///
/// values[i] stays inside (0, N); discretization overshoots are projected
/// back and audited in clamp_count.
struct Path {
  std::vector<double> times;
  std::vector<double> values;
  std::size_t clamp_count = 0;
  std::uint64_t seed = 0;  // key of the per-path random stream

  double dt() const {
    return times.size() > 1 ? times[1] - times[0] : 0.0;
  }
};

/// Ito drift x*(-c1 + c2*alpha*(N - x)).
double drift(const Scenario& scenario, double x);

/// Diffusion coefficient sigma*alpha*(N - x)*x; degenerates at both
/// boundaries, which is what keeps paths inside (0, N).
double diffusion(const Scenario& scenario, double x);

/// Integrates one path from n1_0 with the stream derived from
/// (config.master_seed, path_index). Bit-identical across reruns.
Path simulate_path(const Scenario& scenario, const SimConfig& config,
                   double n1_0, std::uint64_t path_index = 0);

/// Integrates n_paths independent paths; path i uses the stream derived
/// from (master_seed, i) and, for UniformDraw policies, draws its initial
/// value from that same stream before integrating. Results are ordered by
/// path index regardless of worker count.
std::vector<Path> simulate_ensemble(const Scenario& scenario,
                                    const SimConfig& config,
                                    std::size_t n_paths,
                                    const InitPolicy& init,
                                    unsigned n_workers = 1);

}  // namespace traffic

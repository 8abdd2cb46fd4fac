#pragma once

#include <vector>

#include "traffic/params.hpp"

namespace traffic {

/// Long-time attractor of the noise-free reduced dynamics.
struct DeterministicSteadyState {
  enum class Kind { FreeFlow, Congestion };
  Kind kind = Kind::FreeFlow;
  double n1_star = 0.0;  // slow-state occupation at the attractor
};

/// A point of the flow-concentration curve.
struct FlowPoint {
  double k = 0.0;  // concentration N/L
  double q = 0.0;  // flow [vehicles/time]
};

/// Critical vehicle count N_c = c1*N_max/(c1+c2) separating the linear
/// free-flow branch from the congested branch.
double critical_n(const ModelParams& params);

/// Congested fixed point n1^g = N - (c1/c2)(N_max - N). Positive only for
/// N > N_c; below that the value is the unphysical repulsor.
double congestion_attractor(const Scenario& scenario);

/// FreeFlow(0) for N <= N_c, Congestion(n1^g) above.
DeterministicSteadyState deterministic_steady_state(const Scenario& scenario);

/// Closed-form solution of dn1/dt = n1*(a - b*n1) with
/// a = c2*alpha*N - c1 and b = c2*alpha, started at n1_0 in (0, N).
///
/// Evaluated in an overflow-safe form on both sides of a = 0; converges to
/// the congested attractor for a > 0 and to 0 for a <= 0.
double deterministic_trajectory(const Scenario& scenario, double n1_0,
                                double t);

/// Instantaneous flow q = (n1*v1 + (N - n1)*v2) / L. Rejects n1 outside
/// [0, N].
double flow(const ModelParams& params, double n1, double n_total);

/// Deterministic flow at vehicle count N (steady state composed with flow).
double deterministic_flow(const ModelParams& params, double n_total);

/// Piecewise flow-concentration curve sampled on the given N values
/// (all must lie in (0, N_max)).
std::vector<FlowPoint> deterministic_diagram(const ModelParams& params,
                                             const std::vector<double>& n_grid);

/// Integer grid lo, lo+1, ..., hi as doubles.
std::vector<double> integer_grid(double lo, double hi);

}  // namespace traffic

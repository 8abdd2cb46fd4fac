#pragma once

#include <optional>
#include <string>
#include <vector>

#include "traffic/params.hpp"

namespace traffic {

/// All closed-form stability thresholds for a scenario.
///
/// r0  = alpha*c2*N/c1 is the deterministic stability index;
/// r0s = r0 - alpha^2*sigma^2*N^2/(2*c1) is its noise-corrected version.
/// xi is populated only in the persistence regime (r0s > 1, sigma > 0);
/// sigma_tilde only when r0 > 1 (otherwise no positive noise range exists).
struct ThresholdSet {
  double alpha = 0.0;
  double r0 = 0.0;
  double r0s = 0.0;
  double n_c = 0.0;                 // deterministic free-flow bound
  double n_s = 0.0;                 // stochastic bound c2*N_max/(sigma^2+c2)
  double delta_n_c = 0.0;           // capacity-drop correction (small-sigma form)
  double n_c_prime_approx = 0.0;    // n_c + delta_n_c
  double sigma_sq_freeflow_cap = 0.0;  // c2/(alpha*N)
  double sigma_sq_decay_cap = 0.0;     // c2^2/(2*c1)
  std::optional<double> sigma_tilde;   // noise level at which r0s = 1
  std::optional<double> xi;            // persistence crossing level
};

/// Mean and variance of the stationary distribution in the persistence
/// regime, plus the deterministic attractor for bound checks.
struct StationaryMoments {
  double mu = 0.0;     // stationary mean [vehicles]
  double gamma = 0.0;  // stationary variance [vehicles^2]
  double n1_g = 0.0;   // deterministic congestion attractor
};

enum class Regime {
  FreeFlowStable,        // r0s < 1 and sigma^2 < c2/(alpha*N)
  CongestionPersistent,  // r0s > 1
  NonphysicalDecay,      // sigma^2 > max(c2/(alpha*N), c2^2/(2*c1))
  Indeterminate,
};

const char* regime_name(Regime r);

struct RegimeReport {
  ThresholdSet thresholds;
  std::optional<StationaryMoments> moments;  // attached when persistent
  Regime regime = Regime::Indeterminate;
  std::vector<std::string> notes;  // which inequalities fired / were checked
};

ThresholdSet thresholds(const Scenario& scenario);

/// Persistence crossing level: the positive root of the log-drift f.
/// Requires r0s > 1 and sigma > 0 (use xi_zero_noise_limit for sigma -> 0).
double xi(const Scenario& scenario);

/// sigma -> 0+ limit of xi: N*(1 - c1/(alpha*c2*N)), which equals the
/// congestion attractor.
double xi_zero_noise_limit(const Scenario& scenario);

/// sigma -> sigma_tilde- limit of xi: 0 for r0 <= 2, else N*(r0-2)/(r0-1).
double xi_sigma_tilde_limit(const Scenario& scenario);

/// Noise level at which r0s = 1: sqrt(2*(alpha*c2*N - c1))/(alpha*N).
/// Requires alpha*c2*N > c1 (i.e. r0 > 1).
double sigma_tilde(const Scenario& scenario);

/// Stationary mean/variance. Requires r0s > 1; throws std::domain_error
/// marked "out of validity" if the mean's denominator is non-positive.
StationaryMoments stationary_moments(const Scenario& scenario);

/// Drift of log n1 along the solution:
/// f(x) = c2*alpha*N - c1 - c2*alpha*x - (1/2)*sigma^2*alpha^2*(N-x)^2.
/// f(0) = (r0s-1)*c1, f(N) = -c1 and f(xi) = 0 in the persistence regime.
double log_drift(const Scenario& scenario, double x);

/// Argmax of the log-drift: N - c2/(sigma^2*alpha), clipped to [0, N]
/// (0 when sigma = 0, where f is decreasing).
double log_drift_argmax(const Scenario& scenario);

/// Assembles the regime classification from the stability conditions. The
/// three condition sets are mutually exclusive; anything that fires none
/// of them (boundaries) reports Indeterminate.
RegimeReport classify_regime(const Scenario& scenario);

}  // namespace traffic

#pragma once

#include <optional>
#include <string>

namespace traffic {

/// Structural constants of the two-speed-state model.
///
/// Vehicles transition between a slow state (speed v1) and a fast state
/// (speed v2) with rates c1 (slow -> fast) and c2 (fast -> slow, congestion
/// amplified). sigma scales the multiplicative noise on the gain term.
struct ModelParams {
  double c1 = 1.0;           // slow->fast transition rate [1/time]
  double c2 = 3.0;           // fast->slow transition rate [1/time]
  double v1 = 10.0;          // slow-state speed [length/time]
  double v2 = 60.0;          // fast-state speed [length/time]
  double sigma = 1.0;        // noise intensity, same units as c2
  double n_max = 200.0;      // maximum occupancy [vehicles]
  double road_length = 1.0;  // section length L

  /// Throws std::invalid_argument naming the violated field.
  void validate() const;
};

/// How the initial slow-state occupation n1(0) of a simulated path is chosen.
struct InitPolicy {
  enum class Kind { FixedValue, UniformDraw };

  Kind kind = Kind::UniformDraw;
  double value = 0.0;           // FixedValue only
  double lo = 1.0;              // UniformDraw lower bound
  std::optional<double> hi;     // UniformDraw upper bound; defaults to n_total

  static InitPolicy fixed(double x);
  static InitPolicy uniform(double lo, double hi);
  static InitPolicy uniform_to_n();  // U(1, n_total), the usual choice
};

/// A model instance at a fixed total vehicle count N.
///
/// Keeps 0 < N < N_max so that alpha = 1/(N_max - N) stays finite and
/// positive. n_cut, when present, is the concentration truncation used by
/// diagram scans (N <= n_cut < N_max).
class Scenario {
 public:
  Scenario(ModelParams params, double n_total,
           std::optional<double> n_cut = std::nullopt,
           InitPolicy init = InitPolicy::uniform_to_n());

  const ModelParams& params() const { return params_; }
  double n_total() const { return n_total_; }
  std::optional<double> n_cut() const { return n_cut_; }
  const InitPolicy& init_policy() const { return init_; }

  /// Congestion amplification factor 1/(N_max - N).
  double alpha() const { return 1.0 / (params_.n_max - n_total_); }

 private:
  ModelParams params_;
  double n_total_;
  std::optional<double> n_cut_;
  InitPolicy init_;
};

}  // namespace traffic

#include "traffic/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace traffic {

double critical_n(const ModelParams& params) {
  return params.c1 * params.n_max / (params.c1 + params.c2);
}

double congestion_attractor(const Scenario& scenario) {
  const ModelParams& p = scenario.params();
  return scenario.n_total() -
         (p.c1 / p.c2) * (p.n_max - scenario.n_total());
}

DeterministicSteadyState deterministic_steady_state(const Scenario& scenario) {
  DeterministicSteadyState s;
  if (scenario.n_total() <= critical_n(scenario.params())) {
    s.kind = DeterministicSteadyState::Kind::FreeFlow;
    s.n1_star = 0.0;
  } else {
    s.kind = DeterministicSteadyState::Kind::Congestion;
    s.n1_star = congestion_attractor(scenario);
  }
  return s;
}

double deterministic_trajectory(const Scenario& scenario, double n1_0,
                                double t) {
  if (!(n1_0 > 0.0 && n1_0 < scenario.n_total())) {
    std::ostringstream os;
    os << "n1_0 must lie in (0, N) (got " << n1_0 << ", N="
       << scenario.n_total() << ")";
    throw std::invalid_argument(os.str());
  }
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("t must be finite and >= 0");
  }
  const ModelParams& p = scenario.params();
  const double al = scenario.alpha();
  const double a = p.c2 * al * scenario.n_total() - p.c1;
  const double b = p.c2 * al;
  if (a == 0.0) {
    return n1_0 / (1.0 + b * n1_0 * t);
  }
  if (a > 0.0) {
    // x = a*x0 / ((a - b*x0) e^{-a t} + b*x0): no overflow for large t.
    const double e = std::exp(-a * t);
    return a * n1_0 / ((a - b * n1_0) * e + b * n1_0);
  }
  // a < 0: e^{a t} <= 1, denominator stays strictly negative.
  const double e = std::exp(a * t);
  return a * n1_0 * e / (a + b * n1_0 * (e - 1.0));
}

double flow(const ModelParams& params, double n1, double n_total) {
  if (!(n1 >= 0.0 && n1 <= n_total)) {
    std::ostringstream os;
    os << "n1 must lie in [0, N] (got n1=" << n1 << ", N=" << n_total << ")";
    throw std::invalid_argument(os.str());
  }
  return (n1 * params.v1 + (n_total - n1) * params.v2) / params.road_length;
}

double deterministic_flow(const ModelParams& params, double n_total) {
  const double n_c = critical_n(params);
  const double k = n_total / params.road_length;
  if (n_total <= n_c) {
    return k * params.v2;
  }
  const double k_c = n_c / params.road_length;
  const double q_c = k_c * params.v2;
  const double slope = params.v1 - (params.c1 / params.c2) * (params.v2 - params.v1);
  return q_c + slope * (k - k_c);
}

std::vector<FlowPoint> deterministic_diagram(
    const ModelParams& params, const std::vector<double>& n_grid) {
  params.validate();
  std::vector<FlowPoint> out;
  out.reserve(n_grid.size());
  for (double n : n_grid) {
    if (!(n > 0.0 && n < params.n_max)) {
      std::ostringstream os;
      os << "diagram grid value must lie in (0, N_max) (got " << n << ")";
      throw std::invalid_argument(os.str());
    }
    out.push_back({n / params.road_length, deterministic_flow(params, n)});
  }
  return out;
}

std::vector<double> integer_grid(double lo, double hi) {
  std::vector<double> g;
  for (double n = std::ceil(lo); n <= hi; n += 1.0) g.push_back(n);
  return g;
}

}  // namespace traffic

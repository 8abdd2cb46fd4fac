#include "traffic/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "traffic/model.hpp"

namespace traffic {

namespace {

double stability_index(const Scenario& sc) {
  const ModelParams& p = sc.params();
  const double al = sc.alpha();
  return al * p.c2 * sc.n_total() / p.c1;
}

double noise_correction(const Scenario& sc) {
  const ModelParams& p = sc.params();
  const double al = sc.alpha();
  const double n = sc.n_total();
  return al * al * p.sigma * p.sigma * n * n / (2.0 * p.c1);
}

double xi_from(const Scenario& sc) {
  const ModelParams& p = sc.params();
  const double al = sc.alpha();
  const double s2 = p.sigma * p.sigma;
  // Conjugate form of the upper root of the log-drift quadratic,
  // xi = N - 2*c1 / (alpha*(sqrt(c2^2 - 2*sigma^2*c1) + c2)):
  // equivalent to the direct quadratic-root expression but free of the
  // small-sigma cancellation. The radicand is positive whenever r0s > 1.
  const double root = std::sqrt(std::max(p.c2 * p.c2 - 2.0 * s2 * p.c1, 0.0));
  return sc.n_total() - 2.0 * p.c1 / (al * (root + p.c2));
}

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::FreeFlowStable: return "FreeFlowStable";
    case Regime::CongestionPersistent: return "CongestionPersistent";
    case Regime::NonphysicalDecay: return "NonphysicalDecay";
    case Regime::Indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

ThresholdSet thresholds(const Scenario& sc) {
  const ModelParams& p = sc.params();
  ThresholdSet t;
  t.alpha = sc.alpha();
  t.r0 = stability_index(sc);
  t.r0s = t.r0 - noise_correction(sc);
  t.n_c = critical_n(p);
  t.n_s = p.c2 * p.n_max / (p.sigma * p.sigma + p.c2);
  t.delta_n_c = p.c1 * p.sigma * p.sigma / (2.0 * p.c2 * (p.c1 + p.c2));
  t.n_c_prime_approx = t.n_c + t.delta_n_c;
  t.sigma_sq_freeflow_cap = p.c2 / (t.alpha * sc.n_total());
  t.sigma_sq_decay_cap = p.c2 * p.c2 / (2.0 * p.c1);
  if (t.r0 > 1.0) t.sigma_tilde = sigma_tilde(sc);
  if (t.r0s > 1.0 && p.sigma > 0.0) t.xi = xi_from(sc);
  return t;
}

double xi(const Scenario& sc) {
  const double r0s = stability_index(sc) - noise_correction(sc);
  if (!(r0s > 1.0)) {
    std::ostringstream os;
    os << "xi is defined only in the persistence regime r0s > 1 (got r0s="
       << r0s << ")";
    throw std::domain_error(os.str());
  }
  if (sc.params().sigma == 0.0) {
    throw std::domain_error(
        "xi is undefined at sigma = 0; use xi_zero_noise_limit");
  }
  return xi_from(sc);
}

double xi_zero_noise_limit(const Scenario& sc) {
  const ModelParams& p = sc.params();
  const double al = sc.alpha();
  const double n = sc.n_total();
  return n * (1.0 - p.c1 / (al * p.c2 * n));
}

double xi_sigma_tilde_limit(const Scenario& sc) {
  const double r0 = stability_index(sc);
  if (!(r0 > 1.0)) {
    throw std::domain_error("xi sigma-tilde limit requires r0 > 1");
  }
  if (r0 <= 2.0) return 0.0;
  return sc.n_total() * (r0 - 2.0) / (r0 - 1.0);
}

double sigma_tilde(const Scenario& sc) {
  const ModelParams& p = sc.params();
  const double al = sc.alpha();
  const double n = sc.n_total();
  const double gap = al * p.c2 * n - p.c1;
  if (!(gap > 0.0)) {
    std::ostringstream os;
    os << "sigma_tilde requires alpha*c2*N > c1 (got alpha*c2*N="
       << al * p.c2 * n << ", c1=" << p.c1 << ")";
    throw std::domain_error(os.str());
  }
  return std::sqrt(2.0 * gap) / (al * n);
}

StationaryMoments stationary_moments(const Scenario& sc) {
  const ModelParams& p = sc.params();
  const double al = sc.alpha();
  const double n = sc.n_total();
  const double s2 = p.sigma * p.sigma;
  const double r0s = stability_index(sc) - noise_correction(sc);
  if (!(r0s > 1.0)) {
    std::ostringstream os;
    os << "stationary moments require r0s > 1 (got r0s=" << r0s << ")";
    throw std::domain_error(os.str());
  }
  const double denom = 2.0 * p.c2 * (al * p.c2 - al * al * s2 * n) +
                       al * s2 * (al * p.c2 * n - p.c1);
  if (!(denom > 0.0)) {
    std::ostringstream os;
    os << "stationary mean out of validity: non-positive denominator ("
       << denom << ")";
    throw std::domain_error(os.str());
  }
  StationaryMoments m;
  m.mu = 2.0 * p.c2 * (r0s - 1.0) * p.c1 / denom;
  m.gamma = m.mu * (al * p.c2 * n - p.c1) / (al * p.c2) - m.mu * m.mu;
  m.n1_g = congestion_attractor(sc);
  return m;
}

double log_drift(const Scenario& sc, double x) {
  const ModelParams& p = sc.params();
  const double al = sc.alpha();
  const double n = sc.n_total();
  const double d = n - x;
  return p.c2 * al * n - p.c1 - p.c2 * al * x -
         0.5 * p.sigma * p.sigma * al * al * d * d;
}

double log_drift_argmax(const Scenario& sc) {
  const ModelParams& p = sc.params();
  if (p.sigma == 0.0) return 0.0;  // f is strictly decreasing
  const double x_hat = sc.n_total() - p.c2 / (p.sigma * p.sigma * sc.alpha());
  return std::clamp(x_hat, 0.0, sc.n_total());
}

RegimeReport classify_regime(const Scenario& sc) {
  const ModelParams& p = sc.params();
  RegimeReport rep;
  rep.thresholds = thresholds(sc);
  const ThresholdSet& t = rep.thresholds;
  const double s2 = p.sigma * p.sigma;

  const bool free_flow = t.r0s < 1.0 && s2 < t.sigma_sq_freeflow_cap;
  const bool persistent = t.r0s > 1.0;
  const bool decay = s2 > t.sigma_sq_freeflow_cap && s2 > t.sigma_sq_decay_cap;

  std::ostringstream note;
  note << "r0s=" << t.r0s << ", sigma^2=" << s2
       << ", c2/(alpha*N)=" << t.sigma_sq_freeflow_cap
       << ", c2^2/(2*c1)=" << t.sigma_sq_decay_cap;
  rep.notes.push_back(note.str());

  const int fired = int(free_flow) + int(persistent) + int(decay);
  if (fired == 1) {
    if (free_flow) {
      rep.regime = Regime::FreeFlowStable;
      rep.notes.push_back("free flow: r0s < 1 and sigma^2 < c2/(alpha*N)");
    } else if (persistent) {
      rep.regime = Regime::CongestionPersistent;
      rep.notes.push_back("persistence: r0s > 1");
      try {
        rep.moments = stationary_moments(sc);
      } catch (const std::domain_error& e) {
        rep.notes.push_back(std::string("moments unavailable: ") + e.what());
      }
    } else {
      rep.regime = Regime::NonphysicalDecay;
      rep.notes.push_back(
          "nonphysical decay: sigma^2 > max(c2/(alpha*N), c2^2/(2*c1))");
    }
  } else {
    rep.regime = Regime::Indeterminate;
    rep.notes.push_back(fired == 0 ? "no classification condition holds"
                                   : "conflicting classification conditions");
  }

  // Parameter-range validity checks used by the diagram studies.
  const bool sig_cond1 = s2 <= p.c2 * p.c2 / p.c1;  // N_c <= N_s
  rep.notes.push_back(sig_cond1
                          ? "sigma^2 <= c2^2/c1: deterministic bound governs"
                          : "sigma^2 > c2^2/c1: stochastic bound governs");
  if (sc.n_cut()) {
    const bool sig_cond2 = *sc.n_cut() < t.n_s;
    std::ostringstream os;
    os << "n_cut=" << *sc.n_cut() << (sig_cond2 ? " < " : " >= ")
       << "n_s=" << t.n_s
       << (sig_cond2 ? ": truncation valid" : ": truncation check violated");
    rep.notes.push_back(os.str());
  }
  return rep;
}

}  // namespace traffic

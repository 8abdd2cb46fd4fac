#include "traffic/sde.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "traffic/parallel.hpp"
#include "traffic/rng.hpp"

namespace traffic {

namespace {

double resolve_epsilon(const SimConfig& cfg, double n_total) {
  return cfg.boundary_epsilon.value_or(1e-9 * n_total);
}

Path integrate(const Scenario& sc, const SimConfig& cfg, double n1_0,
               RngStream rng, std::uint64_t seed) {
  const ModelParams& p = sc.params();
  const double n = sc.n_total();
  const double al = sc.alpha();
  const double c2a = p.c2 * al;
  const double sa = p.sigma * al;
  const double dt = cfg.dt();
  const double sqrt_dt = std::sqrt(dt);
  const double eps = resolve_epsilon(cfg, n);
  const bool milstein = cfg.scheme == Scheme::Milstein;

  Path path;
  path.seed = seed;
  path.times.resize(cfg.n_steps + 1);
  path.values.resize(cfg.n_steps + 1);
  for (std::size_t i = 0; i <= cfg.n_steps; ++i) {
    path.times[i] = dt * static_cast<double>(i);
  }
  path.times[cfg.n_steps] = cfg.t_end;

  double x = n1_0;
  path.values[0] = x;
  for (std::size_t i = 0; i < cfg.n_steps; ++i) {
    const double z = rng.next_normal();
    const double mu = x * (-p.c1 + c2a * (n - x));
    const double g = sa * (n - x) * x;
    double next = x + mu * dt + g * sqrt_dt * z;
    if (milstein) {
      // (1/2) g g' (dW^2 - dt) with g' = sigma*alpha*(N - 2x).
      next += 0.5 * g * sa * (n - 2.0 * x) * (z * z - 1.0) * dt;
    }
    if (!std::isfinite(next)) {
      std::ostringstream os;
      os << "non-finite state at step " << i + 1 << " (x=" << x << ")";
      throw std::runtime_error(os.str());
    }
    if (next < eps) {
      next = eps;
      ++path.clamp_count;
    } else if (next > n - eps) {
      next = n - eps;
      ++path.clamp_count;
    }
    x = next;
    path.values[i + 1] = x;
  }
  return path;
}

double draw_initial(const Scenario& sc, const SimConfig& cfg,
                    const InitPolicy& init, RngStream& rng) {
  const double n = sc.n_total();
  const double eps = resolve_epsilon(cfg, n);
  double x0;
  if (init.kind == InitPolicy::Kind::FixedValue) {
    x0 = init.value;
  } else {
    x0 = rng.next_uniform(init.lo, init.hi.value_or(n));
  }
  // Degenerate policies (e.g. U(1, 1) at N = 1) may land on a boundary;
  // project like any other boundary contact.
  return std::clamp(x0, eps, n - eps);
}

}  // namespace

void SimConfig::validate(double n_total) const {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("t_end must be finite and > 0");
  }
  if (n_steps < 1) {
    throw std::invalid_argument("n_steps must be >= 1");
  }
  const double eps = boundary_epsilon.value_or(1e-9 * n_total);
  if (!(eps > 0.0 && eps < n_total / 2.0)) {
    std::ostringstream os;
    os << "boundary_epsilon must lie in (0, N/2) (got " << eps << ")";
    throw std::invalid_argument(os.str());
  }
}

double drift(const Scenario& sc, double x) {
  const ModelParams& p = sc.params();
  return x * (-p.c1 + p.c2 * sc.alpha() * (sc.n_total() - x));
}

double diffusion(const Scenario& sc, double x) {
  const ModelParams& p = sc.params();
  return p.sigma * sc.alpha() * (sc.n_total() - x) * x;
}

Path simulate_path(const Scenario& sc, const SimConfig& cfg, double n1_0,
                   std::uint64_t path_index) {
  cfg.validate(sc.n_total());
  if (!std::isfinite(n1_0) || !(n1_0 > 0.0 && n1_0 < sc.n_total())) {
    std::ostringstream os;
    os << "n1_0 must lie in (0, N) (got " << n1_0 << ", N=" << sc.n_total()
       << ")";
    throw std::invalid_argument(os.str());
  }
  const std::uint64_t seed = sub_seed(cfg.master_seed, kDomainPaths, path_index);
  return integrate(sc, cfg, n1_0, RngStream(seed), seed);
}

std::vector<Path> simulate_ensemble(const Scenario& sc, const SimConfig& cfg,
                                    std::size_t n_paths,
                                    const InitPolicy& init,
                                    unsigned n_workers) {
  cfg.validate(sc.n_total());
  if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
  if (init.kind == InitPolicy::Kind::FixedValue &&
      !(init.value > 0.0 && init.value < sc.n_total())) {
    throw std::invalid_argument("init value must lie in (0, N)");
  }

  std::vector<Path> out(n_paths);
  std::vector<std::pair<std::size_t, std::string>> failures;
  std::mutex failure_mutex;
  parallel_for_index(n_paths, n_workers, [&](std::size_t i) {
    const std::uint64_t seed = sub_seed(cfg.master_seed, kDomainPaths, i);
    RngStream rng(seed);
    try {
      const double x0 = draw_initial(sc, cfg, init, rng);
      out[i] = integrate(sc, cfg, x0, std::move(rng), seed);
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      failures.emplace_back(i, e.what());
    }
  });
  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end());
    std::ostringstream os;
    os << failures.size() << " path(s) failed:";
    for (const auto& [idx, msg] : failures) {
      os << " [" << idx << "] " << msg << ";";
    }
    throw std::runtime_error(os.str());
  }
  return out;
}

}  // namespace traffic

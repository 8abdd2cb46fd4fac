#include "traffic/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace traffic {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) {
    std::ostringstream os;
    os << name << " must be finite (got " << x << ")";
    fail(os.str());
  }
}

}  // namespace

void ModelParams::validate() const {
  require_finite(c1, "c1");
  require_finite(c2, "c2");
  require_finite(v1, "v1");
  require_finite(v2, "v2");
  require_finite(sigma, "sigma");
  require_finite(n_max, "n_max");
  require_finite(road_length, "road_length");
  if (c1 <= 0.0) fail("c1 must be > 0");
  if (c2 <= 0.0) fail("c2 must be > 0");
  if (v1 < 0.0) fail("v1 must be >= 0");
  if (v2 <= v1) fail("v2 must be > v1");
  if (sigma < 0.0) fail("sigma must be >= 0");
  if (n_max <= 0.0) fail("n_max must be > 0");
  if (road_length <= 0.0) fail("road_length must be > 0");
}

InitPolicy InitPolicy::fixed(double x) {
  InitPolicy p;
  p.kind = Kind::FixedValue;
  p.value = x;
  return p;
}

InitPolicy InitPolicy::uniform(double lo, double hi) {
  InitPolicy p;
  p.kind = Kind::UniformDraw;
  p.lo = lo;
  p.hi = hi;
  return p;
}

InitPolicy InitPolicy::uniform_to_n() {
  InitPolicy p;
  p.kind = Kind::UniformDraw;
  p.lo = 1.0;
  p.hi.reset();
  return p;
}

Scenario::Scenario(ModelParams params, double n_total,
                   std::optional<double> n_cut, InitPolicy init)
    : params_(params), n_total_(n_total), n_cut_(n_cut), init_(init) {
  params_.validate();
  require_finite(n_total_, "n_total");
  if (!(n_total_ > 0.0 && n_total_ < params_.n_max)) {
    std::ostringstream os;
    os << "n_total must satisfy 0 < n_total < n_max (got n_total=" << n_total_
       << ", n_max=" << params_.n_max << ")";
    fail(os.str());
  }
  if (n_cut_) {
    require_finite(*n_cut_, "n_cut");
    if (!(*n_cut_ >= n_total_ && *n_cut_ < params_.n_max)) {
      std::ostringstream os;
      os << "n_cut must satisfy n_total <= n_cut < n_max (got n_cut=" << *n_cut_
         << ", n_total=" << n_total_ << ", n_max=" << params_.n_max << ")";
      fail(os.str());
    }
  }
  switch (init_.kind) {
    case InitPolicy::Kind::FixedValue:
      require_finite(init_.value, "init.value");
      if (!(init_.value > 0.0 && init_.value < n_total_)) {
        fail("init.value must lie in (0, n_total)");
      }
      break;
    case InitPolicy::Kind::UniformDraw: {
      if (!init_.hi) init_.hi = n_total_;
      require_finite(init_.lo, "init.lo");
      require_finite(*init_.hi, "init.hi");
      if (!(init_.lo >= 0.0 && init_.lo <= *init_.hi && *init_.hi <= n_total_)) {
        fail("init uniform bounds must satisfy 0 <= lo <= hi <= n_total");
      }
      break;
    }
  }
}

}  // namespace traffic

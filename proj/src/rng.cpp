#include "traffic/rng.hpp"

#include <cmath>

namespace traffic {

double RngStream::next_normal() {
  // u1 in (0, 1] keeps the log finite; u2 in [0, 1).
  const double u1 =
      static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace traffic

#include "rdnet/rng.hpp"

#include <cmath>
#include <numbers>

namespace rdnet {

std::uint64_t CounterRng::below(std::uint64_t bound) noexcept {
  // Rejection on the top of the range keeps the result exactly uniform.
  const std::uint64_t limit = max() - (max() % bound);
  std::uint64_t x;
  do x = (*this)();
  while (x >= limit);
  return x % bound;
}

double CounterRng::normal() noexcept {
  // Box-Muller, one variate per call; no hidden cache so draws stay position-stable.
  const double u1 = uniform_open();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double CounterRng::gamma(double shape) noexcept {
  if (shape < 1.0) {
    // Boost: G(a) = G(a + 1) * U^(1/a).
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform_open(), 1.0 / shape);
  }
  // Marsaglia & Tsang (2000).
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double CounterRng::beta(double a, double b) noexcept {
  const double x = gamma(a);
  const double y = gamma(b);
  return x / (x + y);
}

}  // namespace rdnet

#include "urbanfuse/rng.hpp"

#include <cmath>
#include <numbers>

#include "urbanfuse/error.hpp"

namespace urbanfuse {

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::invalid_argument, "Rng::below needs n >= 1");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Reject the tail of the 64-bit range that would bias the modulo.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return static_cast<std::size_t>(draw % bound);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace urbanfuse

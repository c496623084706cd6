#include "mna/rng.hpp"

#include <cmath>

namespace mna {

std::uint64_t Rng::geometric_failures(double p) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (p >= 1.0) return 0;
  if (p <= 0.0) return kMax;
  // Inversion: floor(log U / log(1 - p)) with U in (0, 1].
  const double k = std::floor(std::log(uniform_open_closed()) / std::log1p(-p));
  if (!(k < 0x1.0p63)) return kMax;
  return static_cast<std::uint64_t>(k);
}

}  // namespace mna

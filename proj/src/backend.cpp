#include <cmath>
#include <stdexcept>

#include "fksteer/backend.hpp"

namespace fks {

std::string to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::discrete:
      return "discrete";
    case BackendKind::gaussian:
      return "gaussian";
    case BackendKind::chainmol:
      return "chainmol";
  }
  return "unknown";
}

std::vector<double> turn_angles(std::span<const double> xy) {
  const std::size_t n = xy.size() / 2;
  std::vector<double> angles;
  if (n < 3) return angles;
  angles.reserve(n - 2);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double b1x = xy[2 * i] - xy[2 * i - 2];
    const double b1y = xy[2 * i + 1] - xy[2 * i - 1];
    const double b2x = xy[2 * i + 2] - xy[2 * i];
    const double b2y = xy[2 * i + 3] - xy[2 * i + 1];
    angles.push_back(std::atan2(b1x * b2y - b1y * b2x, b1x * b2x + b1y * b2y));
  }
  return angles;
}

}  // namespace fks

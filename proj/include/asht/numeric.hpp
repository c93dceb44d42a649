#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace asht {

/// Ceiling that ignores floating residue: values within a relative 1e-9 of an
/// integer round to that integer, so ceil(ln 100 / ln 100 + 1) stays 2.
inline std::size_t ceil_count(double x) {
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x))) x = nearest;
  return static_cast<std::size_t>(std::max(0.0, std::ceil(x)));
}

}  // namespace asht

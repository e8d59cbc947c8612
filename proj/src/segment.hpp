#pragma once

#include <algorithm>

#include "aoc/core_model.hpp"

namespace aoc::detail {

/// V evaluated from inside the segment [lo, hi], so jumps at the ends take the segment's side.
inline double segment_value(const Potential& V, double x, double lo, double hi) {
  double eps = 1e-13 * (hi - lo);
  return V(std::clamp(x, lo + eps, hi - eps));
}

}  // namespace aoc::detail

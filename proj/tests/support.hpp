#pragma once

#include <cstdint>
#include <random>

#include "nisr/grid.hpp"
#include "nisr/image.hpp"

namespace nisr::testing {

inline RealGrid random_grid(int rows, int cols, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  RealGrid g(rows, cols);
  for (double& v : g.values()) v = d(rng);
  return g;
}

/// Smooth random texture in [0, 1].
inline GrayImage random_texture(int rows, int cols, std::uint64_t seed, double sigma = 2.0) {
  std::mt19937_64 rng(seed);
  RealGrid g = smooth(random_grid(rows, cols, rng), gaussian_kernel(sigma));
  double lo = 1e9, hi = -1e9;
  for (double v : g.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double& v : g.values()) v = (v - lo) / (hi - lo);
  return GrayImage(std::move(g));
}

}  // namespace nisr::testing

// SPDX-License-Identifier: Apache-2.0
#include "mxisac/rng.hpp"

#include <cmath>

namespace mxisac {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform(double lo, double hi) {
  // 53-bit mantissa draw; std::uniform_real_distribution is not reproducible
  // across standard libraries.
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double Rng::normal() {
  // Box-Muller on our own uniforms keeps streams identical across toolchains.
  double u1 = uniform(0.0, 1.0);
  while (u1 <= 0.0) u1 = uniform(0.0, 1.0);
  const double u2 = uniform(0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

cd Rng::complex_normal() {
  static const double kHalf = std::sqrt(0.5);
  const double re = normal();
  const double im = normal();
  return {kHalf * re, kHalf * im};
}

CMatrix Rng::complex_normal_matrix(Eigen::Index rows, Eigen::Index cols) {
  CMatrix z(rows, cols);
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) z(i, j) = complex_normal();
  return z;
}

}  // namespace mxisac

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "mxisac/linalg.hpp"

namespace mxisac {

/// SplitMix64 finalizer; used to derive independent child seeds from
/// (master seed, index) so parallel and serial schedules draw identical streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Explicitly passed random state. No hidden globals anywhere in the library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi);
  double normal();
  /// CN(0, 1): independent real/imag parts, each N(0, 1/2).
  cd complex_normal();
  CMatrix complex_normal_matrix(Eigen::Index rows, Eigen::Index cols);
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mxisac

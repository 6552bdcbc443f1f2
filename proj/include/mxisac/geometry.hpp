// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "mxisac/config.hpp"
#include "mxisac/linalg.hpp"
#include "mxisac/rng.hpp"

namespace mxisac {

enum class Side { tx, rx };

/// Element positions of the mirrored TX/RX modular arrays on the x-axis.
///
/// The reference antenna of subarray k is its first element. TX elements sit at
/// x = ref_x[k] + m*d and RX elements at the mirror image -x. For the uniform
/// layout ref_x[k] = D0 + k*d_s (0-based k).
class ArrayGeometry {
 public:
  ArrayGeometry(int K, int M, double lambda, double D0, double spacing,
                std::vector<double> tx_reference_x);

  int K() const { return K_; }
  int M() const { return M_; }
  int N() const { return K_ * M_; }
  double wavelength() const { return lambda_; }
  double element_spacing() const { return d_; }
  double subarray_spacing() const { return ds_; }
  double D0() const { return D0_; }

  Point2 position(Side side, int k, int m) const;
  Point2 reference(Side side, int k) const { return position(side, k, 0); }
  const std::vector<double>& tx_reference_x() const { return ref_x_; }

  /// Span between the outermost elements of one side.
  double aperture() const;
  double subarray_aperture() const { return (M_ - 1) * d_; }

  /// Copy with one subarray's reference shifted along x (used by locality checks).
  ArrayGeometry with_reference_shift(int k, double dx) const;

 private:
  int K_;
  int M_;
  double lambda_;
  double d_;
  double D0_;
  double ds_;
  std::vector<double> ref_x_;
};

/// Uniform layout straight from the config (ignores config.layout).
ArrayGeometry build_geometry(const ScenarioConfig& config);

/// Geometry with explicit TX reference x-coordinates (random/collocated layouts).
ArrayGeometry build_geometry(const ScenarioConfig& config, std::vector<double> tx_reference_x);

/// TX reference coordinates for config.layout. Uniform: D0 + k*d_s. Collocated:
/// adjacent subarrays, d_s = M*d. Random: same outer span as uniform, interior
/// subarrays placed uniformly at random without overlap (draws from `rng`).
std::vector<double> layout_reference_x(const ScenarioConfig& config, Rng& rng);

/// entry m = exp(-j 2 pi / lambda * m * d * sin(angle)), m = 0..M-1.
CVector steering_vector(int M, double angle, double d, double lambda);

/// Direction of `location` from the reference antenna of subarray k, measured
/// from the positive y-axis.
double subarray_angle(const ArrayGeometry& geometry, Side side, int k, const PolarPoint& location);
double subarray_angle(const ArrayGeometry& geometry, Side side, int k, Point2 location);

/// entry k = exp(-j 2 pi / lambda * |l_q - l_k|).
CVector inter_subarray_phase(const ArrayGeometry& geometry, Side side, const PolarPoint& location);
CVector inter_subarray_phase(const ArrayGeometry& geometry, Side side, Point2 location);

double rayleigh_distance(double aperture, double lambda);

}  // namespace mxisac

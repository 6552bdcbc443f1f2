// SPDX-License-Identifier: Apache-2.0
#include "mxisac/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "mxisac/error.hpp"

namespace mxisac {

namespace {

// Relative to the wavelength; anything closer is treated as coincident.
constexpr double kCoincidence = 1e-9;

double checked_distance(const ArrayGeometry& g, Point2 from, Point2 to) {
  const double r = distance(from, to);
  if (!(r > kCoincidence * g.wavelength()))
    throw Error(ErrorKind::degenerate_geometry, "location coincides with a reference antenna");
  return r;
}

}  // namespace

ArrayGeometry::ArrayGeometry(int K, int M, double lambda, double D0, double spacing,
                             std::vector<double> tx_reference_x)
    : K_(K), M_(M), lambda_(lambda), d_(0.5 * lambda), D0_(D0), ds_(spacing),
      ref_x_(std::move(tx_reference_x)) {
  if (K_ < 1 || M_ < 1) throw Error(ErrorKind::configuration, "K and M must be >= 1");
  if (!(lambda_ > 0.0)) throw Error(ErrorKind::configuration, "wavelength must be > 0");
  if (static_cast<int>(ref_x_.size()) != K_)
    throw Error(ErrorKind::configuration, "need one reference coordinate per subarray");
}

Point2 ArrayGeometry::position(Side side, int k, int m) const {
  const double x = ref_x_.at(static_cast<std::size_t>(k)) + m * d_;
  return {side == Side::tx ? x : -x, 0.0};
}

double ArrayGeometry::aperture() const {
  double lo = ref_x_.front(), hi = ref_x_.front();
  for (double x : ref_x_) {
    lo = std::min(lo, x);
    hi = std::max(hi, x + (M_ - 1) * d_);
  }
  return hi - lo;
}

ArrayGeometry ArrayGeometry::with_reference_shift(int k, double dx) const {
  auto refs = ref_x_;
  refs.at(static_cast<std::size_t>(k)) += dx;
  return ArrayGeometry(K_, M_, lambda_, D0_, ds_, std::move(refs));
}

ArrayGeometry build_geometry(const ScenarioConfig& config) {
  config.validate();
  const double d = config.element_spacing();
  const double ds = config.spacing_factor * d;
  std::vector<double> refs(static_cast<std::size_t>(config.K));
  for (int k = 0; k < config.K; ++k) refs[static_cast<std::size_t>(k)] = config.D0 + k * ds;
  return ArrayGeometry(config.K, config.M, config.wavelength(), config.D0, ds, std::move(refs));
}

ArrayGeometry build_geometry(const ScenarioConfig& config, std::vector<double> tx_reference_x) {
  config.validate();
  const double d = config.element_spacing();
  return ArrayGeometry(config.K, config.M, config.wavelength(), config.D0,
                       config.spacing_factor * d, std::move(tx_reference_x));
}

std::vector<double> layout_reference_x(const ScenarioConfig& config, Rng& rng) {
  const double d = config.element_spacing();
  const auto K = static_cast<std::size_t>(config.K);
  std::vector<double> refs(K);
  switch (config.layout) {
    case Layout::uniform:
      for (std::size_t k = 0; k < K; ++k) refs[k] = config.D0 + k * config.spacing_factor * d;
      break;
    case Layout::collocated:
      for (std::size_t k = 0; k < K; ++k) refs[k] = config.D0 + k * config.M * d;
      break;
    case Layout::random: {
      // Gaps of at least M*d; the leftover slack is split at sorted uniform cut points.
      const double slack = (K > 1) ? (K - 1) * (config.spacing_factor - config.M) * d : 0.0;
      std::vector<double> cuts(K, 0.0);
      if (K > 1) cuts[K - 1] = slack;
      for (std::size_t k = 1; k + 1 < K; ++k) cuts[k] = rng.uniform(0.0, slack);
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t k = 0; k < K; ++k) refs[k] = config.D0 + k * config.M * d + cuts[k];
      break;
    }
  }
  return refs;
}

CVector steering_vector(int M, double angle, double d, double lambda) {
  CVector a(M);
  const double phase = -2.0 * kPi / lambda * d * std::sin(angle);
  for (int m = 0; m < M; ++m) a(m) = std::polar(1.0, phase * m);
  return a;
}

double subarray_angle(const ArrayGeometry& geometry, Side side, int k, Point2 location) {
  const Point2 ref = geometry.reference(side, k);
  const double r = checked_distance(geometry, ref, location);
  const double s = std::clamp((location.x - ref.x) / r, -1.0, 1.0);
  return std::asin(s);
}

double subarray_angle(const ArrayGeometry& geometry, Side side, int k, const PolarPoint& location) {
  return subarray_angle(geometry, side, k, location.cartesian());
}

CVector inter_subarray_phase(const ArrayGeometry& geometry, Side side, Point2 location) {
  CVector nu(geometry.K());
  const double kw = 2.0 * kPi / geometry.wavelength();
  for (int k = 0; k < geometry.K(); ++k) {
    const double r = checked_distance(geometry, geometry.reference(side, k), location);
    nu(k) = std::polar(1.0, -kw * r);
  }
  return nu;
}

CVector inter_subarray_phase(const ArrayGeometry& geometry, Side side, const PolarPoint& location) {
  return inter_subarray_phase(geometry, side, location.cartesian());
}

double rayleigh_distance(double aperture, double lambda) { return 2.0 * aperture * aperture / lambda; }

}  // namespace mxisac

// SPDX-License-Identifier: Apache-2.0
#include "mxisac/channel.hpp"

#include <algorithm>
#include <cmath>

#include "mxisac/error.hpp"

namespace mxisac {

namespace {

// Direction of `source` as seen from the user array (parallel to the x-axis).
double arrival_angle(Point2 user, Point2 source) {
  const double r = distance(user, source);
  if (!(r > 0.0)) throw Error(ErrorKind::degenerate_geometry, "path leg of zero length");
  return std::asin(std::clamp((source.x - user.x) / r, -1.0, 1.0));
}

double amplitude(const PathGainModel& gains, double path_length, bool nlos) {
  double a = gains.reference_amplitude / path_length;
  if (nlos) a *= std::pow(10.0, -gains.nlos_extra_loss_db / 20.0);
  return a;
}

}  // namespace

const CommChannel::Svd& CommChannel::svd() const {
  if (!svd_) {
    Eigen::JacobiSVD<CMatrix> s(H_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd_ = Svd{s.matrixU(), s.singularValues(), s.matrixV()};
  }
  return *svd_;
}

PathSpec make_los_path(const ArrayGeometry& geometry, Point2 user, const PathGainModel& gains) {
  PathSpec p;
  p.kind = PathKind::los;
  const auto K = static_cast<std::size_t>(geometry.K());
  p.gain_magnitude.resize(K);
  p.distance.resize(K);
  p.aod.resize(K);
  p.aoa.resize(K);
  for (int k = 0; k < geometry.K(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const Point2 ref = geometry.reference(Side::tx, k);
    p.aod[i] = subarray_angle(geometry, Side::tx, k, user);
    p.distance[i] = distance(ref, user);
    p.aoa[i] = arrival_angle(user, ref);
    p.gain_magnitude[i] = amplitude(gains, p.distance[i], false);
  }
  return p;
}

PathSpec make_nlos_path(const ArrayGeometry& geometry, PolarPoint scatterer, Point2 user,
                        const PathGainModel& gains) {
  PathSpec p;
  p.kind = PathKind::nlos;
  p.scatterer = scatterer;
  const Point2 s = scatterer.cartesian();
  const auto K = static_cast<std::size_t>(geometry.K());
  p.gain_magnitude.resize(K);
  p.distance.resize(K);
  p.aod.resize(K);
  p.aoa.resize(K);
  // Last leg is shared by every subarray, so the AoA is common across k.
  const double last_leg = distance(s, user);
  const double aoa = arrival_angle(user, s);
  for (int k = 0; k < geometry.K(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    p.aod[i] = subarray_angle(geometry, Side::tx, k, s);
    p.distance[i] = distance(geometry.reference(Side::tx, k), s) + last_leg;
    p.aoa[i] = aoa;
    p.gain_magnitude[i] = amplitude(gains, p.distance[i], true);
  }
  return p;
}

std::vector<PathSpec> draw_paths(const ScenarioConfig& config, const ArrayGeometry& geometry, Rng& rng) {
  if (config.Np < 1) throw Error(ErrorKind::configuration, "Np: must be >= 1");
  const ScattererRegion& reg = config.scatterers;
  if (!(reg.r_min > 0.0 && reg.r_max >= reg.r_min && reg.theta_max >= reg.theta_min))
    throw Error(ErrorKind::configuration, "scatterers: invalid region bounds");
  const PathGainModel gains{config.path_gain_ref, config.nlos_extra_loss_db};
  const Point2 user = config.user.cartesian();
  std::vector<PathSpec> paths;
  paths.reserve(static_cast<std::size_t>(config.Np));
  paths.push_back(make_los_path(geometry, user, gains));
  for (int p = 1; p < config.Np; ++p) {
    const double r = rng.uniform(reg.r_min, reg.r_max);
    const double th = rng.uniform(reg.theta_min, reg.theta_max);
    paths.push_back(make_nlos_path(geometry, {r, th}, user, gains));
  }
  return paths;
}

std::vector<PathSpec> resolve_paths(const ArrayGeometry& geometry, const std::vector<PathSpec>& paths,
                                    Point2 user, const PathGainModel& gains) {
  std::vector<PathSpec> out;
  out.reserve(paths.size());
  for (const auto& p : paths) {
    if (p.kind == PathKind::los)
      out.push_back(make_los_path(geometry, user, gains));
    else
      out.push_back(make_nlos_path(geometry, p.scatterer.value(), user, gains));
  }
  return out;
}

CommChannel build_comm_channel(const ArrayGeometry& geometry, std::vector<PathSpec> paths,
                               const PolarPoint& user, int Nc) {
  if (paths.empty()) throw Error(ErrorKind::configuration, "paths: need at least one path");
  if (Nc < 1) throw Error(ErrorKind::configuration, "Nc: must be >= 1");
  const Point2 u = user.cartesian();
  for (int k = 0; k < geometry.K(); ++k)
    if (!(distance(geometry.reference(Side::tx, k), u) > 1e-9 * geometry.wavelength()))
      throw Error(ErrorKind::degenerate_geometry, "user coincides with a reference antenna");

  const int M = geometry.M();
  const double d = geometry.element_spacing();
  const double lambda = geometry.wavelength();
  CMatrix H = CMatrix::Zero(Nc, geometry.N());
  for (const auto& p : paths) {
    if (static_cast<int>(p.aod.size()) != geometry.K() || p.aoa.size() != p.aod.size() ||
        p.distance.size() != p.aod.size() || p.gain_magnitude.size() != p.aod.size())
      throw Error(ErrorKind::shape_mismatch, "path spec must carry one entry per subarray");
    for (int k = 0; k < geometry.K(); ++k) {
      const auto i = static_cast<std::size_t>(k);
      const cd mu = std::polar(p.gain_magnitude[i], -2.0 * kPi / lambda * p.distance[i]);
      const CVector a_c = steering_vector(Nc, p.aoa[i], d, lambda);
      const CVector a_t = steering_vector(M, p.aod[i], d, lambda);
      H.block(0, k * M, Nc, M) += mu * a_c * a_t.adjoint();
    }
  }
  return CommChannel(std::move(H), std::move(paths));
}

std::pair<int, int> rank_bounds(int Np, int Nc, int K) {
  return {std::min(Np, Nc), std::min(K * Np, Nc)};
}

ObjectResponse sensing_response(const ArrayGeometry& geometry, Point2 location) {
  ObjectResponse out;
  const int K = geometry.K(), M = geometry.M();
  const double d = geometry.element_spacing(), lambda = geometry.wavelength();
  out.nu_t = inter_subarray_phase(geometry, Side::tx, location);
  out.nu_r = inter_subarray_phase(geometry, Side::rx, location);
  out.g_t.resize(geometry.N());
  out.g_r.resize(geometry.N());
  out.phi_t.resize(static_cast<std::size_t>(K));
  out.phi_r.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const auto i = static_cast<std::size_t>(k);
    out.phi_t[i] = subarray_angle(geometry, Side::tx, k, location);
    out.phi_r[i] = subarray_angle(geometry, Side::rx, k, location);
    out.g_t.segment(k * M, M) = out.nu_t(k) * steering_vector(M, out.phi_t[i], d, lambda);
    out.g_r.segment(k * M, M) = out.nu_r(k) * steering_vector(M, out.phi_r[i], d, lambda);
  }
  return out;
}

ObjectResponse sensing_response(const ArrayGeometry& geometry, const PolarPoint& location) {
  return sensing_response(geometry, location.cartesian());
}

SensingResponses sensing_responses(const ArrayGeometry& geometry, const SensingScene& scene) {
  SensingResponses out;
  out.objects.reserve(scene.objects.size());
  for (const auto& o : scene.objects) out.objects.push_back(sensing_response(geometry, o.location));
  return out;
}

CMatrix simulate_echoes(const SensingResponses& responses, const SensingScene& scene, const CMatrix& X,
                        double sigma_s_sq, Rng& rng) {
  if (scene.objects.empty()) throw Error(ErrorKind::configuration, "scene: need at least one object");
  if (responses.objects.size() != scene.objects.size())
    throw Error(ErrorKind::shape_mismatch, "one response per scene object required");
  const Eigen::Index N = responses.objects.front().g_t.size();
  if (X.rows() != N) throw Error(ErrorKind::shape_mismatch, "X must have N rows");

  std::vector<cd> beta(scene.objects.size());
  for (std::size_t q = 0; q < beta.size(); ++q) beta[q] = scene.objects[q].alpha * rng.complex_normal();

  CMatrix Y = CMatrix::Zero(N, X.cols());
  for (std::size_t q = 0; q < beta.size(); ++q) {
    const auto& o = responses.objects[q];
    Y.noalias() += (beta[q] * o.g_r) * (o.g_t.adjoint() * X);
  }
  const double s = std::sqrt(sigma_s_sq);
  Y += s * rng.complex_normal_matrix(N, X.cols());
  return Y;
}

}  // namespace mxisac

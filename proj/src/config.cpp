// SPDX-License-Identifier: Apache-2.0
#include "mxisac/config.hpp"

#include <cmath>

#include "mxisac/error.hpp"
#include "mxisac/linalg.hpp"

namespace mxisac {

namespace {

double deg(double d) { return d * kPi / 180.0; }

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw Error(ErrorKind::configuration, field + ": " + what);
}

void check_point(const PolarPoint& p, const std::string& field) {
  require(std::isfinite(p.r) && p.r > 0.0, field + ".r", "range must be > 0");
  require(std::isfinite(p.theta) && std::abs(p.theta) <= 0.5 * kPi + 1e-12, field + ".theta",
          "angle must lie in [-pi/2, pi/2]");
}

}  // namespace

Point2 PolarPoint::cartesian() const { return {r * std::sin(theta), r * std::cos(theta)}; }

PolarPoint PolarPoint::from_cartesian(Point2 p) {
  return {std::hypot(p.x, p.y), std::atan2(p.x, p.y)};
}

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

const char* to_string(Layout layout) {
  switch (layout) {
    case Layout::uniform: return "uniform";
    case Layout::random: return "random";
    case Layout::collocated: return "collocated";
  }
  return "uniform";
}

Layout layout_from_string(const std::string& s) {
  if (s == "uniform") return Layout::uniform;
  if (s == "random") return Layout::random;
  if (s == "collocated") return Layout::collocated;
  throw Error(ErrorKind::configuration, "layout: unknown value '" + s + "'");
}

ScenarioConfig::ScenarioConfig() {
  target = {{30.0, deg(30.0)}, 1e-3};
  interferers = {{{30.0, deg(40.0)}, 1e-3}, {{30.0, deg(-30.0)}, 1e-3}};
}

double ScenarioConfig::wavelength() const { return kSpeedOfLight / carrier_frequency; }

std::vector<SensingObject> ScenarioConfig::objects() const {
  std::vector<SensingObject> out;
  out.reserve(interferers.size() + 1);
  out.push_back(target);
  out.insert(out.end(), interferers.begin(), interferers.end());
  return out;
}

void ScenarioConfig::validate() const {
  require(std::isfinite(carrier_frequency) && carrier_frequency > 0.0, "carrier_frequency",
          "must be > 0");
  require(K >= 1, "K", "must be >= 1");
  require(M >= 1, "M", "must be >= 1");
  require(spacing_factor >= M, "spacing_factor", "Gamma must be >= M");
  require(std::isfinite(D0) && D0 >= 0.0, "D0", "must be >= 0");
  require(Nc >= 1, "Nc", "must be >= 1");
  require(Np >= 1, "Np", "must be >= 1");
  check_point(user, "user");
  check_point(target.location, "target");
  require(target.alpha >= 0.0, "target.alpha", "must be >= 0");
  for (std::size_t i = 0; i < interferers.size(); ++i) {
    const std::string f = "interferers[" + std::to_string(i) + "]";
    check_point(interferers[i].location, f);
    require(interferers[i].alpha >= 0.0, f + ".alpha", "must be >= 0");
  }
  require(scatterers.r_min > 0.0 && scatterers.r_max >= scatterers.r_min, "scatterers.range",
          "need 0 < r_min <= r_max");
  require(scatterers.theta_min <= scatterers.theta_max &&
              std::abs(scatterers.theta_min) <= 0.5 * kPi && std::abs(scatterers.theta_max) <= 0.5 * kPi,
          "scatterers.angle", "need -90 <= theta_min <= theta_max <= 90 degrees");
  require(path_gain_ref > 0.0, "path_gain_ref", "must be > 0");
  require(sigma_c_sq > 0.0, "sigma_c_sq", "must be > 0");
  require(sigma_s_sq >= 0.0, "sigma_s_sq", "must be >= 0");
  require(scnr_threshold >= 0.0, "scnr_threshold", "must be >= 0");
  require(Ns >= 0, "Ns", "must be >= 0 (0 selects rank(H_c))");
  require(rf_per_subarray >= 0 && rf_per_subarray <= Q() + Np, "rf_per_subarray",
          "must lie in [0, Q + Np]");
  require(snapshots_L >= 1, "snapshots_L", "must be >= 1");
}

ScenarioConfig full_scale_defaults() { return ScenarioConfig{}; }

ScenarioConfig desk_defaults() {
  ScenarioConfig c;
  c.K = 4;
  c.M = 8;
  c.spacing_factor = 32.0;
  c.Nc = 4;
  c.Np = 2;
  c.interferers.resize(1);
  return c;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace mxisac

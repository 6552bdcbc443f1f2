// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mxisac {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Location by range r (meters) and angle theta (radians) from the positive
/// y-axis, positive toward positive x.
struct PolarPoint {
  double r = 1.0;
  double theta = 0.0;

  Point2 cartesian() const;
  static PolarPoint from_cartesian(Point2 p);
};

double distance(Point2 a, Point2 b);

/// A reflecting object: the target (index 0) or a signal-dependent interferer.
struct SensingObject {
  PolarPoint location;
  double alpha = 0.0;  ///< amplitude, E|beta|^2 = alpha^2
};

enum class Layout { uniform, random, collocated };

const char* to_string(Layout layout);
Layout layout_from_string(const std::string& s);

/// Region from which NLoS scatterers are drawn uniformly (range x angle).
struct ScattererRegion {
  double r_min = 5.0;
  double r_max = 30.0;
  double theta_min = -60.0 * 3.14159265358979323846 / 180.0;
  double theta_max = 60.0 * 3.14159265358979323846 / 180.0;
};

/// Full scene description. Noise powers and the SCNR threshold are linear.
struct ScenarioConfig {
  double carrier_frequency = 38e9;  ///< Hz
  int K = 6;                        ///< subarrays
  int M = 32;                       ///< antennas per subarray
  double spacing_factor = 128.0;    ///< Gamma, d_s = Gamma * d
  double D0 = 0.5;                  ///< half-separation of TX/RX arrays, meters
  Layout layout = Layout::uniform;
  int Nc = 16;
  int Np = 4;
  PolarPoint user{40.0, 15.0 * 3.14159265358979323846 / 180.0};
  SensingObject target;
  std::vector<SensingObject> interferers;
  ScattererRegion scatterers;
  double path_gain_ref = 1e-2;        ///< LoS amplitude at 1 m
  double nlos_extra_loss_db = 10.0;   ///< per-NLoS-path attenuation below LoS
  double sigma_c_sq = 1e-6;           ///< W (-30 dBm)
  double sigma_s_sq = 1e-5;           ///< W (-20 dBm)
  double scnr_threshold = 10.0;       ///< Gamma_s, linear
  int Ns = 0;                         ///< 0: rank(H_c) capped at N_RF
  int rf_per_subarray = 0;            ///< 0: Q + Np
  int snapshots_L = 256;
  std::uint64_t seed = 1;

  ScenarioConfig();

  int N() const { return K * M; }
  int Q() const { return 1 + static_cast<int>(interferers.size()); }
  double wavelength() const;
  double element_spacing() const { return 0.5 * wavelength(); }
  std::vector<SensingObject> objects() const;

  /// Throws Error(configuration) naming the offending field.
  void validate() const;
};

/// Full-scale defaults (K=6, M=32, Nc=16, Np=4, Q=3).
ScenarioConfig full_scale_defaults();
/// Reduced preset: K=4, M=8, Nc=4, Np=2, Q=2 (N=32, N_RF=16).
ScenarioConfig desk_defaults();

double dbm_to_watts(double dbm);
double watts_to_dbm(double w);
double db_to_linear(double db);
double linear_to_db(double x);

}  // namespace mxisac

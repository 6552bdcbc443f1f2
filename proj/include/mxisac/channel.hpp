// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mxisac/geometry.hpp"

namespace mxisac {

enum class PathKind { los, nlos };

/// One propagation path between the TX array and the user, resolved per subarray.
struct PathSpec {
  PathKind kind = PathKind::los;
  std::optional<PolarPoint> scatterer;  ///< present iff NLoS
  std::vector<double> gain_magnitude;   ///< |mu_p^k|
  std::vector<double> distance;         ///< D_p^k, reference to reference (summed legs)
  std::vector<double> aod;              ///< theta_tp^k at subarray k
  std::vector<double> aoa;              ///< theta_cp^k at the user array
};

/// Piecewise-far-field channel: Nc x N, one far-field block per subarray.
class CommChannel {
 public:
  struct Svd {
    CMatrix U;
    RVector sigma;
    CMatrix V;
  };

  CommChannel(CMatrix H, std::vector<PathSpec> paths)
      : H_(std::move(H)), paths_(std::move(paths)) {}

  const CMatrix& H() const { return H_; }
  const std::vector<PathSpec>& paths() const { return paths_; }
  int Nc() const { return static_cast<int>(H_.rows()); }
  int N() const { return static_cast<int>(H_.cols()); }

  /// Thin SVD, computed on first use. Not thread-safe on first call.
  const Svd& svd() const;

 private:
  CMatrix H_;
  std::vector<PathSpec> paths_;
  mutable std::optional<Svd> svd_;
};

struct PathGainModel {
  double reference_amplitude = 1e-2;  ///< amplitude at 1 m
  double nlos_extra_loss_db = 10.0;
};

/// LoS path from every subarray reference to the user.
PathSpec make_los_path(const ArrayGeometry& geometry, Point2 user, const PathGainModel& gains);
/// Single-bounce path via `scatterer`.
PathSpec make_nlos_path(const ArrayGeometry& geometry, PolarPoint scatterer, Point2 user,
                        const PathGainModel& gains);

/// One LoS path plus Np-1 NLoS paths with scatterers uniform in the configured
/// range x angle region.
std::vector<PathSpec> draw_paths(const ScenarioConfig& config, const ArrayGeometry& geometry, Rng& rng);

/// Recompute the per-subarray quantities of `paths` for a new geometry, keeping
/// the scatterer draws.
std::vector<PathSpec> resolve_paths(const ArrayGeometry& geometry, const std::vector<PathSpec>& paths,
                                    Point2 user, const PathGainModel& gains);

CommChannel build_comm_channel(const ArrayGeometry& geometry, std::vector<PathSpec> paths,
                               const PolarPoint& user, int Nc);

/// (min(Np, Nc), min(K*Np, Nc))
std::pair<int, int> rank_bounds(int Np, int Nc, int K);

/// Sensing objects; index 0 is the target.
struct SensingScene {
  std::vector<SensingObject> objects;

  int Q() const { return static_cast<int>(objects.size()); }
};

struct ObjectResponse {
  CVector g_t;
  CVector g_r;
  CVector nu_t;
  CVector nu_r;
  std::vector<double> phi_t;  ///< per-subarray TX angles
  std::vector<double> phi_r;  ///< per-subarray RX angles
};

struct SensingResponses {
  std::vector<ObjectResponse> objects;
};

ObjectResponse sensing_response(const ArrayGeometry& geometry, const PolarPoint& location);
ObjectResponse sensing_response(const ArrayGeometry& geometry, Point2 location);
SensingResponses sensing_responses(const ArrayGeometry& geometry, const SensingScene& scene);

/// Echo block Y_s = sum_q beta_q g_rq g_tq^H X + Z_s. beta_q is drawn first (one
/// per object), then Z_s column by column, so a fixed seed fixes both
/// independently of X.
CMatrix simulate_echoes(const SensingResponses& responses, const SensingScene& scene, const CMatrix& X,
                        double sigma_s_sq, Rng& rng);

}  // namespace mxisac

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "mxisac/geometry.hpp"

namespace mxisac {

/// Cartesian evaluation grid, inclusive of both ends (up to rounding).
struct MusicGrid {
  double x0 = 0.0, dx = 0.25, x1 = 0.0;
  double y0 = 0.0, dy = 0.25, y1 = 0.0;

  int nx() const;
  int ny() const;
  double x(int i) const { return x0 + i * dx; }
  double y(int j) const { return y0 + j * dy; }
  void validate() const;
};

/// Parses "x0:dx:x1,y0:dy:y1".
MusicGrid parse_grid(const std::string& text);

struct MusicResult {
  MusicGrid grid;
  RMatrix spectrum;  ///< ny x nx (row j is y(j)), normalized to max 1
  int peak_ix = 0;
  int peak_iy = 0;
  Point2 peak;
  double mainlobe_width = 0.0;  ///< -3 dB width along the radial line through the peak
  int flagged_cells = 0;        ///< cells on an antenna, set to 0
};

/// (1/L) Y Y^H
CMatrix sample_covariance(const CMatrix& snapshots);

/// Eigenvectors of the N - sources smallest eigenvalues.
CMatrix noise_subspace(const CMatrix& cov, int sources);

/// Pseudo-spectrum 1 / (g_r^H E_n E_n^H g_r + 1e-18) over the grid, normalized.
/// The peak is the first maximum in row-major order.
MusicResult music_spectrum(const CMatrix& noise_basis, const ArrayGeometry& geometry, const MusicGrid& grid);

}  // namespace mxisac

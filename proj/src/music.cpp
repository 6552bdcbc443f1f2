// SPDX-License-Identifier: Apache-2.0
#include "mxisac/music.hpp"

#include <cmath>
#include <sstream>

#include "mxisac/channel.hpp"
#include "mxisac/error.hpp"

namespace mxisac {

namespace {

int count(double a, double step, double b) { return static_cast<int>(std::floor((b - a) / step + 1e-9)) + 1; }

double raw_pseudo(const CMatrix& En, const ArrayGeometry& geometry, Point2 p) {
  const CVector g = sensing_response(geometry, p).g_r;
  const double den = (En.adjoint() * g).squaredNorm();
  return 1.0 / (den + 1e-18);
}

}  // namespace

int MusicGrid::nx() const { return count(x0, dx, x1); }
int MusicGrid::ny() const { return count(y0, dy, y1); }

void MusicGrid::validate() const {
  if (!(dx > 0.0) || !(dy > 0.0)) throw Error(ErrorKind::configuration, "grid: steps must be > 0");
  if (!(x1 >= x0) || !(y1 >= y0)) throw Error(ErrorKind::configuration, "grid: ranges must be nonempty");
}

MusicGrid parse_grid(const std::string& text) {
  MusicGrid g;
  char c1 = 0, c2 = 0, comma = 0, c3 = 0, c4 = 0;
  std::istringstream in(text);
  in >> g.x0 >> c1 >> g.dx >> c2 >> g.x1 >> comma >> g.y0 >> c3 >> g.dy >> c4 >> g.y1;
  if (in.fail() || c1 != ':' || c2 != ':' || comma != ',' || c3 != ':' || c4 != ':')
    throw Error(ErrorKind::parse, "grid: expected \"x0:dx:x1,y0:dy:y1\", got \"" + text + "\"");
  in >> std::ws;
  if (!in.eof()) throw Error(ErrorKind::parse, "grid: trailing characters in \"" + text + "\"");
  g.validate();
  return g;
}

CMatrix sample_covariance(const CMatrix& Y) {
  if (Y.cols() < 1) throw Error(ErrorKind::shape_mismatch, "sample_covariance needs at least one snapshot");
  return hermitian_part(Y * Y.adjoint() / static_cast<double>(Y.cols()));
}

CMatrix noise_subspace(const CMatrix& cov, int sources) {
  const auto N = cov.rows();
  if (sources < 0 || sources >= N) throw Error(ErrorKind::configuration, "assumed sources must lie in [0, N)");
  const HermitianEig e = hermitian_eig(cov);
  return e.vectors.rightCols(N - sources);
}

MusicResult music_spectrum(const CMatrix& En, const ArrayGeometry& geometry, const MusicGrid& grid) {
  grid.validate();
  if (En.rows() != geometry.N()) throw Error(ErrorKind::shape_mismatch, "noise basis must have N rows");
  MusicResult r;
  r.grid = grid;
  const int nx = grid.nx(), ny = grid.ny();
  r.spectrum = RMatrix::Zero(ny, nx);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      try {
        r.spectrum(j, i) = raw_pseudo(En, geometry, {grid.x(i), grid.y(j)});
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate_geometry) throw;
        ++r.flagged_cells;
      }
    }
  double best = -1.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (r.spectrum(j, i) > best) {
        best = r.spectrum(j, i);
        r.peak_ix = i;
        r.peak_iy = j;
      }
  if (best > 0.0) r.spectrum /= best;
  r.peak = {grid.x(r.peak_ix), grid.y(r.peak_iy)};

  // Walk outward along the radial line through the peak until the normalized
  // spectrum drops below one half, interpolating the crossing.
  const double rad = std::hypot(r.peak.x, r.peak.y);
  if (best > 0.0 && rad > 0.0) {
    const Point2 u{r.peak.x / rad, r.peak.y / rad};
    const double step = 0.05 * std::min(grid.dx, grid.dy);
    const double reach = std::hypot(grid.x1 - grid.x0, grid.y1 - grid.y0) + rad;
    auto half_width = [&](double sign) {
      double prev = 1.0, s = 0.0;
      while (s < reach) {
        const double sn = s + step;
        const Point2 p{r.peak.x + sign * sn * u.x, r.peak.y + sign * sn * u.y};
        double v = 0.0;
        try {
          v = raw_pseudo(En, geometry, p) / best;
        } catch (const Error&) {
          v = 0.0;
        }
        if (v < 0.5) return s + step * (prev - 0.5) / (prev - v);
        prev = v;
        s = sn;
      }
      return reach;
    };
    r.mainlobe_width = half_width(1.0) + half_width(-1.0);
  }
  return r;
}

}  // namespace mxisac

// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_CHARTS_HPP
#define TRAY_CHARTS_HPP

#include "tray/common.hpp"
#include "tray/fan.hpp"
#include "tray/geodesic.hpp"
#include "tray/metric.hpp"

#include <functional>

namespace tray {

struct ChartSetup {
  ChartMetric metric = ChartMetric::euclidean(3);
  BoundaryChart boundary;
  std::function<double(const VectorXd&)> x_field;
};

// Cartesian chart of the unit ball with a radial conformal speed. The whole
// ball is treated as one lens: xtilde = |p| - 1, c = 1, so x = |p|.
inline ChartSetup make_ball_chart(const RadialProfile& profile, int dim = 3) {
  ChartSetup s;
  s.metric = ChartMetric::conformal_radial(dim, profile);
  s.boundary.rho = [](const VectorXd& p) { return 1.0 - p.norm(); };
  s.boundary.xtilde = [](const VectorXd& p) { return p.norm() - 1.0; };
  s.boundary.c_offset = 1.0;
  s.boundary.point_of = [dim](double x, const VectorXd& y) {
    VectorXd p(dim);
    if (dim == 3) {
      p << x * std::sin(y[0]) * std::cos(y[1]), x * std::sin(y[0]) * std::sin(y[1]),
          x * std::cos(y[0]);
    } else {
      p.setZero();
      p[0] = x * std::cos(y[0]);
      p[1] = x * std::sin(y[0]);
    }
    return p;
  };
  s.x_field = [](const VectorXd& p) { return p.norm(); };
  return s;
}

// Boundary-adapted chart of the spherical shell 1 - c < r <= 1: coordinates
// (x, y) with r = 1 - c + x and y the exponential chart of the unit sphere
// around the north pole. The metric is the pullback of c_P^{-2} ds^2,
// g = c(r)^{-2} (dx^2 + r^2 sigma(y)), sigma the round metric in normal
// coordinates. Axis 0 is the boundary-distance coordinate x.
inline ChartSetup make_polar_lens_chart(const RadialProfile& profile, double c_off) {
  if (!(c_off > 0 && c_off < 1)) throw ConfigError("polar lens: need 0 < c < 1");
  ChartSetup s;
  auto g_fn = [profile, c_off](const VectorXd& q) {
    const double r = 1.0 - c_off + q[0];
    const double cv = profile(r);
    if (!(cv > 0)) throw DegenerateMetricError("polar lens: c(r) <= 0");
    const double th = std::sqrt(q[1] * q[1] + q[2] * q[2]);
    MatrixXd sigma = MatrixXd::Identity(2, 2);
    if (th > 1e-9) {
      const double s2 = std::sin(th) / th;
      VectorXd yh(2);
      yh << q[1] / th, q[2] / th;
      sigma = yh * yh.transpose() +
              s2 * s2 * (MatrixXd::Identity(2, 2) - yh * yh.transpose());
    }
    MatrixXd g = MatrixXd::Zero(3, 3);
    g(0, 0) = 1.0;
    g.bottomRightCorner(2, 2) = r * r * sigma;
    return MatrixXd((1.0 / (cv * cv)) * g);
  };
  s.metric = ChartMetric::custom(3, g_fn);
  s.boundary.rho = [c_off](const VectorXd& q) { return c_off - q[0]; };
  s.boundary.xtilde = [c_off](const VectorXd& q) { return q[0] - c_off; };
  s.boundary.c_offset = c_off;
  s.boundary.point_of = [](double x, const VectorXd& y) {
    VectorXd q(3);
    q << x, y[0], y[1];
    return q;
  };
  s.x_field = [](const VectorXd& q) { return q[0]; };
  return s;
}

// Maximal |y| excursion over the traced chords of a fan; used to size the
// lens grid so every quadrature sample stays inside the box. Refraction can
// stretch the flat-space estimate arccos(1 - c) considerably.
inline double measure_fan_extent(const ChartSetup& chart, const GeodesicFan& fan,
                                 double step = 0.02) {
  double extent = 0.0;
  GeodesicOptions gopt;
  gopt.require_exit = false;
  for (const auto& e : fan.entries) {
    if (!e.admissible) continue;
    auto [p0, v0] = launch_state(chart.metric, chart.boundary, e);
    for (const VectorXd& v : {VectorXd(v0), VectorXd(-v0)}) {
      GeodesicPath path =
          integrate_geodesic(chart.metric, chart.boundary, p0, v, step, 8.0, gopt);
      for (const auto& q : path.points)
        extent = std::max({extent, std::abs(q[1]), std::abs(q[2])});
    }
  }
  return extent;
}

// Grid over the lens chart covering chords up to the measured |y| extent.
inline GridDesc lens_grid(double c_off, double y_half, int nx, int ny) {
  return GridDesc::box(3, {nx, ny, ny}, {0.0, -y_half, -y_half},
                       {c_off, y_half, y_half});
}

// Active-node mask of the lens interior: x within (x_floor, c - x_ceil_margin)
// and base |y| window. Nodes outside are Dirichlet for the gauge operators.
inline std::vector<std::uint8_t> lens_active_mask(const GridDesc& grid, double x_floor,
                                                  double x_ceil, double y_half) {
  std::vector<std::uint8_t> mask(grid.num_nodes(), 0);
  for (std::int64_t node = 0; node < grid.num_nodes(); ++node) {
    const VectorXd p = grid.point(node);
    mask[node] = p[0] >= x_floor && p[0] <= x_ceil && std::abs(p[1]) <= y_half &&
                 std::abs(p[2]) <= y_half;
  }
  return mask;
}

// Fan of lens-local geodesics over a regular (x, y, lambda, omega) grid.
inline GeodesicFan lens_fan(const ChartSetup& chart, double c_off, double c2,
                            int x_levels, int y_count, double y_base_half,
                            int lambda_count, int omega_count) {
  FanParameters fp;
  fp.c2 = c2;
  for (int i = 0; i < x_levels; ++i)
    fp.x_levels.push_back(c_off * (i + 0.75) / (x_levels + 0.5));
  for (int a = 0; a < y_count; ++a)
    for (int b = 0; b < y_count; ++b) {
      VectorXd y(2);
      y << -y_base_half + 2.0 * y_base_half * a / std::max(1, y_count - 1),
          -y_base_half + 2.0 * y_base_half * b / std::max(1, y_count - 1);
      fp.y_points.push_back(y);
    }
  fp.lambda_count = lambda_count;
  fp.omega_count = omega_count;
  return local_geodesic_fan(chart.boundary, fp, 3);
}

}  // namespace tray

#endif  // TRAY_CHARTS_HPP

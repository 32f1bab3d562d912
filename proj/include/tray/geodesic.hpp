// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_GEODESIC_HPP
#define TRAY_GEODESIC_HPP

#include "tray/common.hpp"
#include "tray/metric.hpp"

#include <functional>
#include <vector>

namespace tray {

// Coordinate functions describing the (local) domain: boundary defining
// function rho >= 0 inside M, a foliation function xtilde, and the shifted
// coordinate x = xtilde + c used by the local-lens constructions. point_of
// maps fan parameters (x, y) to a chart point when the chart supports it.
struct BoundaryChart {
  std::function<double(const VectorXd&)> rho;
  std::function<double(const VectorXd&)> xtilde;
  double c_offset = 0.0;
  std::function<VectorXd(double, const VectorXd&)> point_of;

  double x(const VectorXd& p) const { return xtilde(p) + c_offset; }
};

struct GeodesicPath {
  std::vector<VectorXd> points;
  std::vector<VectorXd> velocities;
  std::vector<double> t;  // arc-length parameter, strictly increasing
  bool exited = false;

  int size() const { return static_cast<int>(points.size()); }
  double length() const { return t.empty() ? 0.0 : t.back() - t.front(); }
};

struct GeodesicOptions {
  bool require_exit = true;
  double exit_refine_factor = 1e-6;  // bisection width relative to step
};

namespace detail {

struct PhaseState {
  VectorXd p, v;
};

inline PhaseState rk4_step(const ChartMetric& metric, const PhaseState& s, double h) {
  auto rhs = [&](const PhaseState& y) -> PhaseState {
    ChristoffelSymbols G = christoffel(metric, y.p);
    return {y.v, G.acceleration(y.v)};
  };
  PhaseState k1 = rhs(s);
  PhaseState k2 = rhs({s.p + 0.5 * h * k1.p, s.v + 0.5 * h * k1.v});
  PhaseState k3 = rhs({s.p + 0.5 * h * k2.p, s.v + 0.5 * h * k2.v});
  PhaseState k4 = rhs({s.p + h * k3.p, s.v + h * k3.v});
  return {s.p + (h / 6.0) * (k1.p + 2 * k2.p + 2 * k3.p + k4.p),
          s.v + (h / 6.0) * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)};
}

}  // namespace detail

// Fixed-step classical 4th-order integration of the geodesic equation
// xdd^k + Gamma^k_ij xd^i xd^j = 0, terminated at the first rho = 0 crossing
// (bisection-refined to step * 1e-6) or at tmax.
inline GeodesicPath integrate_geodesic(const ChartMetric& metric,
                                       const BoundaryChart& boundary,
                                       const VectorXd& p0, const VectorXd& v0,
                                       double step, double tmax,
                                       const GeodesicOptions& opts = {}) {
  if (step <= 0) throw ConfigError("integrate_geodesic: step must be > 0");
  {
    const double speed = std::sqrt(v0.dot(metric.g(p0) * v0));
    if (std::abs(speed - 1.0) > 1e-12)
      throw ConfigError("integrate_geodesic: |v0|_g must be 1 within 1e-12");
  }

  GeodesicPath path;
  detail::PhaseState s{p0, v0};
  double t = 0.0;
  path.points.push_back(s.p);
  path.velocities.push_back(s.v);
  path.t.push_back(t);

  while (t < tmax - 1e-15) {
    const double h = std::min(step, tmax - t);
    detail::PhaseState next = detail::rk4_step(metric, s, h);
    if (!next.p.allFinite() || !next.v.allFinite())
      throw BlowUpError("integrate_geodesic: non-finite state");

    if (boundary.rho(next.p) < 0.0) {
      // Bracket the crossing on the sub-step [0, h] and bisect; the appended
      // exit point is the last inside state, so the path never leaves M.
      double a = 0.0, b = h;
      detail::PhaseState sa = s;
      while (b - a > step * opts.exit_refine_factor) {
        const double mid = 0.5 * (a + b);
        detail::PhaseState sm = detail::rk4_step(metric, s, mid);
        if (boundary.rho(sm.p) < 0.0) {
          b = mid;
        } else {
          a = mid;
          sa = sm;
        }
      }
      if (a > 0.0) {
        path.points.push_back(sa.p);
        path.velocities.push_back(sa.v);
        path.t.push_back(t + a);
      }
      path.exited = true;
      return path;
    }

    s = next;
    t += h;
    path.points.push_back(s.p);
    path.velocities.push_back(s.v);
    path.t.push_back(t);
  }

  if (opts.require_exit)
    throw NoExitError("integrate_geodesic: tmax reached before boundary exit");
  return path;
}

// Maximal deviation of |gamma_dot|_g from 1 along the path.
inline double unit_speed_defect(const ChartMetric& metric, const GeodesicPath& path) {
  double worst = 0.0;
  for (int i = 0; i < path.size(); ++i) {
    const double speed =
        std::sqrt(path.velocities[i].dot(metric.g(path.points[i]) * path.velocities[i]));
    worst = std::max(worst, std::abs(speed - 1.0));
  }
  return worst;
}

}  // namespace tray

#endif  // TRAY_GEODESIC_HPP

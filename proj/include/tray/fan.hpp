// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_FAN_HPP
#define TRAY_FAN_HPP

#include "tray/common.hpp"
#include "tray/geodesic.hpp"
#include "tray/metric.hpp"

#include <vector>

namespace tray {

// Parameter grid for the fan of lens-local geodesics. Initial conditions are
// (x, y, lambda, omega): base point from (x, y), normal velocity component
// lambda with |lambda| <= c2 * x, tangential direction omega on S^{n-2}.
struct FanParameters {
  double c2 = 1.0;
  std::vector<double> x_levels;
  std::vector<VectorXd> y_points;
  int lambda_count = 5;
  int omega_count = 8;
};

struct FanEntry {
  double x = 0.0;
  VectorXd y;
  double lambda = 0.0;
  VectorXd omega;  // unit vector in R^{n-1} spanning the tangential frame
  bool admissible = true;
  int base_id = 0;  // index of the (x, y) base point this entry belongs to
};

struct GeodesicFan {
  int dim = 0;
  std::vector<FanEntry> entries;
  int base_count = 0;

  int size() const { return static_cast<int>(entries.size()); }
};

// Directions on S^{n-2} embedded in R^{n-1}. n = 3 gives the unit circle;
// n = 2 gives the two signs.
inline std::vector<VectorXd> omega_samples(int n, int count) {
  return uniform_sphere_directions(n - 1, count);
}

// Enumerates the fan with the admissibility rule |lambda| <= c2 * x; entries
// with x < 0 are masked out, and at x = 0 only lambda = 0 survives.
inline GeodesicFan local_geodesic_fan(const BoundaryChart& boundary,
                                      const FanParameters& params, int dim) {
  if (params.c2 <= 0) throw ConfigError("local_geodesic_fan: c2 must be > 0");
  if (params.lambda_count < 1 || params.omega_count < 1)
    throw ConfigError("local_geodesic_fan: counts must be >= 1");

  GeodesicFan fan;
  fan.dim = dim;
  const auto omegas = omega_samples(dim, params.omega_count);
  int base_id = 0;
  for (double x : params.x_levels) {
    for (const auto& y : params.y_points) {
      const bool masked = x < 0.0;
      std::vector<double> lambdas;
      if (x <= 0.0) {
        lambdas = {0.0};
      } else if (params.lambda_count == 1) {
        lambdas = {0.0};
      } else {
        const double span = params.c2 * x;
        for (int i = 0; i < params.lambda_count; ++i)
          lambdas.push_back(-span + 2.0 * span * i / (params.lambda_count - 1));
      }
      for (double lam : lambdas)
        for (const auto& w : omegas) {
          FanEntry e;
          e.x = x;
          e.y = y;
          e.lambda = lam;
          e.omega = w;
          e.admissible = !masked;
          e.base_id = base_id;
          fan.entries.push_back(e);
        }
      ++base_id;
    }
  }
  fan.base_count = base_id;
  return fan;
}

// Initial condition of the geodesic attached to a fan entry: unit velocity
// v = lambda * nhat + sqrt(1 - lambda^2) * that(omega), with nhat the
// g-normalized gradient direction of xtilde and that a g-orthonormal
// tangential frame contracted with omega.
inline std::pair<VectorXd, VectorXd> launch_state(const ChartMetric& metric,
                                                  const BoundaryChart& boundary,
                                                  const FanEntry& entry) {
  if (!boundary.point_of)
    throw ConfigError("launch_state: boundary chart has no (x, y) point map");
  const int n = metric.dim();
  const VectorXd p = boundary.point_of(entry.x, entry.y);

  const double h = 1e-6;
  VectorXd grad(n), q = p;
  for (int d = 0; d < n; ++d) {
    q[d] = p[d] + h;
    const double fp = boundary.xtilde(q);
    q[d] = p[d] - h;
    const double fm = boundary.xtilde(q);
    q[d] = p[d];
    grad[d] = (fp - fm) / (2 * h);
  }

  const MatrixXd g = metric.g(p);
  VectorXd nhat = metric.g_inverse(p) * grad;
  nhat /= std::sqrt(nhat.dot(g * nhat));

  std::vector<VectorXd> frame;
  for (int d = 0; d < n && static_cast<int>(frame.size()) < n - 1; ++d) {
    VectorXd e = VectorXd::Unit(n, d);
    e -= (e.dot(g * nhat)) * nhat;
    for (const auto& f : frame) e -= (e.dot(g * f)) * f;
    const double norm = std::sqrt(std::max(e.dot(g * e), 0.0));
    if (norm < 1e-8) continue;
    frame.push_back(e / norm);
  }
  if (static_cast<int>(frame.size()) != n - 1)
    throw ConfigError("launch_state: degenerate tangential frame");

  VectorXd tangent = VectorXd::Zero(n);
  for (int a = 0; a < n - 1; ++a) tangent += entry.omega[a] * frame[a];

  const double lam = entry.lambda;
  if (std::abs(lam) > 1.0)
    throw ConfigError("launch_state: |lambda| > 1 cannot be unit speed");
  const VectorXd v = lam * nhat + std::sqrt(1.0 - lam * lam) * tangent;
  return {p, v};
}

}  // namespace tray

#endif  // TRAY_FAN_HPP

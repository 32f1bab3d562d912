// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_FOLIATION_HPP
#define TRAY_FOLIATION_HPP

#include "tray/common.hpp"
#include "tray/geodesic.hpp"
#include "tray/metric.hpp"

#include <vector>

namespace tray {

struct HerglotzVerdict {
  bool ok = false;
  double margin = 0.0;  // min of d/dr (r / c(r)) over interior grid nodes
};

// d/dr (r/c(r)) > 0 on (r_min, r_max], checked by central differences on a
// uniform sample grid. Radial speeds passing this test foliate the ball by
// strictly convex spheres.
inline HerglotzVerdict herglotz_check(const RadialProfile& c, double r_min,
                                      double r_max, int samples = 256) {
  if (samples < 3) throw ConfigError("herglotz_check: need >= 3 samples");
  const double dr = (r_max - r_min) / (samples - 1);
  std::vector<double> phi(samples);
  for (int i = 0; i < samples; ++i) {
    const double r = r_min + i * dr;
    const double cv = c(r);
    if (!(cv > 0)) throw InvalidProfileError("herglotz_check: c(r) <= 0");
    phi[i] = r / cv;
  }
  HerglotzVerdict v;
  v.margin = std::numeric_limits<double>::infinity();
  for (int i = 1; i + 1 < samples; ++i)
    v.margin = std::min(v.margin, (phi[i + 1] - phi[i - 1]) / (2 * dr));
  v.ok = v.margin > 0.0;
  return v;
}

struct ConvexityVerdict {
  bool ok = false;
  double worst = 0.0;  // largest second difference of xtilde along tangent geodesics
  VectorXd worst_point;
};

// Strict geodesic concavity of the level set {xtilde = level}: at sampled
// points and tangential directions, d^2/dt^2 xtilde(gamma(t)) < 0 at tangency,
// estimated by second differences on short geodesic probes. Points on the
// level set are found by bisection along rays from the chart origin, which
// assumes xtilde is monotone radially (true for the charts used here).
inline ConvexityVerdict convexity_probe(const ChartMetric& metric,
                                        const BoundaryChart& boundary, double level,
                                        int samples, double probe_step = 1e-2,
                                        double strict_tol = 1e-6,
                                        std::uint64_t seed = 20260810ull) {
  const int n = metric.dim();
  Rng rng(seed);
  ConvexityVerdict verdict;
  verdict.worst = -std::numeric_limits<double>::infinity();

  auto level_point = [&](const VectorXd& dir) -> std::pair<bool, VectorXd> {
    double a = 1e-6, b = 4.0;
    double fa = boundary.xtilde(a * dir) - level;
    double fb = boundary.xtilde(b * dir) - level;
    if (fa * fb > 0) return {false, VectorXd()};
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      const double fm = boundary.xtilde(m * dir) - level;
      if (fa * fm <= 0) {
        b = m;
        fb = fm;
      } else {
        a = m;
        fa = fm;
      }
    }
    return {true, 0.5 * (a + b) * dir};
  };

  auto grad_xtilde = [&](const VectorXd& p) {
    const double h = 1e-6;
    VectorXd g(n), q = p;
    for (int d = 0; d < n; ++d) {
      q[d] = p[d] + h;
      const double fp = boundary.xtilde(q);
      q[d] = p[d] - h;
      const double fm = boundary.xtilde(q);
      q[d] = p[d];
      g[d] = (fp - fm) / (2 * h);
    }
    return g;
  };

  int found = 0;
  for (int s = 0; s < samples; ++s) {
    auto [hit, p] = level_point(random_unit_vector(n, rng));
    if (!hit) continue;
    ++found;

    const MatrixXd g = metric.g(p);
    const VectorXd grad = grad_xtilde(p);
    // g-orthonormal tangent frame of the level set at p.
    VectorXd nrm = metric.g_inverse(p) * grad;
    nrm /= std::sqrt(nrm.dot(g * nrm));
    std::vector<VectorXd> frame;
    for (int d = 0; d < n && static_cast<int>(frame.size()) < n - 1; ++d) {
      VectorXd e = VectorXd::Unit(n, d);
      e -= (e.dot(g * nrm)) * nrm;
      for (const auto& f : frame) e -= (e.dot(g * f)) * f;
      const double norm = std::sqrt(std::max(e.dot(g * e), 0.0));
      if (norm < 1e-8) continue;
      frame.push_back(e / norm);
    }

    BoundaryChart free_boundary = boundary;
    free_boundary.rho = [](const VectorXd&) { return 1.0; };
    GeodesicOptions opts;
    opts.require_exit = false;

    for (const auto& dir : frame) {
      GeodesicPath fwd = integrate_geodesic(metric, free_boundary, p, dir, probe_step,
                                            probe_step, opts);
      GeodesicPath bwd = integrate_geodesic(metric, free_boundary, p, -dir, probe_step,
                                            probe_step, opts);
      const double x0 = boundary.xtilde(p);
      const double xp = boundary.xtilde(fwd.points.back());
      const double xm = boundary.xtilde(bwd.points.back());
      const double second = (xp - 2 * x0 + xm) / (probe_step * probe_step);
      if (second > verdict.worst) {
        verdict.worst = second;
        verdict.worst_point = p;
      }
    }
  }
  if (found == 0) throw EmptyLevelError("convexity_probe: level set not found in chart");
  verdict.ok = verdict.worst < -strict_tol;
  return verdict;
}

}  // namespace tray

#endif  // TRAY_FOLIATION_HPP

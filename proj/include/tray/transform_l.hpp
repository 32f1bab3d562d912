// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_TRANSFORM_L_HPP
#define TRAY_TRANSFORM_L_HPP

#include "tray/common.hpp"
#include "tray/metric.hpp"
#include "tray/ray_transform.hpp"
#include "tray/tensor_field.hpp"

#include <vector>

namespace tray {

// Even non-negative cutoff in the rescaled slope s = lambda / x.
struct CutoffProfile {
  enum class Kind { gaussian, compact_bump };
  Kind kind = Kind::gaussian;
  double nu = 1.0;     // gaussian: chi(s) = exp(-s^2 / (2 nu))
  double width = 1.0;  // bump support half-width

  static CutoffProfile gaussian_profile(double nu) {
    if (!(nu > 0)) throw InvalidProfileError("gaussian cutoff needs nu > 0");
    CutoffProfile c;
    c.kind = Kind::gaussian;
    c.nu = nu;
    return c;
  }
  static CutoffProfile bump_profile(double width) {
    if (!(width > 0)) throw InvalidProfileError("bump cutoff needs width > 0");
    CutoffProfile c;
    c.kind = Kind::compact_bump;
    c.width = width;
    return c;
  }

  double operator()(double s) const {
    switch (kind) {
      case Kind::gaussian:
        return std::exp(-s * s / (2.0 * nu));
      case Kind::compact_bump: {
        const double q = s / width;
        if (std::abs(q) >= 1.0) return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - q * q));
      }
    }
    return 0.0;
  }
};

struct LTransformResult {
  SymmetricTensorField field;  // rank 4, scattering-basis components
  std::vector<std::int64_t> starved_nodes;
  bool coverage_warning = false;
};

// (L u)(x, y) = x^4 sum over the (lambda, omega) subfan at the base point of
// chi(lambda/x) u * [g_sc-lowered direction]^{(x)4}, with uniform fan weights.
// The direction covector is lowered with g_sc = x^{-4} dx^2 + x^{-2} h, h
// being the tangential block of the chart metric at the base point; the
// output components are in the scattering basis. Base points are matched to
// the nearest output grid node. With F > 0 the outer exponential factor
// exp(-F/x) of the conjugated normal operator is applied.
inline LTransformResult weighted_transform_L(const RayData& u, const ChartMetric& metric,
                                             const CutoffProfile& chi,
                                             const GridDesc& out_grid, double F = 0.0,
                                             bool require_full_coverage = false) {
  const int n = metric.dim();
  if (out_grid.dim != n) throw ConfigError("weighted_transform_L: grid dim mismatch");
  LTransformResult res{SymmetricTensorField(out_grid, 4), {}, false};
  const auto& idx = res.field.index_set();
  const int nc = idx.size();

  std::vector<int> entry_count(out_grid.num_nodes(), 0);
  std::vector<int> usable_count(out_grid.num_nodes(), 0);

  for (int e = 0; e < u.size(); ++e) {
    const FanEntry& fe = u.fan.entries[e];
    if (!u.valid[e]) continue;
    // nearest output node to the base point (x, y)
    VectorXd base(n);
    base[0] = fe.x;
    for (int a = 0; a < n - 1; ++a) base[a + 1] = fe.y[a];
    if (!out_grid.contains(base, 0.5 * out_grid.min_spacing())) continue;
    std::array<int, 4> iv{};
    bool on_node = true;
    for (int d = 0; d < n; ++d) {
      const double s = (base[d] - out_grid.lo[d]) / out_grid.spacing(d);
      iv[d] = static_cast<int>(std::lround(s));
      iv[d] = std::min(std::max(iv[d], 0), out_grid.shape[d] - 1);
      if (std::abs(s - iv[d]) > 1e-6) on_node = false;
    }
    if (!on_node) continue;
    const std::int64_t node = out_grid.index(iv);
    entry_count[node]++;

    const double x = fe.x;
    const double s = (x > 0) ? fe.lambda / x : 0.0;
    const double chi_v = chi(s);
    if (chi_v <= 1e-300) continue;
    usable_count[node]++;

    // g_sc-lowered direction in the scattering frame: (lambda / x^2, h(omega) / x)
    VectorXd zeta(n);
    if (x > 0) {
      const MatrixXd g = metric.g(base);
      VectorXd homega = g.bottomRightCorner(n - 1, n - 1) * fe.omega;
      zeta[0] = fe.lambda / (x * x);
      for (int a = 0; a < n - 1; ++a) zeta[a + 1] = homega[a] / x;
    } else {
      zeta.setZero();
    }

    // uniform fan measure over (lambda, omega); constants absorbed downstream
    const double weight = std::pow(x, 4) * chi_v * (F > 0 && x > 0 ? std::exp(-F / x) : 1.0);
    for (int c = 0; c < nc; ++c) {
      double prod = 1.0;
      for (int k = 0; k < 4; ++k) prod *= zeta[idx.tuple(c)[k]];
      res.field.at(node, c) += weight * u.values[e] * prod;
    }
  }

  int touched = 0;
  for (std::int64_t node = 0; node < out_grid.num_nodes(); ++node) {
    if (entry_count[node] == 0) {
      res.starved_nodes.push_back(node);
    } else {
      ++touched;
      if (usable_count[node] == 0) res.coverage_warning = true;
    }
  }
  if (touched == 0)
    throw CoverageError("weighted_transform_L: no fan entry matched any output node");
  if (require_full_coverage && !res.starved_nodes.empty()) {
    std::string msg = "weighted_transform_L: starved nodes";
    for (std::size_t i = 0; i < res.starved_nodes.size() && i < 12; ++i)
      msg += " " + std::to_string(res.starved_nodes[i]);
    if (res.starved_nodes.size() > 12) msg += " ...";
    throw CoverageError(msg);
  }
  return res;
}

}  // namespace tray

#endif  // TRAY_TRANSFORM_L_HPP

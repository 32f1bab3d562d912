// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_INVERSION_HPP
#define TRAY_INVERSION_HPP

#include "tray/common.hpp"
#include "tray/foliation.hpp"
#include "tray/forward_operator.hpp"
#include "tray/witten.hpp"

#include <functional>
#include <vector>

namespace tray {

struct InversionOptions {
  double mu = -1.0;       // gauge penalty; < 0 selects 1e-3 * ||A||^2
  double cg_tol = 1e-8;
  int cg_max_iter = 600;
  double projector_tol = 1e-10;
  bool weight_data_term = false;  // optional exponential weighting of rays
  int power_iters = 20;           // for the ||A|| estimate
};

struct InversionResult {
  SymmetricTensorField u;      // solenoidal representative
  SymmetricTensorField f_raw;  // CG minimizer before projection
  std::vector<double> objective_curve;  // sqrt of the quadratic objective per iteration
  double data_residual = 0.0;           // ||A f - d|| / ||d||
  double gauge_norm = 0.0;              // ||delta^s_F u||_W / ||u||_W
  double mu = 0.0;
  int iterations = 0;
  std::vector<std::int64_t> unconstrained_nodes;
};

namespace detail {

inline double estimate_norm2(const RayOperator& A, int iters, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  VectorXd v(A.col_count());
  for (auto& x : v.reshaped()) x = gauss(rng);
  v /= v.norm();
  double lam = 0;
  for (int i = 0; i < iters; ++i) {
    VectorXd w = A.apply_adjoint(A.apply(v));
    lam = w.norm();
    if (lam <= 0) break;
    v = w / lam;
  }
  return lam;  // largest eigenvalue of A^T A = ||A||^2
}

}  // namespace detail

// Gauge-penalized least squares for the lens-local transform:
// minimize ||A f - data||^2 + mu || delta^s_F (e^{-F/x} f) ||_W^2 by CG on
// the normal equations, then project the minimizer onto its solenoidal
// representative. The returned u satisfies the gauge to the solver tolerance.
inline InversionResult invert_local(const VectorXd& data, const RayOperator& A,
                                    const WittenOperator& gauge_op,
                                    const std::function<double(const VectorXd&)>& x_field,
                                    double F, const InversionOptions& opts = {}) {
  const GridDesc& grid = A.grid();
  const std::int64_t N = A.col_count();
  const auto& idx = SymmetricIndexSet::get(grid.dim, 4);
  const int nc = idx.size();

  // nodewise exponential weight e^{-F/x} on active nodes, zero elsewhere:
  // inactive nodes are excluded from the unknown set entirely.
  VectorXd mask = VectorXd::Zero(N);
  VectorXd expw = VectorXd::Zero(N);
  for (std::int64_t node = 0; node < grid.num_nodes(); ++node) {
    if (!gauge_op.d.active[node]) continue;
    const double x = x_field(grid.point(node));
    for (int c = 0; c < nc; ++c) {
      mask[node * nc + c] = 1.0;
      expw[node * nc + c] = std::exp(-F / x);
    }
  }

  InversionResult res{SymmetricTensorField(grid, 4), SymmetricTensorField(grid, 4),
                      {},           0.0,
                      0.0,          0.0,
                      0,            {}};

  res.mu = opts.mu >= 0 ? opts.mu
                        : 1e-3 * detail::estimate_norm2(A, opts.power_iters, 411u);

  // penalty P = delta^s_F diag(e^{-F/x}); the plain-symmetric normal term is
  // P^T W3 P = E W4 D W3^{-1} D^T W4 E
  auto penalty_normal = [&](const VectorXd& f) {
    const auto& D = gauge_op.d;
    VectorXd v = D.w_out.cwiseProduct(expw.cwiseProduct(f));
    VectorXd g = D.w_in.cwiseInverse().cwiseProduct(D.A.transpose() * v);
    return VectorXd(expw.cwiseProduct(D.w_out.cwiseProduct(D.A * g)));
  };

  auto normal_apply = [&](const VectorXd& f) {
    VectorXd masked = mask.cwiseProduct(f);
    VectorXd out = A.apply_adjoint(A.apply(masked));
    if (res.mu > 0) out += res.mu * penalty_normal(masked);
    return VectorXd(mask.cwiseProduct(out));
  };

  const VectorXd b = mask.cwiseProduct(A.apply_adjoint(data));

  // jacobi diagonal is expensive to assemble exactly; use a scalar guess
  VectorXd diag = VectorXd::Ones(N);

  VectorXd f = VectorXd::Zero(N);
  CgResult cg = pcg(normal_apply, b, diag, f, opts.cg_tol, opts.cg_max_iter);
  res.iterations = cg.iterations;

  // quadratic objective along the recorded residual history is monotone for
  // CG; store the normal-equation residual history as the curve
  res.objective_curve = cg.residual_history;

  res.f_raw.set_flat(f);
  const VectorXd pred = A.apply(f);
  res.data_residual = (pred - data).norm() / std::max(data.norm(), 1e-300);

  SolenoidalDecomposition dec =
      solenoidal_project(res.f_raw, gauge_op, opts.projector_tol);
  res.u = dec.u;
  res.gauge_norm = dec.residual_gauge;

  // nodes never touched by any ray: the data cannot constrain them
  const VectorXd massv = A.node_mass();
  for (std::int64_t node = 0; node < grid.num_nodes(); ++node)
    if (gauge_op.d.active[node] && massv[node] <= 1e-14)
      res.unconstrained_nodes.push_back(node);
  return res;
}

// Layer-stripped inversion over a schedule of nested lenses: each step
// inverts on the band swept since the previous level, subtracting the
// already-recovered outer layers from rays that cross them, and blends the
// overlap linearly.
struct LayerStripOptions {
  InversionOptions inversion;
  double band_overlap = 0.5;  // fraction of the band blended with the previous pass
  int convexity_samples = 6;
};

struct LayerStripResult {
  SymmetricTensorField u;
  std::vector<double> band_errors;  // data residual per band
  int bands = 0;
};

inline LayerStripResult layer_strip(
    const VectorXd& data, const std::vector<ChordSamples>& chords, const GridDesc& grid,
    const ChartMetric& metric, const BoundaryChart& boundary,
    const std::function<double(const VectorXd&)>& x_field, double F,
    const ChristoffelField& gamma, const std::vector<double>& tau_schedule,
    const LayerStripOptions& opts = {}) {
  if (tau_schedule.empty()) throw ConfigError("layer_strip: empty schedule");

  LayerStripResult out{SymmetricTensorField(grid, 4), {}, 0};
  const auto& idx = SymmetricIndexSet::get(grid.dim, 4);
  const int nc = idx.size();

  // verify strict convexity at each scheduled level before peeling; the
  // probe's concavity convention is for inward-increasing foliation
  // functions, so the boundary-adapted xtilde enters with a flipped sign
  BoundaryChart probe = boundary;
  probe.xtilde = [&boundary](const VectorXd& p) { return -boundary.xtilde(p); };
  for (double tau : tau_schedule) {
    auto verdict = convexity_probe(metric, probe, -tau, opts.convexity_samples);
    if (!verdict.ok)
      throw ScheduleError("layer_strip: level set not strictly convex at tau = " +
                          std::to_string(tau));
  }

  VectorXd recovered = VectorXd::Zero(grid.num_nodes() * nc);
  std::vector<std::uint8_t> covered(grid.num_nodes(), 0);

  double prev_tau = std::numeric_limits<double>::infinity();
  for (double tau : tau_schedule) {
    // band of nodes newly inside the lens {xtilde > tau}
    std::vector<std::uint8_t> band(grid.num_nodes(), 0);
    std::vector<std::uint8_t> band_or_covered(grid.num_nodes(), 0);
    int band_nodes = 0;
    for (std::int64_t node = 0; node < grid.num_nodes(); ++node) {
      const double xt = boundary.xtilde(grid.point(node));
      const bool inside = xt > tau && boundary.rho(grid.point(node)) >= -1e-12;
      band_or_covered[node] = inside;
      if (inside && !covered[node]) {
        band[node] = 1;
        ++band_nodes;
      }
    }
    if (band_nodes == 0) {
      prev_tau = tau;
      continue;
    }

    // rays staying inside the current lens
    std::vector<ChordSamples> lens_chords;
    for (const auto& c : chords) {
      if (!c.complete) {
        lens_chords.push_back(c);
        continue;
      }
      double min_xt = std::numeric_limits<double>::infinity();
      for (const auto& p : c.points) min_xt = std::min(min_xt, boundary.xtilde(p));
      ChordSamples copy = c;
      copy.complete = min_xt > tau;
      lens_chords.push_back(copy);
    }
    RayOperator A = assemble_forward_matrix(lens_chords, grid, 4);
    VectorXd band_data = VectorXd::Zero(A.row_count());
    for (int r = 0; r < A.row_count(); ++r)
      if (A.row(r).valid) band_data[r] = data[r];
    // subtract the contribution of the already recovered outer layers
    band_data -= A.apply(recovered);

    WittenOperator gauge_op =
        build_witten_operator(grid, gamma, WeightParam(F), x_field, band);
    InversionResult inv = invert_local(band_data, A, gauge_op, x_field, F, opts.inversion);
    out.band_errors.push_back(inv.data_residual);

    // stitch: linear blend over the overlap with previously covered nodes
    for (std::int64_t node = 0; node < grid.num_nodes(); ++node) {
      if (!band[node]) continue;
      const double xt = boundary.xtilde(grid.point(node));
      double w = 1.0;
      if (std::isfinite(prev_tau)) {
        const double depth = (prev_tau - xt) / std::max(prev_tau - tau, 1e-12);
        w = std::min(1.0, std::max(0.0, depth / std::max(opts.band_overlap, 1e-12)));
      }
      for (int c = 0; c < nc; ++c) {
        const std::int64_t k = node * nc + c;
        recovered[k] = covered[node] ? (1.0 - w) * recovered[k] + w * inv.u.flat()[k]
                                     : inv.u.flat()[k];
      }
      covered[node] = 1;
    }
    for (std::int64_t node = 0; node < grid.num_nodes(); ++node)
      covered[node] = covered[node] || band_or_covered[node];
    ++out.bands;
    prev_tau = tau;
  }
  out.u.set_flat(recovered);
  return out;
}

}  // namespace tray

#endif  // TRAY_INVERSION_HPP

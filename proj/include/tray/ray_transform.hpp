// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_RAY_TRANSFORM_HPP
#define TRAY_RAY_TRANSFORM_HPP

#include "tray/common.hpp"
#include "tray/fan.hpp"
#include "tray/geodesic.hpp"
#include "tray/stiffness.hpp"
#include "tray/tensor_field.hpp"

#include <string>
#include <vector>

namespace tray {

// Composite trapezoid quadrature of <f(gamma(t)), gamma_dot^m(t)> along one
// integrated path; linear in f.
inline double forward_single(const SymmetricTensorField& f, const GeodesicPath& path) {
  const int N = path.size();
  if (N < 2) return 0.0;
  double acc = 0;
  double prev = f.contract(path.points[0], path.velocities[0]);
  for (int i = 1; i < N; ++i) {
    const double cur = f.contract(path.points[i], path.velocities[i]);
    acc += 0.5 * (prev + cur) * (path.t[i] - path.t[i - 1]);
    prev = cur;
  }
  return acc;
}

// One boundary-to-boundary chord through a fan entry, sampled for quadrature.
// Produced once per fan entry and reused across fields.
struct ChordSamples {
  std::vector<VectorXd> points;
  std::vector<VectorXd> velocities;
  std::vector<double> qw;  // trapezoid weights, sum equals chord length
  double length = 0.0;
  double min_x = 0.0;  // smallest lens coordinate along the chord
  bool complete = false;
  std::string error;

  int size() const { return static_cast<int>(points.size()); }
};

struct TraceOptions {
  double step = 1e-3;
  double tmax = 10.0;
  bool require_lens_local = false;  // flag chords that dip below x = 0
  double lens_floor = 0.0;
};

// Integrates the full chord through a fan entry: forward and backward half
// rays are stitched with a consistent orientation. For even rank the two
// half-ray orientations contribute identically.
inline ChordSamples trace_chord(const ChartMetric& metric, const BoundaryChart& boundary,
                                const FanEntry& entry, const TraceOptions& opts) {
  ChordSamples out;
  if (!entry.admissible) {
    out.error = "inadmissible fan entry";
    return out;
  }
  try {
    auto [p0, v0] = launch_state(metric, boundary, entry);
    GeodesicOptions gopt;
    gopt.require_exit = false;
    GeodesicPath fwd = integrate_geodesic(metric, boundary, p0, v0, opts.step, opts.tmax, gopt);
    GeodesicPath bwd =
        integrate_geodesic(metric, boundary, p0, -v0, opts.step, opts.tmax, gopt);
    if (!fwd.exited || !bwd.exited) {
      out.error = "chord did not exit within tmax";
      return out;
    }
    // stitch: reversed backward half (orientation -(-v) = +v), then forward
    const int nb = bwd.size(), nf = fwd.size();
    std::vector<double> t;
    for (int i = nb - 1; i >= 1; --i) {
      out.points.push_back(bwd.points[i]);
      out.velocities.push_back(-bwd.velocities[i]);
      t.push_back(-bwd.t[i]);
    }
    for (int i = 0; i < nf; ++i) {
      out.points.push_back(fwd.points[i]);
      out.velocities.push_back(fwd.velocities[i]);
      t.push_back(fwd.t[i]);
    }
    const int N = out.size();
    out.qw.assign(N, 0.0);
    for (int i = 0; i + 1 < N; ++i) {
      const double dt = t[i + 1] - t[i];
      out.qw[i] += 0.5 * dt;
      out.qw[i + 1] += 0.5 * dt;
    }
    out.length = t.back() - t.front();
    out.min_x = std::numeric_limits<double>::infinity();
    for (const auto& q : out.points) out.min_x = std::min(out.min_x, boundary.x(q));
    if (opts.require_lens_local && out.min_x < opts.lens_floor - 1e-9) {
      out.error = "chord leaves the lens";
      return out;
    }
    out.complete = true;
  } catch (const TrayError& e) {
    out.error = e.what();
  }
  return out;
}

inline std::vector<ChordSamples> trace_fan(const ChartMetric& metric,
                                           const BoundaryChart& boundary,
                                           const GeodesicFan& fan,
                                           const TraceOptions& opts) {
  std::vector<ChordSamples> out;
  out.reserve(fan.entries.size());
  for (const auto& e : fan.entries) out.push_back(trace_chord(metric, boundary, e, opts));
  return out;
}

// Transform values over a fan of local geodesics; inadmissible or failed
// entries are flagged, never silently zeroed.
struct RayData {
  GeodesicFan fan;
  std::vector<double> values;
  std::vector<double> lengths;
  std::vector<std::uint8_t> valid;
  std::vector<std::string> errors;

  int size() const { return static_cast<int>(values.size()); }
  int valid_count() const {
    int c = 0;
    for (auto v : valid) c += v;
    return c;
  }
};

inline double forward_traced(const SymmetricTensorField& f, const ChordSamples& chord) {
  double acc = 0;
  for (int i = 0; i < chord.size(); ++i)
    acc += chord.qw[i] * f.contract(chord.points[i], chord.velocities[i]);
  return acc;
}

inline RayData forward_fan(const SymmetricTensorField& f, const GeodesicFan& fan,
                           const ChartMetric& metric, const BoundaryChart& boundary,
                           const TraceOptions& opts) {
  RayData data;
  data.fan = fan;
  data.values.assign(fan.entries.size(), 0.0);
  data.lengths.assign(fan.entries.size(), 0.0);
  data.valid.assign(fan.entries.size(), 0);
  data.errors.assign(fan.entries.size(), "");
  for (std::size_t i = 0; i < fan.entries.size(); ++i) {
    ChordSamples chord = trace_chord(metric, boundary, fan.entries[i], opts);
    if (!chord.complete) {
      data.errors[i] = chord.error;
      continue;
    }
    data.values[i] = forward_traced(f, chord);
    data.lengths[i] = chord.length;
    data.valid[i] = 1;
  }
  return data;
}

// b_ijkl = a_ijkl / (rho c_P^6) sampled at grid nodes; the node sampling
// matches stiffness_to_symmetric so the qP functional and the symmetrized
// transform agree to round-off.
inline DenseTensorField qp_reduction_field(
    const StiffnessField& a, const std::function<double(const VectorXd&)>& rho,
    const std::function<double(const VectorXd&)>& c_p) {
  DenseTensorField b = DenseTensorField::zeros(a.grid, 4);
  const std::int64_t tc = b.tuple_count();
  for (std::int64_t node = 0; node < a.grid.num_nodes(); ++node) {
    const VectorXd p = a.grid.point(node);
    const double scale = 1.0 / (rho(p) * std::pow(c_p(p), 6));
    for (std::int64_t f = 0; f < tc; ++f)
      b.comps[node * tc + f] = scale * a.comps[node * tc + f];
  }
  return b;
}

inline double dense4_contract(const DenseTensorField& b, const VectorXd& p,
                              const VectorXd& v) {
  const int n = b.grid.dim;
  const auto st = b.grid.stencil(p);
  const std::int64_t tc = b.tuple_count();
  double s = 0;
  for (int c = 0; c < st.count; ++c) {
    const double* base = b.comps.data() + st.idx[c] * tc;
    double acc = 0;
    std::int64_t flat = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l, ++flat)
            acc += base[flat] * v[i] * v[j] * v[k] * v[l];
    s += st.w[c] * acc;
  }
  return s;
}

// qP travel-time perturbation along a chord: integral of
// a_ijkl / (rho c_P^6) gamma_dot^i gamma_dot^j gamma_dot^k gamma_dot^l dt.
inline double qp_perturbation(const DenseTensorField& b, const ChordSamples& chord) {
  double acc = 0;
  for (int i = 0; i < chord.size(); ++i)
    acc += chord.qw[i] * dense4_contract(b, chord.points[i], chord.velocities[i]);
  return acc;
}

inline double qp_perturbation(const StiffnessField& a,
                              const std::function<double(const VectorXd&)>& rho,
                              const std::function<double(const VectorXd&)>& c_p,
                              const ChordSamples& chord) {
  return qp_perturbation(qp_reduction_field(a, rho, c_p), chord);
}

inline double qp_perturbation(const StiffnessField& a,
                              const std::function<double(const VectorXd&)>& rho,
                              const std::function<double(const VectorXd&)>& c_p,
                              const GeodesicPath& path) {
  const DenseTensorField b = qp_reduction_field(a, rho, c_p);
  double acc = 0;
  const int N = path.size();
  if (N < 2) return 0.0;
  double prev = dense4_contract(b, path.points[0], path.velocities[0]);
  for (int i = 1; i < N; ++i) {
    const double cur = dense4_contract(b, path.points[i], path.velocities[i]);
    acc += 0.5 * (prev + cur) * (path.t[i] - path.t[i - 1]);
    prev = cur;
  }
  return acc;
}

}  // namespace tray

#endif  // TRAY_RAY_TRANSFORM_HPP

// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_GRID_HPP
#define TRAY_GRID_HPP

#include "tray/common.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace tray {

// Axis-aligned box grid on a coordinate chart. Node (i0,..,i_{n-1}) sits at
// lo + i*h with h = (hi-lo)/(shape-1); linear index is row-major.
struct GridDesc {
  int dim = 0;
  std::array<int, 4> shape{};
  std::array<double, 4> lo{}, hi{};

  static GridDesc box(int dim, std::array<int, 4> shape, std::array<double, 4> lo,
                      std::array<double, 4> hi) {
    GridDesc g;
    g.dim = dim;
    g.shape = shape;
    g.lo = lo;
    g.hi = hi;
    for (int d = 0; d < dim; ++d)
      if (shape[d] < 2 || hi[d] <= lo[d])
        throw ConfigError("GridDesc: need >= 2 nodes and hi > lo per axis");
    return g;
  }

  static GridDesc cube(int dim, int nodes, double lo_v, double hi_v) {
    std::array<int, 4> s{};
    std::array<double, 4> l{}, h{};
    for (int d = 0; d < dim; ++d) {
      s[d] = nodes;
      l[d] = lo_v;
      h[d] = hi_v;
    }
    return box(dim, s, l, h);
  }

  double spacing(int d) const { return (hi[d] - lo[d]) / (shape[d] - 1); }
  double min_spacing() const {
    double m = spacing(0);
    for (int d = 1; d < dim; ++d) m = std::min(m, spacing(d));
    return m;
  }

  std::int64_t num_nodes() const {
    std::int64_t n = 1;
    for (int d = 0; d < dim; ++d) n *= shape[d];
    return n;
  }

  std::int64_t index(const std::array<int, 4>& iv) const {
    std::int64_t idx = 0;
    for (int d = 0; d < dim; ++d) idx = idx * shape[d] + iv[d];
    return idx;
  }

  std::array<int, 4> coords(std::int64_t idx) const {
    std::array<int, 4> iv{};
    for (int d = dim - 1; d >= 0; --d) {
      iv[d] = static_cast<int>(idx % shape[d]);
      idx /= shape[d];
    }
    return iv;
  }

  VectorXd point(const std::array<int, 4>& iv) const {
    VectorXd p(dim);
    for (int d = 0; d < dim; ++d) p[d] = lo[d] + iv[d] * spacing(d);
    return p;
  }
  VectorXd point(std::int64_t idx) const { return point(coords(idx)); }

  bool contains(const VectorXd& p, double tol = 1e-12) const {
    for (int d = 0; d < dim; ++d)
      if (p[d] < lo[d] - tol || p[d] > hi[d] + tol) return false;
    return true;
  }

  // Multilinear interpolation stencil (2^dim corner nodes and weights).
  struct Stencil {
    std::array<std::int64_t, 16> idx;
    std::array<double, 16> w;
    int count = 0;
  };

  Stencil stencil(const VectorXd& p) const {
    if (!contains(p, 1e-9))
      throw OutOfDomainError("interpolation point outside grid chart");
    std::array<int, 4> base{};
    std::array<double, 4> frac{};
    for (int d = 0; d < dim; ++d) {
      double s = (p[d] - lo[d]) / spacing(d);
      int i = static_cast<int>(std::floor(s));
      i = std::min(std::max(i, 0), shape[d] - 2);
      base[d] = i;
      frac[d] = std::min(std::max(s - i, 0.0), 1.0);
    }
    Stencil st;
    const int corners = 1 << dim;
    for (int c = 0; c < corners; ++c) {
      std::array<int, 4> iv = base;
      double w = 1.0;
      for (int d = 0; d < dim; ++d) {
        if (c & (1 << d)) {
          iv[d] += 1;
          w *= frac[d];
        } else {
          w *= 1.0 - frac[d];
        }
      }
      st.idx[st.count] = index(iv);
      st.w[st.count] = w;
      ++st.count;
    }
    return st;
  }

  // Composite trapezoid quadrature weight of a node (volume integration).
  double trapezoid_weight(const std::array<int, 4>& iv) const {
    double w = 1.0;
    for (int d = 0; d < dim; ++d) {
      w *= spacing(d);
      if (iv[d] == 0 || iv[d] == shape[d] - 1) w *= 0.5;
    }
    return w;
  }

  std::vector<double> trapezoid_weights() const {
    std::vector<double> w(num_nodes());
    for (std::int64_t i = 0; i < num_nodes(); ++i) w[i] = trapezoid_weight(coords(i));
    return w;
  }

  bool same_layout(const GridDesc& o) const {
    if (dim != o.dim) return false;
    for (int d = 0; d < dim; ++d)
      if (shape[d] != o.shape[d] || lo[d] != o.lo[d] || hi[d] != o.hi[d]) return false;
    return true;
  }
};

}  // namespace tray

#endif  // TRAY_GRID_HPP

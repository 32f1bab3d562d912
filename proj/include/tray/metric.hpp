// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_METRIC_HPP
#define TRAY_METRIC_HPP

#include "tray/common.hpp"
#include "tray/grid.hpp"

#include <array>
#include <functional>
#include <utility>
#include <vector>

namespace tray {

// Radial wave-speed profile c(r) > 0. The derivative defaults to a central
// difference of the profile at step 1e-5 when no exact form is supplied.
class RadialProfile {
public:
  RadialProfile() : RadialProfile(constant(1.0)) {}

  static RadialProfile constant(double v) {
    return RadialProfile([v](double) { return v; }, [](double) { return 0.0; });
  }
  // c(r) = c0 + slope * r
  static RadialProfile linear(double c0, double slope) {
    return RadialProfile([=](double r) { return c0 + slope * r; },
                         [=](double) { return slope; });
  }
  // c(r) = c0 * exp(rate * r)
  static RadialProfile exponential(double c0, double rate) {
    return RadialProfile([=](double r) { return c0 * std::exp(rate * r); },
                         [=](double r) { return c0 * rate * std::exp(rate * r); });
  }
  static RadialProfile custom(std::function<double(double)> c,
                              std::function<double(double)> dc = nullptr) {
    return RadialProfile(std::move(c), std::move(dc));
  }
  // Piecewise-linear table, e.g. PREM-style layered speeds.
  static RadialProfile from_table(std::vector<double> r, std::vector<double> c) {
    if (r.size() != c.size() || r.size() < 2)
      throw InvalidProfileError("profile table needs >= 2 matching samples");
    auto eval = [r = std::move(r), c = std::move(c)](double x) {
      if (x <= r.front()) return c.front();
      if (x >= r.back()) return c.back();
      auto it = std::upper_bound(r.begin(), r.end(), x);
      std::size_t i = it - r.begin();
      double t = (x - r[i - 1]) / (r[i] - r[i - 1]);
      return (1 - t) * c[i - 1] + t * c[i];
    };
    return RadialProfile(eval, nullptr);
  }

  double operator()(double r) const { return c_(r); }
  double deriv(double r) const {
    if (dc_) return dc_(r);
    const double h = 1e-5;
    return (c_(r + h) - c_(r - h)) / (2 * h);
  }

private:
  RadialProfile(std::function<double(double)> c, std::function<double(double)> dc)
      : c_(std::move(c)), dc_(std::move(dc)) {}

  std::function<double(double)> c_;
  std::function<double(double)> dc_;
};

enum class MetricProvenance { euclidean, conformal_radial, user_grid };

// Metric g_ij on a single coordinate chart, with first-derivative access.
// Built-in provenances carry closed-form derivatives; user-supplied charts
// fall back to central differences at step 1e-5 of the chart scale.
class ChartMetric {
public:
  using GFn = std::function<MatrixXd(const VectorXd&)>;
  using DgFn = std::function<std::vector<MatrixXd>(const VectorXd&)>;

  static ChartMetric euclidean(int dim) {
    ChartMetric m(dim, MetricProvenance::euclidean);
    return m;
  }

  // g_ij(p) = c(|p|)^{-2} delta_ij
  static ChartMetric conformal_radial(int dim, RadialProfile profile) {
    ChartMetric m(dim, MetricProvenance::conformal_radial);
    m.profile_ = std::move(profile);
    return m;
  }

  static ChartMetric custom(int dim, GFn g, DgFn dg = nullptr) {
    ChartMetric m(dim, MetricProvenance::user_grid);
    m.g_fn_ = std::move(g);
    m.dg_fn_ = std::move(dg);
    return m;
  }

  // Metric sampled on a grid (TRAYMET1 payload); multilinear interpolation
  // between nodes, finite differences for derivatives.
  static ChartMetric from_grid(const GridDesc& grid, std::vector<double> samples) {
    const int n = grid.dim;
    if (static_cast<std::int64_t>(samples.size()) != grid.num_nodes() * n * n)
      throw IoError("metric grid payload size mismatch");
    auto g = [grid, n, samples = std::move(samples)](const VectorXd& p) {
      auto st = grid.stencil(p);
      MatrixXd out = MatrixXd::Zero(n, n);
      for (int k = 0; k < st.count; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            out(i, j) += st.w[k] * samples[st.idx[k] * n * n + i * n + j];
      return out;
    };
    return custom(n, g);
  }

  int dim() const { return dim_; }
  MetricProvenance provenance() const { return prov_; }
  const RadialProfile& profile() const { return profile_; }

  MatrixXd g(const VectorXd& p) const {
    MatrixXd m = eval(p);
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-14 * (1 + m.cwiseAbs().maxCoeff()))
      throw DegenerateMetricError("metric not symmetric at queried point");
    return m;
  }

  MatrixXd g_inverse(const VectorXd& p) const {
    MatrixXd m = g(p);
    Eigen::LLT<MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
      throw DegenerateMetricError("metric not positive definite at queried point");
    return llt.solve(MatrixXd::Identity(dim_, dim_));
  }

  // dg[k](i,j) = d_k g_ij
  std::vector<MatrixXd> dg(const VectorXd& p) const {
    std::vector<MatrixXd> out(dim_, MatrixXd::Zero(dim_, dim_));
    switch (prov_) {
      case MetricProvenance::euclidean:
        return out;
      case MetricProvenance::conformal_radial: {
        const double r = p.norm();
        if (r < 1e-12) return out;
        const double c = checked_c(r);
        const double dc = profile_.deriv(r);
        const double factor = -2.0 * dc / (c * c * c);
        for (int k = 0; k < dim_; ++k)
          out[k] = factor * (p[k] / r) * MatrixXd::Identity(dim_, dim_);
        return out;
      }
      case MetricProvenance::user_grid: {
        if (dg_fn_) return dg_fn_(p);
        const double h = fd_step_;
        VectorXd q = p;
        for (int k = 0; k < dim_; ++k) {
          q[k] = p[k] + h;
          MatrixXd gp = eval(q);
          q[k] = p[k] - h;
          MatrixXd gm = eval(q);
          q[k] = p[k];
          out[k] = (gp - gm) / (2 * h);
        }
        return out;
      }
    }
    return out;
  }

  double fd_step() const { return fd_step_; }
  void set_fd_step(double h) { fd_step_ = h; }

private:
  ChartMetric(int dim, MetricProvenance prov) : dim_(dim), prov_(prov) {
    if (dim < 2) throw ConfigError("ChartMetric: dim must be >= 2");
  }

  double checked_c(double r) const {
    double c = profile_(r);
    if (!(c > 0)) throw DegenerateMetricError("conformal profile c <= 0");
    return c;
  }

  MatrixXd eval(const VectorXd& p) const {
    switch (prov_) {
      case MetricProvenance::euclidean:
        return MatrixXd::Identity(dim_, dim_);
      case MetricProvenance::conformal_radial: {
        const double c = checked_c(p.norm());
        return MatrixXd::Identity(dim_, dim_) / (c * c);
      }
      case MetricProvenance::user_grid:
        return g_fn_(p);
    }
    return MatrixXd::Identity(dim_, dim_);
  }

  int dim_;
  MetricProvenance prov_;
  RadialProfile profile_;
  GFn g_fn_;
  DgFn dg_fn_;
  double fd_step_ = 1e-5;
};

// Christoffel symbols at one point, Gamma^k_ij symmetric in (i, j).
struct ChristoffelSymbols {
  int dim = 0;
  std::vector<double> v;  // k * dim * dim + i * dim + j

  double operator()(int k, int i, int j) const { return v[(k * dim + i) * dim + j]; }
  double& at(int k, int i, int j) { return v[(k * dim + i) * dim + j]; }

  // acc^k = -Gamma^k_ij u^i u^j (geodesic acceleration)
  VectorXd acceleration(const VectorXd& u) const {
    VectorXd a = VectorXd::Zero(dim);
    for (int k = 0; k < dim; ++k) {
      double s = 0;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) s += (*this)(k, i, j) * u[i] * u[j];
      a[k] = -s;
    }
    return a;
  }
};

// Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij); computed from a
// symmetric formula so Gamma^k_ij == Gamma^k_ji exactly.
inline ChristoffelSymbols christoffel(const ChartMetric& metric, const VectorXd& p) {
  const int n = metric.dim();
  ChristoffelSymbols out;
  out.dim = n;
  out.v.assign(static_cast<std::size_t>(n) * n * n, 0.0);
  if (metric.provenance() == MetricProvenance::euclidean) return out;

  const MatrixXd ginv = metric.g_inverse(p);  // throws on degenerate metric
  const std::vector<MatrixXd> dg = metric.dg(p);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0;
        for (int l = 0; l < n; ++l)
          s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        out.at(k, i, j) = 0.5 * s;
        out.at(k, j, i) = 0.5 * s;
      }
  return out;
}

// Christoffel symbols precomputed at every grid node.
struct ChristoffelField {
  GridDesc grid;
  int dim = 0;
  std::vector<double> v;  // node * dim^3 + (k*dim+i)*dim+j

  static ChristoffelField build(const ChartMetric& metric, const GridDesc& grid) {
    ChristoffelField f;
    f.grid = grid;
    f.dim = metric.dim();
    const std::int64_t nn = grid.num_nodes();
    const int n3 = f.dim * f.dim * f.dim;
    f.v.assign(nn * n3, 0.0);
    if (metric.provenance() == MetricProvenance::euclidean) return f;
    for (std::int64_t node = 0; node < nn; ++node) {
      ChristoffelSymbols c = christoffel(metric, grid.point(node));
      std::copy(c.v.begin(), c.v.end(), f.v.begin() + node * n3);
    }
    return f;
  }

  double at(std::int64_t node, int k, int i, int j) const {
    const int n = dim;
    return v[node * n * n * n + (k * n + i) * n + j];
  }
};

}  // namespace tray

#endif  // TRAY_METRIC_HPP

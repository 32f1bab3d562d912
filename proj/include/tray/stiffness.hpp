// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_STIFFNESS_HPP
#define TRAY_STIFFNESS_HPP

#include "tray/common.hpp"
#include "tray/tensor_field.hpp"

#include <functional>
#include <vector>

namespace tray {

// Stiffness perturbation a_ijkl sampled on a grid, dense n^4 components per
// node with the elasticity symmetries a_ijkl = a_jikl = a_klij.
struct StiffnessField {
  GridDesc grid;
  std::vector<double> comps;  // node * n^4 + ((i*n+j)*n+k)*n+l

  static StiffnessField zeros(const GridDesc& grid) {
    StiffnessField s;
    s.grid = grid;
    const int n = grid.dim;
    s.comps.assign(grid.num_nodes() * n * n * n * n, 0.0);
    return s;
  }

  int dim() const { return grid.dim; }
  std::int64_t tuple_count() const {
    const std::int64_t n = grid.dim;
    return n * n * n * n;
  }
  double& at(std::int64_t node, int i, int j, int k, int l) {
    const int n = grid.dim;
    return comps[node * tuple_count() + ((static_cast<std::int64_t>(i) * n + j) * n + k) * n + l];
  }
  double at(std::int64_t node, int i, int j, int k, int l) const {
    const int n = grid.dim;
    return comps[node * tuple_count() + ((static_cast<std::int64_t>(i) * n + j) * n + k) * n + l];
  }

  // lambda(p) d_ij d_kl + mu(p) (d_ik d_jl + d_il d_jk)
  static StiffnessField isotropic(const GridDesc& grid,
                                  const std::function<double(const VectorXd&)>& lambda,
                                  const std::function<double(const VectorXd&)>& mu) {
    StiffnessField s = zeros(grid);
    const int n = grid.dim;
    for (std::int64_t node = 0; node < grid.num_nodes(); ++node) {
      const VectorXd p = grid.point(node);
      const double lam = lambda(p), m = mu(p);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
              s.at(node, i, j, k, l) = lam * (i == j) * (k == l) +
                                       m * ((i == k) * (j == l) + (i == l) * (j == k));
    }
    return s;
  }

  // Random perturbation with the elasticity symmetries: a symmetric matrix
  // over unordered (ij) pairs, modulated by a smooth envelope.
  static StiffnessField random_anisotropic(
      const GridDesc& grid, double amplitude, std::uint64_t seed,
      const std::function<double(const VectorXd&)>& envelope) {
    StiffnessField s = zeros(grid);
    const int n = grid.dim;
    Rng rng(seed);
    std::normal_distribution<double> gauss;
    const int pairs = n * (n + 1) / 2;
    MatrixXd voigt(pairs, pairs);
    for (int a = 0; a < pairs; ++a)
      for (int b = a; b < pairs; ++b) voigt(a, b) = voigt(b, a) = gauss(rng);
    auto pair_id = [n](int i, int j) {
      if (i > j) std::swap(i, j);
      return i * n - i * (i - 1) / 2 + (j - i);
    };
    for (std::int64_t node = 0; node < grid.num_nodes(); ++node) {
      const double env = amplitude * envelope(grid.point(node));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
              s.at(node, i, j, k, l) = env * voigt(pair_id(i, j), pair_id(k, l));
    }
    return s;
  }

  void validate_symmetries(double tol = 1e-12) const {
    const int n = grid.dim;
    double scale = 1e-300;
    for (double v : comps) scale = std::max(scale, std::abs(v));
    for (std::int64_t node = 0; node < grid.num_nodes(); ++node)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
              const double v = at(node, i, j, k, l);
              if (std::abs(v - at(node, j, i, k, l)) > tol * scale ||
                  std::abs(v - at(node, k, l, i, j)) > tol * scale)
                throw InvalidStiffnessError("stiffness symmetries violated");
            }
  }

  // Pointwise a_ijkl v^i v^j v^k v^l with multilinear interpolation.
  double contract4(const VectorXd& p, const VectorXd& v) const {
    const int n = grid.dim;
    const auto st = grid.stencil(p);
    const std::int64_t tc = tuple_count();
    double s = 0;
    for (int c = 0; c < st.count; ++c) {
      const double* base = comps.data() + st.idx[c] * tc;
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
};

// f = Sym(a / (rho c_P^6)): the rank-4 symmetric field carried by the qP
// travel-time perturbation. Validates the stiffness symmetries first.
inline SymmetricTensorField stiffness_to_symmetric(
    const StiffnessField& a, const std::function<double(const VectorXd&)>& rho,
    const std::function<double(const VectorXd&)>& c_p) {
  a.validate_symmetries();
  const int n = a.grid.dim;
  DenseTensorField b = DenseTensorField::zeros(a.grid, 4);
  for (std::int64_t node = 0; node < a.grid.num_nodes(); ++node) {
    const VectorXd p = a.grid.point(node);
    const double c = c_p(p);
    const double scale = 1.0 / (rho(p) * std::pow(c, 6));
    const std::int64_t tc = b.tuple_count();
    for (std::int64_t f = 0; f < tc; ++f)
      b.comps[node * tc + f] = scale * a.comps[node * tc + f];
  }
  return symmetrize(b);
}

}  // namespace tray

#endif  // TRAY_STIFFNESS_HPP

// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_TENSOR_CALCULUS_HPP
#define TRAY_TENSOR_CALCULUS_HPP

#include "tray/common.hpp"
#include "tray/metric.hpp"
#include "tray/tensor_field.hpp"

#include <vector>

namespace tray {

namespace detail {

// 2nd-order derivative stencil along one axis: central in the interior,
// one-sided at the grid edges. Returns (offset, coefficient) pairs in units
// of nodes along the axis.
struct DerivStencil {
  int offsets[3];
  double coeffs[3];
  int count;
};

inline DerivStencil deriv_stencil(int i, int n, double h) {
  DerivStencil s;
  if (i == 0) {
    s.count = 3;
    s.offsets[0] = 0;
    s.offsets[1] = 1;
    s.offsets[2] = 2;
    s.coeffs[0] = -1.5 / h;
    s.coeffs[1] = 2.0 / h;
    s.coeffs[2] = -0.5 / h;
  } else if (i == n - 1) {
    s.count = 3;
    s.offsets[0] = 0;
    s.offsets[1] = -1;
    s.offsets[2] = -2;
    s.coeffs[0] = 1.5 / h;
    s.coeffs[1] = -2.0 / h;
    s.coeffs[2] = 0.5 / h;
  } else {
    s.count = 2;
    s.offsets[0] = 1;
    s.offsets[1] = -1;
    s.coeffs[0] = 0.5 / h;
    s.coeffs[1] = -0.5 / h;
  }
  return s;
}

}  // namespace detail

// (grad f)_{k, j_1..j_m} = d_k f_{j_1..j_m} - sum_p Gamma^q_{k j_p} f_{..q..};
// dense (m+1)-tensor output, derivative index first.
inline DenseTensorField covariant_derivative(const SymmetricTensorField& f,
                                             const ChristoffelField& gamma) {
  const GridDesc& grid = f.grid();
  if (!grid.same_layout(gamma.grid))
    throw ConfigError("covariant_derivative: grid mismatch with Christoffel field");
  const int n = grid.dim;
  const int m = f.rank();
  DenseTensorField out = DenseTensorField::zeros(grid, m + 1);
  const auto& idx = f.index_set();
  const int nc = idx.size();

  std::vector<int> tup(m + 1);
  for (std::int64_t node = 0; node < grid.num_nodes(); ++node) {
    const auto iv = grid.coords(node);
    const std::int64_t out_tc = out.tuple_count();
    for (std::int64_t flat = 0; flat < out_tc; ++flat) {
      std::int64_t r = flat;
      for (int i = m; i >= 0; --i) {
        tup[i] = static_cast<int>(r % n);
        r /= n;
      }
      const int k = tup[0];
      const int* J = tup.data() + 1;

      double val = 0;
      // partial derivative along axis k
      const auto st = detail::deriv_stencil(iv[k], grid.shape[k], grid.spacing(k));
      const int cJ = idx.position(J);
      for (int s = 0; s < st.count; ++s) {
        auto jv = iv;
        jv[k] += st.offsets[s];
        val += st.coeffs[s] * f.at(grid.index(jv), cJ);
      }
      // Christoffel corrections
      for (int p = 0; p < m; ++p) {
        int mod[4];
        for (int i = 0; i < m; ++i) mod[i] = J[i];
        for (int q = 0; q < n; ++q) {
          const double G = gamma.at(node, q, k, J[p]);
          if (G == 0.0) continue;
          mod[p] = q;
          val -= G * f.at(node, idx.position(mod));
        }
        mod[p] = J[p];
      }
      out.comps[node * out_tc + flat] = val;
    }
  }
  return out;
}

// d^s f = Sym(grad f): computed directly in canonical storage,
// (d^s f)_J = (1/(m+1)) sum_q [(grad f)_{J_q, J \ q}]. Input rank <= 3.
inline SymmetricTensorField sym_diff(const SymmetricTensorField& f,
                                     const ChristoffelField& gamma) {
  if (f.rank() >= 4) throw RankError("sym_diff: rank-4 input would overflow rank 4");
  const GridDesc& grid = f.grid();
  if (!grid.same_layout(gamma.grid))
    throw ConfigError("sym_diff: grid mismatch with Christoffel field");
  const int n = grid.dim;
  const int m = f.rank();
  SymmetricTensorField out(grid, m + 1);
  const auto& idx_in = f.index_set();
  const auto& idx_out = out.index_set();
  const int nc_out = idx_out.size();

  for (std::int64_t node = 0; node < grid.num_nodes(); ++node) {
    const auto iv = grid.coords(node);
    for (int c = 0; c < nc_out; ++c) {
      const auto& J = idx_out.tuple(c);
      double acc = 0;
      for (int q = 0; q <= m; ++q) {
        const int k = J[q];
        int rest[4];
        int w = 0;
        for (int i = 0; i <= m; ++i)
          if (i != q) rest[w++] = J[i];

        double val = 0;
        const int cR = idx_in.position(rest);
        const auto st = detail::deriv_stencil(iv[k], grid.shape[k], grid.spacing(k));
        for (int s = 0; s < st.count; ++s) {
          auto jv = iv;
          jv[k] += st.offsets[s];
          val += st.coeffs[s] * f.at(grid.index(jv), cR);
        }
        for (int p = 0; p < m; ++p) {
          int mod[4];
          for (int i = 0; i < m; ++i) mod[i] = rest[i];
          for (int qq = 0; qq < n; ++qq) {
            const double G = gamma.at(node, qq, k, rest[p]);
            if (G == 0.0) continue;
            mod[p] = qq;
            val -= G * f.at(node, idx_in.position(mod));
          }
        }
        acc += val;
      }
      out.at(node, c) = acc / (m + 1);
    }
  }
  return out;
}

// Pointwise multiply by exp(s * F / x); used to conjugate fields rather than
// operators when the dynamic range allows it.
inline SymmetricTensorField exp_weight_multiply(
    const SymmetricTensorField& f, double F, double sign,
    const std::function<double(const VectorXd&)>& x_field) {
  SymmetricTensorField out = f;
  const int nc = f.component_count();
  for (std::int64_t node = 0; node < f.grid().num_nodes(); ++node) {
    const double x = x_field(f.grid().point(node));
    if (!(x > 0)) throw WeightSingularityError("exponential weight needs x > 0");
    const double w = std::exp(sign * F / x);
    for (int c = 0; c < nc; ++c) out.at(node, c) *= w;
  }
  return out;
}

}  // namespace tray

#endif  // TRAY_TENSOR_CALCULUS_HPP

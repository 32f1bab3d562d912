// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_DISCRETE_OPS_HPP
#define TRAY_DISCRETE_OPS_HPP

#include "tray/common.hpp"
#include "tray/metric.hpp"
#include "tray/tensor_calculus.hpp"
#include "tray/tensor_field.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <optional>
#include <vector>

namespace tray {

using SparseMat = Eigen::SparseMatrix<double>;

// Diagonal inner-product weights of a flattened rank-m field: trapezoid node
// volume times index multiplicity, optionally times the scattering volume
// factor x^{-n-1}. Multiplicity weights realize the M(m) block weights in
// full canonical storage.
inline VectorXd field_weights(const GridDesc& grid, int rank, bool scattering_volume = false,
                              const std::function<double(const VectorXd&)>& x_field = nullptr,
                              const std::vector<std::uint8_t>* active = nullptr) {
  const auto& idx = SymmetricIndexSet::get(grid.dim, rank);
  const int nc = idx.size();
  VectorXd w(grid.num_nodes() * nc);
  for (std::int64_t node = 0; node < grid.num_nodes(); ++node) {
    double vol = grid.trapezoid_weight(grid.coords(node));
    if (active && !(*active)[node]) vol = 1.0;  // inert placeholder, never used
    if (scattering_volume) {
      const double x = x_field(grid.point(node));
      vol *= (active && !(*active)[node]) ? 1.0 : std::pow(std::max(x, 1e-12), -grid.dim - 1);
    }
    for (int c = 0; c < nc; ++c) w[node * nc + c] = vol * idx.multiplicity(c);
  }
  return w;
}

// The discrete conjugated symmetric differential d^s_F as a sparse stencil
// matrix between flattened canonical fields (rank m -> m+1), with the paired
// diagonal weights that make the weighted transpose the exact discrete
// divergence delta^s_F. The exponential conjugation is folded into the
// stencil entries as exp(F (1/x(col) - 1/x(row))), which stays bounded for
// neighboring nodes. Nodes outside the active mask are Dirichlet: their rows
// and columns are dropped.
struct DiscreteSymDiff {
  GridDesc grid;
  int rank_in = 0;
  double F = 0.0;
  SparseMat A;
  VectorXd w_in, w_out;
  std::vector<std::uint8_t> active;

  std::int64_t cols() const { return A.cols(); }
  std::int64_t rows() const { return A.rows(); }

  VectorXd apply(const VectorXd& v) const { return A * v; }
  // delta^s_F w = W_in^{-1} A^T W_out w : the exact (m, m+1)-adjoint
  VectorXd apply_adjoint(const VectorXd& w) const {
    return w_in.cwiseInverse().cwiseProduct(A.transpose() * w_out.cwiseProduct(w));
  }
};

struct SymDiffOptions {
  double F = 0.0;
  std::function<double(const VectorXd&)> x_field;  // required when F != 0 or sc volume
  bool scattering_volume = false;
  std::vector<std::uint8_t> active;  // per node; empty = all active
};

inline DiscreteSymDiff build_sym_diff(const GridDesc& grid, const ChristoffelField& gamma,
                                      int rank_in, const SymDiffOptions& opts = {}) {
  if (rank_in >= 4) throw RankError("build_sym_diff: input rank must be <= 3");
  if ((opts.F != 0.0 || opts.scattering_volume) && !opts.x_field)
    throw WeightSingularityError("build_sym_diff: x field required for weighted variants");

  const int n = grid.dim;
  const int m = rank_in;
  const auto& idx_in = SymmetricIndexSet::get(n, m);
  const auto& idx_out = SymmetricIndexSet::get(n, m + 1);
  const std::int64_t nn = grid.num_nodes();

  DiscreteSymDiff op;
  op.grid = grid;
  op.rank_in = m;
  op.F = opts.F;
  op.active = opts.active.empty() ? std::vector<std::uint8_t>(nn, 1) : opts.active;
  if (static_cast<std::int64_t>(op.active.size()) != nn)
    throw ConfigError("build_sym_diff: active mask size mismatch");

  // Rows live on the whole grid (the derivative of a masked field is a field
  // everywhere); only the unknowns are masked. Rim rows reaching into the
  // active set pin the odd-even modes of the central stencils, keeping the
  // assembled Laplacian injective. Conjugated rows need x > 0.
  std::vector<double> inv_x(nn, 0.0);
  std::vector<std::uint8_t> row_live(nn, 1);
  if (opts.F != 0.0) {
    for (std::int64_t node = 0; node < nn; ++node) {
      const double x = opts.x_field(grid.point(node));
      if (x > 0) {
        inv_x[node] = 1.0 / x;
      } else {
        row_live[node] = 0;
        if (op.active[node])
          throw WeightSingularityError("build_sym_diff: active node with x <= 0");
      }
    }
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(nn * idx_out.size() * (m + 1) * 4);
  for (std::int64_t node = 0; node < nn; ++node) {
    if (!row_live[node]) continue;
    const auto iv = grid.coords(node);
    for (int c = 0; c < idx_out.size(); ++c) {
      const auto& J = idx_out.tuple(c);
      const std::int64_t row = node * idx_out.size() + c;
      for (int q = 0; q <= m; ++q) {
        const int k = J[q];
        int rest[4];
        int w = 0;
        for (int i = 0; i <= m; ++i)
          if (i != q) rest[w++] = J[i];
        const int cR = idx_in.position(rest);

        const auto st = detail::deriv_stencil(iv[k], grid.shape[k], grid.spacing(k));
        for (int s = 0; s < st.count; ++s) {
          auto jv = iv;
          jv[k] += st.offsets[s];
          const std::int64_t col_node = grid.index(jv);
          if (!op.active[col_node]) continue;  // Dirichlet
          const double conj =
              opts.F != 0.0 ? std::exp(opts.F * (inv_x[col_node] - inv_x[node])) : 1.0;
          trips.emplace_back(row, col_node * idx_in.size() + cR,
                             st.coeffs[s] * conj / (m + 1));
        }
        for (int p = 0; p < m; ++p) {
          int mod[4];
          for (int i = 0; i < m; ++i) mod[i] = rest[i];
          for (int qq = 0; qq < n; ++qq) {
            const double G = gamma.at(node, qq, k, rest[p]);
            if (G == 0.0) continue;
            mod[p] = qq;
            trips.emplace_back(row, node * idx_in.size() + idx_in.position(mod),
                               -G / (m + 1));
          }
        }
      }
    }
  }

  op.A.resize(nn * idx_out.size(), nn * idx_in.size());
  op.A.setFromTriplets(trips.begin(), trips.end());
  op.A.makeCompressed();
  op.w_in = field_weights(grid, m, opts.scattering_volume, opts.x_field, &op.active);
  op.w_out = field_weights(grid, m + 1, opts.scattering_volume, opts.x_field, &op.active);
  return op;
}

// delta^s applied to a field, with a flag for support touching the grid edge
// (one-sided stencils contaminate the adjoint identity there).
struct DivergenceResult {
  SymmetricTensorField field;
  bool edge_contamination = false;
};

inline DivergenceResult divergence_adjoint(const SymmetricTensorField& w,
                                           const DiscreteSymDiff& op) {
  if (w.rank() != op.rank_in + 1)
    throw RankError("divergence_adjoint: rank mismatch with operator");
  DivergenceResult res{SymmetricTensorField(op.grid, op.rank_in), false};
  VectorXd out = op.apply_adjoint(w.flat());
  res.field.set_flat(out);

  const GridDesc& g = op.grid;
  const int nc = w.component_count();
  for (std::int64_t node = 0; node < g.num_nodes() && !res.edge_contamination; ++node) {
    const auto iv = g.coords(node);
    bool edge = false;
    for (int d = 0; d < g.dim; ++d) edge |= (iv[d] <= 1 || iv[d] >= g.shape[d] - 2);
    if (!edge) continue;
    for (int c = 0; c < nc; ++c)
      if (w.at(node, c) != 0.0) {
        res.edge_contamination = true;
        break;
      }
  }
  return res;
}

// e^{-F/x} op e^{F/x} for the two calculus operators; realized by the folded
// stencil construction above so no large exponentials are ever formed.
enum class CalculusOp { sym_diff, divergence };

inline DiscreteSymDiff conjugate_exp(CalculusOp which, const GridDesc& grid,
                                     const ChristoffelField& gamma, int field_rank,
                                     const WeightParam& F,
                                     const std::function<double(const VectorXd&)>& x_field,
                                     std::vector<std::uint8_t> active = {}) {
  SymDiffOptions opts;
  opts.F = F.F;
  opts.x_field = x_field;
  opts.scattering_volume = true;
  opts.active = std::move(active);
  // both directions are carried by the same matrix: apply() is d^s_F, the
  // weighted transpose is delta^s_F on rank field_rank + 1
  const int rank_in = which == CalculusOp::sym_diff ? field_rank : field_rank - 1;
  return build_sym_diff(grid, gamma, rank_in, opts);
}

}  // namespace tray

#endif  // TRAY_DISCRETE_OPS_HPP

// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_WITTEN_HPP
#define TRAY_WITTEN_HPP

#include "tray/common.hpp"
#include "tray/discrete_ops.hpp"

#include <functional>
#include <vector>

namespace tray {

struct CgResult {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
  double min_ritz = 0.0;  // smallest Ritz value of the Lanczos tridiagonal
  std::vector<double> residual_history;
};

// Jacobi-preconditioned conjugate gradients on a plain-symmetric positive
// semidefinite operator. The Lanczos tridiagonal assembled from the CG
// coefficients provides the smallest Ritz value for conditioning reports.
inline CgResult pcg(const std::function<VectorXd(const VectorXd&)>& apply,
                    const VectorXd& b, const VectorXd& diag, VectorXd& x, double tol,
                    int max_iter) {
  CgResult res;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    res.converged = true;
    return res;
  }
  VectorXd inv_diag = diag.unaryExpr([](double d) { return d > 1e-300 ? 1.0 / d : 1.0; });
  VectorXd r = b - apply(x);
  VectorXd z = inv_diag.cwiseProduct(r);
  VectorXd p = z;
  double rz = r.dot(z);
  std::vector<double> alphas, betas;
  res.residual_history.push_back(r.norm() / bnorm);
  for (int it = 0; it < max_iter; ++it) {
    VectorXd Ap = apply(p);
    const double pAp = p.dot(Ap);
    if (pAp <= 0) break;  // semidefinite stall
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    res.iterations = it + 1;
    res.residual_history.push_back(r.norm() / bnorm);
    if (r.norm() <= tol * bnorm) {
      res.converged = true;
      break;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    const double beta = rz_new / rz;
    alphas.push_back(alpha);
    betas.push_back(beta);
    p = z + beta * p;
    rz = rz_new;
  }
  res.rel_residual = r.norm() / bnorm;

  // Lanczos tridiagonal from the CG recurrence
  const int k = static_cast<int>(alphas.size());
  if (k > 0) {
    MatrixXd T = MatrixXd::Zero(k, k);
    double beta_prev = 0.0, alpha_prev = 1.0;
    for (int i = 0; i < k; ++i) {
      T(i, i) = 1.0 / alphas[i] + (i > 0 ? betas[i - 1] / alpha_prev : 0.0);
      if (i + 1 < k) {
        const double off = std::sqrt(std::max(betas[i], 0.0)) / alphas[i];
        T(i, i + 1) = off;
        T(i + 1, i) = off;
      }
      alpha_prev = alphas[i];
    }
    (void)beta_prev;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(T);
    res.min_ritz = es.eigenvalues().minCoeff();
  }
  return res;
}

// The solenoidal Witten Laplacian delta^s_F d^s_F on rank-3 fields in its
// plain-symmetric form K = D^T W4 D; the generalized spectrum against W3
// carries the coercivity constant.
struct WittenOperator {
  DiscreteSymDiff d;  // rank 3 -> 4

  VectorXd apply_plain(const VectorXd& v) const {
    return d.A.transpose() * d.w_out.cwiseProduct(d.A * v);
  }
  // laplacian as a field map: delta^s_F d^s_F v
  VectorXd apply_laplacian(const VectorXd& v) const {
    return d.w_in.cwiseInverse().cwiseProduct(apply_plain(v));
  }
  VectorXd plain_diagonal() const {
    VectorXd diag = VectorXd::Zero(d.A.cols());
    for (int col = 0; col < d.A.outerSize(); ++col)
      for (SparseMat::InnerIterator it(d.A, col); it; ++it)
        diag[col] += it.value() * it.value() * d.w_out[it.row()];
    return diag;
  }
};

inline WittenOperator build_witten_operator(const GridDesc& grid,
                                            const ChristoffelField& gamma,
                                            const WeightParam& F,
                                            const std::function<double(const VectorXd&)>& x_field,
                                            std::vector<std::uint8_t> active = {}) {
  WittenOperator op;
  SymDiffOptions opts;
  opts.F = F.F;
  opts.x_field = x_field;
  opts.scattering_volume = true;
  opts.active = std::move(active);
  op.d = build_sym_diff(grid, gamma, 3, opts);
  return op;
}

struct WittenSolveResult {
  SymmetricTensorField v;
  CgResult cg;
};

// Solve Delta_{F,s} v = rhs with the Dirichlet mask carried by the operator.
// CG stagnation raises a SolverError carrying the smallest Ritz value.
inline WittenSolveResult solve_witten_laplacian(const SymmetricTensorField& rhs,
                                                const WittenOperator& op,
                                                double tol = 1e-10,
                                                int max_iter = 4000) {
  if (rhs.rank() != 3) throw RankError("solve_witten_laplacian: rhs must be rank 3");
  const VectorXd b = op.d.w_in.cwiseProduct(rhs.flat());
  VectorXd x = VectorXd::Zero(b.size());
  CgResult cg = pcg([&](const VectorXd& v) { return op.apply_plain(v); }, b,
                    op.plain_diagonal(), x, tol, max_iter);
  if (!cg.converged && cg.rel_residual > 1e-6)
    throw SolverError("witten solve stagnated; smallest Ritz value " +
                      std::to_string(cg.min_ritz));
  WittenSolveResult res{SymmetricTensorField(rhs.grid(), 3), cg};
  res.v.set_flat(x);
  return res;
}

// f = u + d^s_F v with delta^s_F u ~ 0: v = Delta^{-1} delta^s_F f,
// u = f - d^s_F v. Idempotent up to the solver tolerance.
struct SolenoidalDecomposition {
  SymmetricTensorField u;  // solenoidal rank-4 part
  SymmetricTensorField v;  // rank-3 potential, zero on masked nodes
  double residual_gauge = 0.0;  // ||delta^s_F u||_W / ||f||_W
  CgResult cg;
};

inline SolenoidalDecomposition solenoidal_project(const SymmetricTensorField& f,
                                                  const WittenOperator& op,
                                                  double tol = 1e-10,
                                                  int max_iter = 4000) {
  if (f.rank() != 4) throw RankError("solenoidal_project: field must be rank 4");
  SymmetricTensorField rhs(f.grid(), 3);
  rhs.set_flat(op.d.apply_adjoint(f.flat()));
  WittenSolveResult sol = solve_witten_laplacian(rhs, op, tol, max_iter);

  SolenoidalDecomposition out{SymmetricTensorField(f.grid(), 4), sol.v, 0.0, sol.cg};
  out.u.set_flat(f.flat() - op.d.apply(sol.v.flat()));
  const VectorXd gauge = op.d.apply_adjoint(out.u.flat());
  const double fnorm = std::sqrt(f.flat().dot(op.d.w_out.cwiseProduct(f.flat())));
  out.residual_gauge =
      std::sqrt(gauge.dot(op.d.w_in.cwiseProduct(gauge))) / std::max(fnorm, 1e-300);
  return out;
}

// Smallest generalized eigenvalue of (K, W3): the discrete coercivity
// constant kappa with <Delta_F v, v>_W3 >= kappa ||v||_W3^2. Inverse power
// iteration with CG inner solves.
inline double coercivity_probe(const WittenOperator& op, int power_iters = 12,
                               double cg_tol = 1e-8, std::uint64_t seed = 6100ull) {
  const std::int64_t N = op.d.A.cols();
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  VectorXd v(N);
  const auto& idx = SymmetricIndexSet::get(op.d.grid.dim, 3);
  for (std::int64_t node = 0; node < op.d.grid.num_nodes(); ++node)
    for (int c = 0; c < idx.size(); ++c)
      v[node * idx.size() + c] = op.d.active[node] ? gauss(rng) : 0.0;
  const VectorXd diag = op.plain_diagonal();

  double kappa = 0.0;
  for (int it = 0; it < power_iters; ++it) {
    VectorXd b = op.d.w_in.cwiseProduct(v);
    VectorXd x = VectorXd::Zero(N);
    pcg([&](const VectorXd& w) { return op.apply_plain(w); }, b, diag, x, cg_tol, 3000);
    const double nrm = std::sqrt(x.dot(op.d.w_in.cwiseProduct(x)));
    if (nrm <= 0) break;
    v = x / nrm;
    kappa = v.dot(op.apply_plain(v)) / v.dot(op.d.w_in.cwiseProduct(v));
  }
  return kappa;
}

}  // namespace tray

#endif  // TRAY_WITTEN_HPP

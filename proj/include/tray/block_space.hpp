// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_BLOCK_SPACE_HPP
#define TRAY_BLOCK_SPACE_HPP

#include "tray/common.hpp"
#include "tray/multi_index.hpp"

#include <vector>

namespace tray {

// Symmetric rank-m tensors on R^n split by the number of tangential (y)
// indices: block j holds symmetric j-tensors over the n-1 tangential axes,
// of dimension C(n-2+j, j). Coordinates within a block are canonical
// multi-index components; the dense block inner product is the
// multiplicity-weighted dot, and the M(m) weights are binomial(m, j).
class BlockSpace {
public:
  BlockSpace(int n, int m) : n_(n), m_(m) {
    if (n < 2) throw ConfigError("BlockSpace: n must be >= 2");
    offsets_.push_back(0);
    for (int j = 0; j <= m; ++j) {
      blocks_.push_back(&SymmetricIndexSet::get(n - 1, j));
      offsets_.push_back(offsets_.back() + blocks_.back()->size());
    }
  }

  int n() const { return n_; }
  int rank() const { return m_; }
  int blocks() const { return m_ + 1; }
  int block_dim(int j) const { return blocks_[j]->size(); }
  int offset(int j) const { return offsets_[j]; }
  int dim() const { return offsets_.back(); }
  const SymmetricIndexSet& block(int j) const { return *blocks_[j]; }

  // Diagonal of the M(m)-weighted inner product in block coordinates:
  // binomial(m, j) times the within-block index multiplicity.
  VectorXd weight_diagonal() const {
    VectorXd w(dim());
    for (int j = 0; j <= m_; ++j) {
      const double bw = static_cast<double>(binomial(m_, j));
      for (int c = 0; c < block_dim(j); ++c)
        w[offset(j) + c] = bw * blocks_[j]->multiplicity(c);
    }
    return w;
  }

  // Canonical coordinates of the symmetric power v^(x)j placed in block j
  // (value at canonical index I is prod_k v[I_k]).
  VectorXd power_block(int j, const VectorXd& v) const {
    VectorXd out(block_dim(j));
    for (int c = 0; c < block_dim(j); ++c) {
      double prod = 1;
      for (int k = 0; k < j; ++k) prod *= v[blocks_[j]->tuple(c)[k]];
      out[c] = prod;
    }
    return out;
  }

private:
  int n_, m_;
  std::vector<const SymmetricIndexSet*> blocks_;
  std::vector<int> offsets_;
};

// Symmetrized tensor product with a fixed covector:
// w -> Sym(eta (x) w), mapping symmetric j-tensors to (j+1)-tensors.
// (eta os w)_I = (1/(j+1)) sum_p eta_{I_p} w_{I \ p}.
inline MatrixXd sym_product_op(int ny, int j, const VectorXd& eta) {
  const auto& src = SymmetricIndexSet::get(ny, j);
  const auto& dst = SymmetricIndexSet::get(ny, j + 1);
  MatrixXd A = MatrixXd::Zero(dst.size(), src.size());
  for (int r = 0; r < dst.size(); ++r) {
    const auto& J = dst.tuple(r);
    for (int p = 0; p <= j; ++p) {
      int rest[6];
      int w = 0;
      for (int i = 0; i <= j; ++i)
        if (i != p) rest[w++] = J[i];
      A(r, src.position(rest)) += eta[J[p]] / (j + 1);
    }
  }
  return A;
}

// Contraction with a fixed covector: (iota_eta w)_I = sum_k eta_k w_{(k, I)},
// mapping symmetric j-tensors to (j-1)-tensors. Built independently of
// sym_product_op; the two are weighted adjoints of each other.
inline MatrixXd contraction_op(int ny, int j, const VectorXd& eta) {
  const auto& src = SymmetricIndexSet::get(ny, j);
  const auto& dst = SymmetricIndexSet::get(ny, j - 1);
  MatrixXd A = MatrixXd::Zero(dst.size(), src.size());
  for (int r = 0; r < dst.size(); ++r) {
    const auto& J = dst.tuple(r);
    for (int k = 0; k < ny; ++k) {
      int full[6];
      full[0] = k;
      for (int i = 0; i < j - 1; ++i) full[i + 1] = J[i];
      A(r, src.position(full)) += eta[k];
    }
  }
  return A;
}

// B = W_in^{-1} A^dagger W_out: the (m_in, m_out)-adjoint with respect to
// diagonal inner-product weights.
inline MatrixXcd weighted_adjoint(const MatrixXcd& A, const VectorXd& w_out,
                                  const VectorXd& w_in) {
  return w_in.cwiseInverse().asDiagonal() * A.adjoint() * w_out.asDiagonal();
}

}  // namespace tray

#endif  // TRAY_BLOCK_SPACE_HPP

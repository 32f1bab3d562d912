// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_TENSOR_FIELD_HPP
#define TRAY_TENSOR_FIELD_HPP

#include "tray/common.hpp"
#include "tray/grid.hpp"
#include "tray/multi_index.hpp"

#include <functional>
#include <vector>

namespace tray {

// Dense rank-m tensor field: all dim^m components per node, row-major in the
// index tuple. Used for symmetrization inputs, covariant derivatives and as
// the brute-force oracle side of canonical-storage checks.
struct DenseTensorField {
  GridDesc grid;
  int rank = 0;
  std::vector<double> comps;  // node * dim^rank + flat(tuple)

  static DenseTensorField zeros(const GridDesc& grid, int rank) {
    DenseTensorField f;
    f.grid = grid;
    f.rank = rank;
    f.comps.assign(grid.num_nodes() * f.tuple_count(), 0.0);
    return f;
  }

  std::int64_t tuple_count() const {
    std::int64_t c = 1;
    for (int i = 0; i < rank; ++i) c *= grid.dim;
    return c;
  }
  std::int64_t flat(const int* idx) const {
    std::int64_t f = 0;
    for (int i = 0; i < rank; ++i) f = f * grid.dim + idx[i];
    return f;
  }
  double& at(std::int64_t node, const int* idx) { return comps[node * tuple_count() + flat(idx)]; }
  double at(std::int64_t node, const int* idx) const {
    return comps[node * tuple_count() + flat(idx)];
  }
};

// Symmetric rank-m tensor field in canonical multi-index storage with
// multiplicity weights; components are stored node-major.
class SymmetricTensorField {
public:
  SymmetricTensorField() = default;
  SymmetricTensorField(const GridDesc& grid, int rank)
      : grid_(grid), rank_(rank), idx_(&SymmetricIndexSet::get(grid.dim, rank)) {
    if (rank < 0 || rank > 4) throw RankError("SymmetricTensorField: rank must be in 0..4");
    comps_.assign(grid.num_nodes() * idx_->size(), 0.0);
  }

  static SymmetricTensorField zeros(const GridDesc& grid, int rank) {
    return SymmetricTensorField(grid, rank);
  }

  // fn(point, canonical tuple, rank) -> component value
  static SymmetricTensorField from_function(
      const GridDesc& grid, int rank,
      const std::function<double(const VectorXd&, const std::uint8_t*, int)>& fn) {
    SymmetricTensorField f(grid, rank);
    const int nc = f.component_count();
    for (std::int64_t node = 0; node < grid.num_nodes(); ++node) {
      const VectorXd p = grid.point(node);
      for (int c = 0; c < nc; ++c)
        f.comps_[node * nc + c] = fn(p, f.index_set().tuple(c).data(), rank);
    }
    return f;
  }

  const GridDesc& grid() const { return grid_; }
  int rank() const { return rank_; }
  int component_count() const { return idx_->size(); }
  const SymmetricIndexSet& index_set() const { return *idx_; }

  double& at(std::int64_t node, int c) { return comps_[node * idx_->size() + c]; }
  double at(std::int64_t node, int c) const { return comps_[node * idx_->size() + c]; }

  std::vector<double>& data() { return comps_; }
  const std::vector<double>& data() const { return comps_; }

  Eigen::Map<const VectorXd> flat() const {
    return Eigen::Map<const VectorXd>(comps_.data(), comps_.size());
  }
  void set_flat(const VectorXd& v) {
    if (v.size() != static_cast<Eigen::Index>(comps_.size()))
      throw RankError("set_flat: size mismatch");
    std::copy(v.data(), v.data() + v.size(), comps_.begin());
  }

  // Canonical components multilinearly interpolated at p.
  void interpolate(const VectorXd& p, double* out) const {
    const auto st = grid_.stencil(p);
    const int nc = idx_->size();
    std::fill(out, out + nc, 0.0);
    for (int k = 0; k < st.count; ++k) {
      const double w = st.w[k];
      const double* base = comps_.data() + st.idx[k] * nc;
      for (int c = 0; c < nc; ++c) out[c] += w * base[c];
    }
  }

  // <f(p), v^m> = sum over canonical indices of mult * comp * prod v^{i_k}.
  double contract(const VectorXd& p, const VectorXd& v) const {
    std::array<double, 70> vals{};
    interpolate(p, vals.data());
    return contract_components(vals.data(), v);
  }

  double contract_components(const double* vals, const VectorXd& v) const {
    const int nc = idx_->size();
    double s = 0;
    for (int c = 0; c < nc; ++c) {
      double prod = idx_->multiplicity(c);
      const auto& t = idx_->tuple(c);
      for (int k = 0; k < rank_; ++k) prod *= v[t[k]];
      s += vals[c] * prod;
    }
    return s;
  }

  // Reconstruction of the full permutation-symmetric tensor.
  DenseTensorField to_dense() const {
    DenseTensorField d = DenseTensorField::zeros(grid_, rank_);
    const int nc = idx_->size();
    const std::int64_t tc = d.tuple_count();
    std::vector<int> canon_of(tc);
    {
      std::vector<int> tup(std::max(rank_, 1));
      for (std::int64_t f = 0; f < tc; ++f) {
        std::int64_t r = f;
        for (int i = rank_ - 1; i >= 0; --i) {
          tup[i] = static_cast<int>(r % grid_.dim);
          r /= grid_.dim;
        }
        canon_of[f] = idx_->position(tup.data());
      }
    }
    for (std::int64_t node = 0; node < grid_.num_nodes(); ++node)
      for (std::int64_t f = 0; f < tc; ++f)
        d.comps[node * tc + f] = comps_[node * nc + canon_of[f]];
    return d;
  }

  double max_abs() const {
    double m = 0;
    for (double v : comps_) m = std::max(m, std::abs(v));
    return m;
  }

  // Multiplicity-weighted L2 norm with trapezoid volume weights; this is the
  // discrete M(m)-weighted norm (the binomial block weights of the x-count
  // decomposition are exactly the index multiplicities).
  double weighted_l2_norm() const {
    const int nc = idx_->size();
    double s = 0;
    for (std::int64_t node = 0; node < grid_.num_nodes(); ++node) {
      const double vol = grid_.trapezoid_weight(grid_.coords(node));
      for (int c = 0; c < nc; ++c) {
        const double v = comps_[node * nc + c];
        s += vol * idx_->multiplicity(c) * v * v;
      }
    }
    return std::sqrt(s);
  }

private:
  GridDesc grid_;
  int rank_ = 0;
  const SymmetricIndexSet* idx_ = nullptr;
  std::vector<double> comps_;
};

// Block weights of the x-count decomposition of the M(m) inner product:
// binomial(m, j) for the block with j tangential indices (1,4,6,4,1 at m = 4,
// 1,3,3,1 at m = 3).
struct InnerProductWeights {
  int rank;
  std::vector<double> weights;

  static InnerProductWeights standard(int m) {
    InnerProductWeights w;
    w.rank = m;
    for (int j = 0; j <= m; ++j) w.weights.push_back(static_cast<double>(binomial(m, j)));
    return w;
  }
};

// Exponential weight parameter F > 0 (inverse length).
struct WeightParam {
  double F = 0.0;
  explicit WeightParam(double f) : F(f) {
    if (!(F > 0)) throw WeightSingularityError("WeightParam: F must be > 0");
  }
};

// (S T)(v_1..v_m) = (1/m!) sum_sigma T(v_sigma(1)..v_sigma(m)): averaging a
// dense tensor field over index permutations. Idempotent and linear.
inline SymmetricTensorField symmetrize(const DenseTensorField& T) {
  if (T.rank > 4) throw RankError("symmetrize: rank must be <= 4");
  SymmetricTensorField f(T.grid, T.rank);
  const auto& idx = f.index_set();
  const int nc = idx.size();
  const int m = T.rank;

  std::vector<int> perm(std::max(m, 1));
  for (std::int64_t node = 0; node < T.grid.num_nodes(); ++node) {
    for (int c = 0; c < nc; ++c) {
      const auto& t = idx.tuple(c);
      for (int i = 0; i < m; ++i) perm[i] = i;
      double acc = 0;
      int count = 0;
      do {
        int tup[4];
        for (int i = 0; i < m; ++i) tup[i] = t[perm[i]];
        acc += T.at(node, tup);
        ++count;
      } while (std::next_permutation(perm.begin(), perm.begin() + m));
      f.at(node, c) = (m == 0) ? T.comps[node] : acc / count;
    }
  }
  return f;
}

inline double contract_with_velocity(const SymmetricTensorField& f, const VectorXd& p,
                                     const VectorXd& v) {
  return f.contract(p, v);
}

enum class ScatteringDirection { to_sc, from_sc };

// Rescales canonical components by x^{-2a-b} (a = chart-axis-0 index count,
// b = remaining index count) or the inverse; axis 0 of the grid chart is the
// boundary-distance coordinate x.
inline SymmetricTensorField scattering_basis_convert(
    const SymmetricTensorField& f, const std::function<double(const VectorXd&)>& x_field,
    ScatteringDirection dir) {
  SymmetricTensorField out = f;
  const auto& idx = f.index_set();
  const int nc = idx.size();
  const int m = f.rank();
  for (std::int64_t node = 0; node < f.grid().num_nodes(); ++node) {
    const double x = x_field(f.grid().point(node));
    if (!(x > 0)) throw WeightSingularityError("scattering basis needs x > 0 on active nodes");
    for (int c = 0; c < nc; ++c) {
      int a = 0;
      for (int k = 0; k < m; ++k)
        if (idx.tuple(c)[k] == 0) ++a;
      const int b = m - a;
      const double power = -(2.0 * a + b);
      const double scale =
          dir == ScatteringDirection::to_sc ? std::pow(x, power) : std::pow(x, -power);
      out.at(node, c) = f.at(node, c) * scale;
    }
  }
  return out;
}

}  // namespace tray

#endif  // TRAY_TENSOR_FIELD_HPP

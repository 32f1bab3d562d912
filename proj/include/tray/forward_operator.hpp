// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_FORWARD_OPERATOR_HPP
#define TRAY_FORWARD_OPERATOR_HPP

#include "tray/common.hpp"
#include "tray/ray_transform.hpp"
#include "tray/tensor_field.hpp"

#include <vector>

namespace tray {

// Matrix form of the discrete transform: one row per fan entry, columns over
// flattened canonical components. Rows are kept in factored per-sample form
// (interpolation stencil corners x contraction coefficients x quadrature
// weight); apply / apply_adjoint are exact transposes of each other and apply
// reproduces the quadrature of forward_fan to round-off.
class RayOperator {
public:
  struct Row {
    std::vector<std::int64_t> corner_base;  // node index of the low stencil corner
    std::vector<double> corner_w;           // 2^dim weights per sample
    std::vector<double> coef;               // ncomp contraction coefficients per sample
    std::vector<double> qw;                 // quadrature weight per sample
    double length = 0.0;
    bool valid = false;
  };

  RayOperator(const GridDesc& grid, int rank)
      : grid_(grid), rank_(rank), idx_(&SymmetricIndexSet::get(grid.dim, rank)) {
    corner_offsets_.clear();
    const int corners = 1 << grid.dim;
    for (int c = 0; c < corners; ++c) {
      std::int64_t off = 0;
      for (int d = 0; d < grid.dim; ++d)
        if (c & (1 << d)) {
          std::int64_t stride = 1;
          for (int e = d + 1; e < grid.dim; ++e) stride *= grid.shape[e];
          off += stride;
        }
      corner_offsets_.push_back(off);
    }
  }

  const GridDesc& grid() const { return grid_; }
  int rank() const { return rank_; }
  int row_count() const { return static_cast<int>(rows_.size()); }
  const Row& row(int r) const { return rows_[r]; }
  std::int64_t col_count() const { return grid_.num_nodes() * idx_->size(); }
  int valid_rows() const {
    int c = 0;
    for (const auto& r : rows_) c += r.valid;
    return c;
  }

  void add_ray(const ChordSamples& chord) {
    Row row;
    row.valid = chord.complete;
    row.length = chord.length;
    if (chord.complete) {
      for (int s = 0; s < chord.size(); ++s)
        if (!grid_.contains(chord.points[s], 1e-9)) {
          row.valid = false;  // chord left the field chart
          break;
        }
    }
    if (row.valid) {
      const int nc = idx_->size();
      const int corners = static_cast<int>(corner_offsets_.size());
      row.corner_base.reserve(chord.size());
      row.corner_w.reserve(chord.size() * corners);
      row.coef.reserve(chord.size() * nc);
      row.qw.reserve(chord.size());
      for (int s = 0; s < chord.size(); ++s) {
        const auto st = grid_.stencil(chord.points[s]);
        row.corner_base.push_back(st.idx[0]);
        for (int c = 0; c < corners; ++c) row.corner_w.push_back(st.w[c]);
        const VectorXd& v = chord.velocities[s];
        for (int c = 0; c < nc; ++c) {
          double prod = idx_->multiplicity(c);
          for (int k = 0; k < rank_; ++k) prod *= v[idx_->tuple(c)[k]];
          row.coef.push_back(prod);
        }
        row.qw.push_back(chord.qw[s]);
      }
    }
    rows_.push_back(std::move(row));
  }

  // data_r = sum_s qw_s sum_c coef_sc (sum_corner w f[corner, c])
  VectorXd apply(const VectorXd& flat) const {
    const int nc = idx_->size();
    const int corners = static_cast<int>(corner_offsets_.size());
    VectorXd out = VectorXd::Zero(rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const Row& row = rows_[r];
      if (!row.valid) continue;
      double acc = 0;
      const int ns = static_cast<int>(row.corner_base.size());
      for (int s = 0; s < ns; ++s) {
        double val = 0;
        for (int c = 0; c < nc; ++c) {
          double interp = 0;
          for (int q = 0; q < corners; ++q)
            interp += row.corner_w[s * corners + q] *
                      flat[(row.corner_base[s] + corner_offsets_[q]) * nc + c];
          val += row.coef[s * nc + c] * interp;
        }
        acc += row.qw[s] * val;
      }
      out[r] = acc;
    }
    return out;
  }

  VectorXd apply(const SymmetricTensorField& f) const { return apply(f.flat()); }

  // exact transpose of apply (plain euclidean pairing on both sides)
  VectorXd apply_adjoint(const VectorXd& data) const {
    const int nc = idx_->size();
    const int corners = static_cast<int>(corner_offsets_.size());
    VectorXd out = VectorXd::Zero(col_count());
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const Row& row = rows_[r];
      if (!row.valid || data[r] == 0.0) continue;
      const int ns = static_cast<int>(row.corner_base.size());
      for (int s = 0; s < ns; ++s) {
        const double scale = data[r] * row.qw[s];
        for (int c = 0; c < nc; ++c) {
          const double sc = scale * row.coef[s * nc + c];
          for (int q = 0; q < corners; ++q)
            out[(row.corner_base[s] + corner_offsets_[q]) * nc + c] +=
                sc * row.corner_w[s * corners + q];
        }
      }
    }
    return out;
  }

  // per-node column mass: rows touching each node, for null-space warnings
  VectorXd node_mass() const {
    const int nc = idx_->size();
    const int corners = static_cast<int>(corner_offsets_.size());
    VectorXd out = VectorXd::Zero(grid_.num_nodes());
    for (const auto& row : rows_) {
      if (!row.valid) continue;
      const int ns = static_cast<int>(row.corner_base.size());
      for (int s = 0; s < ns; ++s)
        for (int q = 0; q < corners; ++q)
          out[row.corner_base[s] + corner_offsets_[q]] +=
              std::abs(row.qw[s]) * std::abs(row.corner_w[s * corners + q]);
      (void)nc;
    }
    return out;
  }

private:
  GridDesc grid_;
  int rank_;
  const SymmetricIndexSet* idx_;
  std::vector<std::int64_t> corner_offsets_;
  std::vector<Row> rows_;
};

inline RayOperator assemble_forward_matrix(const std::vector<ChordSamples>& chords,
                                           const GridDesc& grid, int rank) {
  RayOperator op(grid, rank);
  for (const auto& chord : chords) op.add_ray(chord);
  return op;
}

inline RayOperator assemble_forward_matrix(const GeodesicFan& fan, const ChartMetric& metric,
                                           const BoundaryChart& boundary,
                                           const GridDesc& grid, int rank,
                                           const TraceOptions& opts) {
  return assemble_forward_matrix(trace_fan(metric, boundary, fan, opts), grid, rank);
}

}  // namespace tray

#endif  // TRAY_FORWARD_OPERATOR_HPP

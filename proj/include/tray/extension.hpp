// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_EXTENSION_HPP
#define TRAY_EXTENSION_HPP

#include "tray/common.hpp"
#include "tray/tensor_field.hpp"

#include <array>

namespace tray {

// Reflection coefficients of the tensor extension across a face: the unique
// solution of sum_q C_q q^k = (-1)^k, k = 0..4 (a 5x5 Vandermonde system).
struct ExtensionCoefficients {
  std::array<double, 5> C{};

  double equation_residual() const {
    double worst = 0.0;
    for (int k = 0; k <= 4; ++k) {
      double s = 0.0;
      for (int q = 1; q <= 5; ++q) s += C[q - 1] * std::pow(q, k);
      worst = std::max(worst, std::abs(s - ((k % 2 == 0) ? 1.0 : -1.0)));
    }
    return worst;
  }
};

// Pivoted Gaussian elimination on the fixed nonsingular Vandermonde system.
inline ExtensionCoefficients vandermonde_extension_coeffs() {
  MatrixXd V(5, 5);
  VectorXd b(5);
  for (int k = 0; k <= 4; ++k) {
    for (int q = 1; q <= 5; ++q) V(k, q - 1) = std::pow(q, k);
    b[k] = (k % 2 == 0) ? 1.0 : -1.0;
  }
  VectorXd c = V.partialPivLu().solve(b);
  ExtensionCoefficients out;
  for (int i = 0; i < 5; ++i) out.C[i] = c[i];
  return out;
}

// Whitney-style reflection of a rank-m field across the face axis = lo:
// E f(x', -x_n) = sum_q C_q (-q)^{#axis indices} f(x', q x_n). The parity
// factor follows the tensor pullback of x_n -> -q x_n, and the resulting
// field is C^1 across the face (exactly so for polynomials of degree <= 4
// minus the index count). Output grid gains `ghost` layers below the face.
inline SymmetricTensorField extend_tensor_field(const SymmetricTensorField& f, int axis,
                                                int ghost) {
  const GridDesc& g = f.grid();
  if (axis < 0 || axis >= g.dim) throw ConfigError("extend_tensor_field: bad axis");
  if (ghost < 1 || 5 * ghost > g.shape[axis] - 1)
    throw ConfigError("extend_tensor_field: ghost depth needs 5*ghost source layers");

  const ExtensionCoefficients ec = vandermonde_extension_coeffs();

  GridDesc ext = g;
  ext.shape[axis] += ghost;
  ext.lo[axis] -= ghost * g.spacing(axis);

  SymmetricTensorField out(ext, f.rank());
  const auto& idx = f.index_set();
  const int nc = idx.size();
  for (std::int64_t node = 0; node < ext.num_nodes(); ++node) {
    auto iv = ext.coords(node);
    const int layer = iv[axis] - ghost;  // source layer index; negative = ghost
    if (layer >= 0) {
      auto src = iv;
      src[axis] = layer;
      for (int c = 0; c < nc; ++c) out.at(node, c) = f.at(g.index(src), c);
      continue;
    }
    for (int c = 0; c < nc; ++c) {
      int axis_count = 0;
      for (int k = 0; k < f.rank(); ++k)
        if (idx.tuple(c)[k] == axis) ++axis_count;
      double acc = 0.0;
      for (int q = 1; q <= 5; ++q) {
        auto src = iv;
        src[axis] = -q * layer;  // mirrored sample at x_n = q |x_n|
        acc += ec.C[q - 1] * std::pow(-static_cast<double>(q), axis_count) *
               f.at(g.index(src), c);
      }
      out.at(node, c) = acc;
    }
  }
  return out;
}

// One-sided second-order C^1 defect across the extension face: max over
// components of value and first-derivative jumps.
struct ExtensionJump {
  double value_jump = 0.0;
  double deriv_jump = 0.0;
};

inline ExtensionJump extension_c1_defect(const SymmetricTensorField& original,
                                         const SymmetricTensorField& extended, int axis,
                                         int ghost) {
  const GridDesc& g = original.grid();
  const GridDesc& ge = extended.grid();
  const double h = g.spacing(axis);
  ExtensionJump out;
  const int nc = original.component_count();
  for (std::int64_t node = 0; node < g.num_nodes(); ++node) {
    auto iv = g.coords(node);
    if (iv[axis] != 0) continue;
    auto ev = iv;
    ev[axis] += ghost;  // face position in the extended grid
    for (int c = 0; c < nc; ++c) {
      auto at_layer = [&](int off) {
        auto q = ev;
        q[axis] += off;
        return extended.at(ge.index(q), c);
      };
      out.value_jump = std::max(out.value_jump,
                                std::abs(at_layer(0) - original.at(node, c)));
      const double fwd = (-1.5 * at_layer(0) + 2.0 * at_layer(1) - 0.5 * at_layer(2)) / h;
      const double bwd = (1.5 * at_layer(0) - 2.0 * at_layer(-1) + 0.5 * at_layer(-2)) / h;
      out.deriv_jump = std::max(out.deriv_jump, std::abs(fwd - bwd));
    }
  }
  return out;
}

}  // namespace tray

#endif  // TRAY_EXTENSION_HPP

// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#include "tray/charts.hpp"
#include "tray/discrete_ops.hpp"
#include "tray/extension.hpp"
#include "tray/witten.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace tray;

namespace {

GridDesc slab_grid(int nx = 9, int ny = 9) {
  return GridDesc::box(3, {nx, ny, ny}, {1.0, -0.4, -0.4}, {2.0, 0.4, 0.4});
}

SymmetricTensorField random_field(const GridDesc& g, int rank, std::uint64_t seed,
                                  int interior_margin = 0) {
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  SymmetricTensorField f(g, rank);
  for (std::int64_t node = 0; node < g.num_nodes(); ++node) {
    const auto iv = g.coords(node);
    bool interior = true;
    for (int d = 0; d < 3; ++d)
      interior &= iv[d] >= interior_margin && iv[d] < g.shape[d] - interior_margin;
    if (!interior) continue;
    for (int c = 0; c < f.component_count(); ++c) f.at(node, c) = gauss(rng);
  }
  return f;
}

std::vector<std::uint8_t> interior_mask(const GridDesc& g, int margin) {
  std::vector<std::uint8_t> m(g.num_nodes(), 0);
  for (std::int64_t node = 0; node < g.num_nodes(); ++node) {
    const auto iv = g.coords(node);
    bool ok = true;
    for (int d = 0; d < 3; ++d) ok &= iv[d] >= margin && iv[d] < g.shape[d] - margin;
    m[node] = ok;
  }
  return m;
}

double weighted_dot(const VectorXd& a, const VectorXd& w, const VectorXd& b) {
  return a.dot(w.cwiseProduct(b));
}

}  // namespace

TEST_CASE("discrete adjoint identity for d^s / delta^s") {
  GridDesc g = slab_grid();
  auto metric = ChartMetric::conformal_radial(3, RadialProfile::linear(2.5, -0.5));
  auto gamma = ChristoffelField::build(metric, g);
  DiscreteSymDiff op = build_sym_diff(g, gamma, 3);

  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    SymmetricTensorField u = random_field(g, 3, 100 + trial);
    SymmetricTensorField w = random_field(g, 4, 500 + trial);
    const VectorXd du = op.apply(u.flat());
    const VectorXd dw = op.apply_adjoint(w.flat());
    const double lhs = weighted_dot(du, op.w_out, w.flat());
    const double rhs = weighted_dot(u.flat(), op.w_in, dw);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
  }
  REQUIRE(worst <= 1e-12);
}

TEST_CASE("discrete and dense sym_diff agree") {
  GridDesc g = slab_grid(7, 7);
  auto metric = ChartMetric::conformal_radial(3, RadialProfile::linear(2.5, -0.5));
  auto gamma = ChristoffelField::build(metric, g);
  DiscreteSymDiff op = build_sym_diff(g, gamma, 2);
  SymmetricTensorField v = random_field(g, 2, 7);
  SymmetricTensorField via_field = sym_diff(v, gamma);
  const VectorXd via_matrix = op.apply(v.flat());
  double worst = 0;
  for (std::int64_t i = 0; i < via_matrix.size(); ++i)
    worst = std::max(worst, std::abs(via_matrix[i] - via_field.data()[i]));
  REQUIRE(worst <= 1e-12 * std::max(1.0, via_field.max_abs()));
}

TEST_CASE("divergence of a rank-1 field matches the dense loop in the interior") {
  GridDesc g = slab_grid();
  auto metric = ChartMetric::euclidean(3);
  auto gamma = ChristoffelField::build(metric, g);
  DiscreteSymDiff op = build_sym_diff(g, gamma, 0);  // gradient: rank 0 -> 1

  // zero in, zero out
  SymmetricTensorField zero(g, 1);
  REQUIRE(divergence_adjoint(zero, op).field.max_abs() == 0.0);

  SymmetricTensorField w = random_field(g, 1, 55, 3);  // compact interior support
  DivergenceResult res = divergence_adjoint(w, op);
  REQUIRE_FALSE(res.edge_contamination);

  // dense-loop central divergence with the sign fixed by the adjoint identity
  const auto& idx1 = w.index_set();
  for (std::int64_t node = 0; node < g.num_nodes(); ++node) {
    const auto iv = g.coords(node);
    bool deep = true;
    for (int d = 0; d < 3; ++d) deep &= iv[d] >= 2 && iv[d] < g.shape[d] - 2;
    if (!deep) continue;
    double div = 0;
    for (int k = 0; k < 3; ++k) {
      auto up = iv, dn = iv;
      up[k] += 1;
      dn[k] -= 1;
      int tup[1] = {k};
      const int c = idx1.position(tup);
      div += (w.at(g.index(up), c) - w.at(g.index(dn), c)) / (2 * g.spacing(k));
    }
    REQUIRE(res.field.at(node, 0) == Catch::Approx(-div).margin(1e-12));
  }

  // support touching the edge raises the contamination flag
  SymmetricTensorField everywhere = random_field(g, 1, 56);
  REQUIRE(divergence_adjoint(everywhere, op).edge_contamination);
}

TEST_CASE("exponential conjugation: F = 0 is the identity, product rule holds") {
  GridDesc g = slab_grid(17, 7);
  auto metric = ChartMetric::euclidean(3);
  auto gamma = ChristoffelField::build(metric, g);
  auto x_field = [](const VectorXd& p) { return p[0]; };

  SymDiffOptions plain;
  DiscreteSymDiff d0 = build_sym_diff(g, gamma, 0, plain);
  SymDiffOptions conj;
  conj.F = 1.0;
  conj.x_field = x_field;
  DiscreteSymDiff dF = build_sym_diff(g, gamma, 0, conj);

  // F -> 0 limit: same matrix
  SymDiffOptions tiny;
  tiny.F = 1e-14;
  tiny.x_field = x_field;
  DiscreteSymDiff dt = build_sym_diff(g, gamma, 0, tiny);
  REQUIRE((dt.A - d0.A).norm() <= 1e-10 * d0.A.norm());

  // scalar u: d^s_F u = d^s u - (F/x^2) u dx + O(h^2) (pointwise product rule)
  SymmetricTensorField u = SymmetricTensorField::from_function(
      g, 0, [](const VectorXd& p, const std::uint8_t*, int) {
        return std::sin(1.3 * p[0]) + 0.5 * p[1] - 0.2 * p[2] * p[0];
      });
  const VectorXd grad0 = d0.apply(u.flat());
  const VectorXd gradF = dF.apply(u.flat());
  const auto& idx1 = SymmetricIndexSet::get(3, 1);
  int xtup[1] = {0};
  const int cx = idx1.position(xtup);
  double worst = 0, scale = 0;
  for (std::int64_t node = 0; node < g.num_nodes(); ++node) {
    const VectorXd p = g.point(node);
    const double expect = -1.0 / (p[0] * p[0]) * u.at(node, 0);
    const double got = gradF[node * 3 + cx] - grad0[node * 3 + cx];
    worst = std::max(worst, std::abs(got - expect));
    scale = std::max(scale, std::abs(expect));
    // tangential components are untouched by the weight
    for (int c = 0; c < 3; ++c)
      if (c != cx)
        REQUIRE(gradF[node * 3 + c] == Catch::Approx(grad0[node * 3 + c]).margin(1e-13));
  }
  REQUIRE(worst <= 1e-2 * scale);

  // conjugated pair with scattering volume stays an exact adjoint pair
  SymDiffOptions sc;
  sc.F = 2.0;
  sc.x_field = x_field;
  sc.scattering_volume = true;
  DiscreteSymDiff dsc = build_sym_diff(g, gamma, 3, sc);
  double worst_adj = 0;
  for (int trial = 0; trial < 20; ++trial) {
    SymmetricTensorField a = random_field(g, 3, 900 + trial);
    SymmetricTensorField b = random_field(g, 4, 950 + trial);
    const double lhs = weighted_dot(dsc.apply(a.flat()), dsc.w_out, b.flat());
    const double rhs = weighted_dot(a.flat(), dsc.w_in, dsc.apply_adjoint(b.flat()));
    worst_adj = std::max(worst_adj, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
  }
  REQUIRE(worst_adj <= 1e-12);

  // weight needs x > 0 on active nodes
  GridDesc bad = GridDesc::box(3, {5, 5, 5}, {-0.5, -0.4, -0.4}, {0.5, 0.4, 0.4});
  auto gamma_bad = ChristoffelField::build(metric, bad);
  SymDiffOptions sing;
  sing.F = 1.0;
  sing.x_field = x_field;
  REQUIRE_THROWS_AS(build_sym_diff(bad, gamma_bad, 0, sing), WeightSingularityError);
}

TEST_CASE("witten solve recovers manufactured solutions") {
  GridDesc g = slab_grid();
  auto metric = ChartMetric::euclidean(3);
  auto gamma = ChristoffelField::build(metric, g);
  auto x_field = [](const VectorXd& p) { return p[0]; };
  WittenOperator op =
      build_witten_operator(g, gamma, WeightParam(2.0), x_field, interior_mask(g, 1));

  // zero right-hand side
  SymmetricTensorField zero(g, 3);
  REQUIRE(solve_witten_laplacian(zero, op).v.max_abs() == 0.0);

  // rhs = Delta w for interior-supported w recovers w
  SymmetricTensorField w = random_field(g, 3, 77, 2);
  SymmetricTensorField rhs(g, 3);
  rhs.set_flat(op.apply_laplacian(w.flat()));
  auto sol = solve_witten_laplacian(rhs, op, 1e-12, 20000);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < w.data().size(); ++i) {
    num += std::pow(sol.v.data()[i] - w.data()[i], 2);
    den += std::pow(w.data()[i], 2);
  }
  REQUIRE(std::sqrt(num / den) <= 1e-6);
}

TEST_CASE("coercivity constant grows at least like F^1.5") {
  GridDesc g = slab_grid(8, 8);
  auto metric = ChartMetric::euclidean(3);
  auto gamma = ChristoffelField::build(metric, g);
  auto x_field = [](const VectorXd& p) { return p[0]; };
  auto mask = interior_mask(g, 1);

  double prev = 0;
  std::vector<double> kappas;
  for (double F : {2.0, 4.0, 8.0}) {
    WittenOperator op = build_witten_operator(g, gamma, WeightParam(F), x_field, mask);
    const double kappa = coercivity_probe(op);
    REQUIRE(kappa > 0.0);
    REQUIRE(kappa > prev);  // monotone in F
    kappas.push_back(kappa);
    prev = kappa;
  }
  const double exponent = std::log(kappas[2] / kappas[0]) / std::log(4.0);
  REQUIRE(exponent >= 1.5);
}

TEST_CASE("solenoidal projector: potentials, idempotence, gauge residual") {
  GridDesc g = slab_grid();
  auto metric = ChartMetric::conformal_radial(3, RadialProfile::linear(2.5, -0.4));
  auto gamma = ChristoffelField::build(metric, g);
  auto x_field = [](const VectorXd& p) { return p[0]; };
  WittenOperator op =
      build_witten_operator(g, gamma, WeightParam(2.0), x_field, interior_mask(g, 1));

  // pure potential d^s_F v maps to u ~ 0
  SymmetricTensorField v = random_field(g, 3, 31, 2);
  SymmetricTensorField pot(g, 4);
  pot.set_flat(op.d.apply(v.flat()));
  auto dec_pot = solenoidal_project(pot, op, 1e-12, 20000);
  const double pot_norm = std::sqrt(weighted_dot(pot.flat(), op.d.w_out, pot.flat()));
  const double u_norm = std::sqrt(weighted_dot(dec_pot.u.flat(), op.d.w_out, dec_pot.u.flat()));
  REQUIRE(u_norm <= 1e-6 * pot_norm);

  // random field: decomposition is consistent and the gauge residual is tiny
  SymmetricTensorField f = random_field(g, 4, 32, 1);
  auto dec = solenoidal_project(f, op, 1e-12, 20000);
  VectorXd recon = dec.u.flat() + op.d.apply(dec.v.flat());
  REQUIRE((recon - f.flat()).norm() <= 1e-10 * f.flat().norm());
  REQUIRE(dec.residual_gauge <= 1e-7);

  // idempotence
  auto dec2 = solenoidal_project(dec.u, op, 1e-12, 20000);
  const double change = (dec2.u.flat() - dec.u.flat()).norm();
  REQUIRE(change <= 1e-8 * dec.u.flat().norm());
}

TEST_CASE("vandermonde extension coefficients") {
  auto ec = vandermonde_extension_coeffs();
  REQUIRE(ec.equation_residual() <= 1e-12);

  // exact rational elimination oracle (the system is tiny): scaled integer
  // Gauss without divisions, using long double accumulation as a cross-check
  long double V[5][6];
  for (int k = 0; k <= 4; ++k) {
    for (int q = 1; q <= 5; ++q) V[k][q - 1] = std::pow((long double)q, k);
    V[k][5] = (k % 2 == 0) ? 1.0L : -1.0L;
  }
  for (int col = 0; col < 5; ++col) {
    int piv = col;
    for (int r = col + 1; r < 5; ++r)
      if (std::abs((double)V[r][col]) > std::abs((double)V[piv][col])) piv = r;
    std::swap(V[piv], V[col]);
    for (int r = 0; r < 5; ++r) {
      if (r == col) continue;
      const long double m = V[r][col] / V[col][col];
      for (int c2 = col; c2 <= 5; ++c2) V[r][c2] -= m * V[col][c2];
    }
  }
  const double expect[5] = {15.0, -40.0, 45.0, -24.0, 5.0};
  for (int i = 0; i < 5; ++i) {
    REQUIRE((double)(V[i][5] / V[i][i]) == Catch::Approx(expect[i]).margin(1e-9));
    REQUIRE(ec.C[i] == Catch::Approx(expect[i]).margin(1e-10));
  }
  // the first and last moment equations, straight from the display
  double s0 = 0, s4 = 0;
  for (int q = 1; q <= 5; ++q) {
    s0 += ec.C[q - 1];
    s4 += ec.C[q - 1] * std::pow(q, 4);
  }
  REQUIRE(s0 == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(s4 == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("tensor extension: constants, parity, polynomials, convergence order") {
  const int axis = 0, ghost = 3;
  auto make_grid = [&](int n0) {
    return GridDesc::box(3, {n0, 5, 5}, {0.0, -0.5, -0.5}, {1.0, 0.5, 0.5});
  };

  // constant field with no axis indices extends to the exact constant
  {
    GridDesc g = make_grid(16);
    SymmetricTensorField f(g, 3);
    const int cyyy = f.index_set().position({1, 1, 2});
    for (std::int64_t node = 0; node < g.num_nodes(); ++node) f.at(node, cyyy) = 2.5;
    SymmetricTensorField ext = extend_tensor_field(f, axis, ghost);
    for (std::int64_t node = 0; node < ext.grid().num_nodes(); ++node)
      REQUIRE(ext.at(node, cyyy) == Catch::Approx(2.5).margin(1e-12));
  }

  // f_nnn = 1: ghost values equal sum C_q (-q)^3 = +1 by the third moment
  {
    GridDesc g = make_grid(16);
    SymmetricTensorField f(g, 3);
    const int cnnn = f.index_set().position({0, 0, 0});
    for (std::int64_t node = 0; node < g.num_nodes(); ++node) f.at(node, cnnn) = 1.0;
    SymmetricTensorField ext = extend_tensor_field(f, axis, ghost);
    for (std::int64_t node = 0; node < ext.grid().num_nodes(); ++node)
      REQUIRE(ext.at(node, cnnn) == Catch::Approx(1.0).margin(1e-12));
  }

  // polynomial components: value and derivative jumps at the face <= 1e-10
  {
    GridDesc g = make_grid(16);
    SymmetricTensorField f = SymmetricTensorField::from_function(
        g, 3, [](const VectorXd& p, const std::uint8_t* t, int) {
          return p[0] * (1.0 + t[0]) + 0.3 * p[0] * p[0] - 0.1 * p[1] + 0.05 * t[1];
        });
    SymmetricTensorField ext = extend_tensor_field(f, axis, ghost);
    auto jump = extension_c1_defect(f, ext, axis, ghost);
    REQUIRE(jump.value_jump <= 1e-10);
    REQUIRE(jump.deriv_jump <= 1e-10);
  }

  // smooth non-polynomial field: C^1 defect order >= 1.9 under refinement
  {
    auto defect = [&](int n0) {
      GridDesc g = make_grid(n0);
      SymmetricTensorField f = SymmetricTensorField::from_function(
          g, 3, [](const VectorXd& p, const std::uint8_t* t, int) {
            return std::sin(2.0 * p[0] + 0.3 * t[0]) * std::cos(p[1] - 0.2 * t[2]);
          });
      SymmetricTensorField ext = extend_tensor_field(f, axis, ghost);
      auto j = extension_c1_defect(f, ext, axis, ghost);
      return j.deriv_jump;
    };
    const double coarse = defect(16);
    const double fine = defect(31);  // spacing almost exactly halves
    const double order = std::log(coarse / fine) / std::log((15.0) / 7.5);
    REQUIRE(order >= 1.9);
  }
}

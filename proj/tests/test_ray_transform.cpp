// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#include "tray/ray_transform.hpp"
#include "tray/tensor_calculus.hpp"
#include "tray/transform_l.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace tray;

namespace {

BoundaryChart ball_chart() {
  BoundaryChart b;
  b.rho = [](const VectorXd& p) { return 1.0 - p.norm(); };
  b.xtilde = [](const VectorXd& p) { return p.norm() - 1.0; };
  b.c_offset = 1.0;
  b.point_of = [](double x, const VectorXd& y) {
    const double r = x;  // x = |p| for the whole-ball lens (c = 1)
    VectorXd p(3);
    p << r * std::sin(y[0]) * std::cos(y[1]), r * std::sin(y[0]) * std::sin(y[1]),
        r * std::cos(y[0]);
    return p;
  };
  return b;
}

GeodesicFan ball_fan(int x_levels, int y_count, int lam, int om) {
  FanParameters fp;
  fp.c2 = 1.0;
  for (int i = 0; i < x_levels; ++i)
    fp.x_levels.push_back(0.35 + 0.5 * i / std::max(1, x_levels - 1));
  Rng rng(31137);
  std::uniform_real_distribution<double> uth(0.35, M_PI - 0.35), uph(0.0, 2 * M_PI);
  for (int i = 0; i < y_count; ++i) {
    VectorXd y(2);
    y << uth(rng), uph(rng);
    fp.y_points.push_back(y);
  }
  fp.lambda_count = lam;
  fp.omega_count = om;
  return local_geodesic_fan(ball_chart(), fp, 3);
}

// smooth bump supported in |p - c| < rad
double bump(const VectorXd& p, const VectorXd& c, double rad) {
  const double s = (p - c).norm() / rad;
  if (s >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

SymmetricTensorField metric_square_field(const GridDesc& g, const ChartMetric& metric) {
  // Sym(g (x) g): contracts any unit-speed velocity 4th power to 1
  DenseTensorField d = DenseTensorField::zeros(g, 4);
  for (std::int64_t node = 0; node < g.num_nodes(); ++node) {
    const MatrixXd gm = metric.g(g.point(node));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) {
            int tup[4] = {i, j, k, l};
            d.at(node, tup) = gm(i, j) * gm(k, l);
          }
  }
  return symmetrize(d);
}

}  // namespace

TEST_CASE("transform of the zero field vanishes, of Sym(g x g) gives length") {
  auto boundary = ball_chart();
  GeodesicFan fan = ball_fan(2, 4, 3, 4);
  TraceOptions topts;
  topts.step = 2e-3;

  // euclidean: Sym(g x g) is constant, interpolation is exact
  {
    auto metric = ChartMetric::euclidean(3);
    GridDesc grid = GridDesc::cube(3, 9, -1.05, 1.05);
    SymmetricTensorField zero(grid, 4);
    RayData dz = forward_fan(zero, fan, metric, boundary, topts);
    REQUIRE(dz.valid_count() > 20);
    for (int i = 0; i < dz.size(); ++i) REQUIRE(dz.values[i] == 0.0);

    SymmetricTensorField gg = metric_square_field(grid, metric);
    RayData dg = forward_fan(gg, fan, metric, boundary, topts);
    for (int i = 0; i < dg.size(); ++i) {
      if (!dg.valid[i]) continue;
      REQUIRE(dg.values[i] == Catch::Approx(dg.lengths[i]).epsilon(1e-9));
    }
  }

  // conformal: limited by trilinear interpolation of the metric square
  {
    auto metric = ChartMetric::conformal_radial(3, RadialProfile::linear(2.0, -0.9));
    GridDesc grid = GridDesc::cube(3, 21, -1.05, 1.05);
    SymmetricTensorField gg = metric_square_field(grid, metric);
    RayData dg = forward_fan(gg, fan, metric, boundary, topts);
    int checked = 0;
    for (int i = 0; i < dg.size(); ++i) {
      if (!dg.valid[i]) continue;
      REQUIRE(dg.values[i] == Catch::Approx(dg.lengths[i]).epsilon(1e-2));
      ++checked;
    }
    REQUIRE(checked > 20);
  }
}

TEST_CASE("forward operator is linear in the field") {
  auto metric = ChartMetric::euclidean(3);
  auto boundary = ball_chart();
  GridDesc grid = GridDesc::cube(3, 9, -1.05, 1.05);
  GeodesicFan fan = ball_fan(2, 3, 3, 3);
  TraceOptions topts;
  topts.step = 5e-3;

  Rng rng(8);
  std::normal_distribution<double> gauss;
  SymmetricTensorField f(grid, 4), g(grid, 4);
  for (auto& v : f.data()) v = gauss(rng);
  for (auto& v : g.data()) v = gauss(rng);
  const double a = 1.7, b = -0.4;
  SymmetricTensorField comb(grid, 4);
  for (std::size_t i = 0; i < comb.data().size(); ++i)
    comb.data()[i] = a * f.data()[i] + b * g.data()[i];

  RayData df = forward_fan(f, fan, metric, boundary, topts);
  RayData dgm = forward_fan(g, fan, metric, boundary, topts);
  RayData dc = forward_fan(comb, fan, metric, boundary, topts);
  double scale = 0;
  for (int i = 0; i < dc.size(); ++i) scale = std::max(scale, std::abs(dc.values[i]));
  for (int i = 0; i < dc.size(); ++i)
    REQUIRE(dc.values[i] ==
            Catch::Approx(a * df.values[i] + b * dgm.values[i]).margin(1e-12 * scale));
}

TEST_CASE("potential fields are annihilated and the residual shrinks 4x") {
  auto metric = ChartMetric::euclidean(3);
  auto boundary = ball_chart();
  GeodesicFan fan = ball_fan(2, 4, 3, 4);

  auto kernel_residual = [&](int nodes, double step) {
    GridDesc grid = GridDesc::cube(3, nodes, -1.05, 1.05);
    auto gamma = ChristoffelField::build(metric, grid);
    VectorXd c(3);
    c << 0.15, -0.1, 0.05;
    SymmetricTensorField v = SymmetricTensorField::from_function(
        grid, 3, [&](const VectorXd& p, const std::uint8_t* t, int) {
          return bump(p, c, 0.72) * (0.4 + 0.3 * t[0] - 0.2 * t[1] + 0.1 * t[2]);
        });
    SymmetricTensorField dv = sym_diff(v, gamma);
    TraceOptions topts;
    topts.step = step;
    RayData d = forward_fan(dv, fan, metric, boundary, topts);
    double worst = 0;
    for (int i = 0; i < d.size(); ++i)
      if (d.valid[i]) worst = std::max(worst, std::abs(d.values[i]));
    return worst / v.max_abs();
  };

  const double coarse = kernel_residual(13, 8e-3);
  const double fine = kernel_residual(25, 4e-3);
  REQUIRE(coarse < 0.2);
  REQUIRE(fine * 4.0 <= coarse * 1.25);  // ~2nd order shrink with 25% slack
}

TEST_CASE("qP perturbation reduces to the symmetrized transform") {
  auto prof = RadialProfile::linear(2.0, -0.4);
  auto metric = ChartMetric::conformal_radial(3, prof);
  auto boundary = ball_chart();
  GridDesc grid = GridDesc::cube(3, 9, -1.05, 1.05);
  auto rho = [](const VectorXd& p) { return 1.1 + 0.2 * p[0] * p[0]; };
  auto cp = [&](const VectorXd& p) { return prof(p.norm()); };

  StiffnessField zero = StiffnessField::zeros(grid);
  StiffnessField a = StiffnessField::random_anisotropic(
      grid, 0.6, 2024, [](const VectorXd& p) { return 1.0 + 0.3 * p[1]; });
  SymmetricTensorField f = stiffness_to_symmetric(a, rho, cp);

  GeodesicFan fan = ball_fan(2, 3, 3, 3);
  TraceOptions topts;
  topts.step = 2e-3;
  auto chords = trace_fan(metric, boundary, fan, topts);

  double scale = 0;
  for (const auto& ch : chords) {
    if (!ch.complete) continue;
    scale = std::max(scale, std::abs(forward_traced(f, ch)));
  }
  for (const auto& ch : chords) {
    if (!ch.complete) continue;
    REQUIRE(qp_perturbation(zero, rho, cp, ch) == 0.0);
    const double via_qp = qp_perturbation(a, rho, cp, ch);
    const double via_sym = forward_traced(f, ch);
    REQUIRE(via_qp == Catch::Approx(via_sym).margin(1e-10 * std::max(1.0, scale)));
  }
}

TEST_CASE("isotropic stiffness on a straight chord integrates to (lam+2mu)/(rho c^6) L") {
  auto metric = ChartMetric::euclidean(3);
  auto boundary = ball_chart();
  GridDesc grid = GridDesc::cube(3, 7, -1.05, 1.05);
  const double lam = 1.4, mu = 0.6, rho_v = 1.2, c_v = 1.0;
  StiffnessField iso = StiffnessField::isotropic(
      grid, [&](const VectorXd&) { return lam; }, [&](const VectorXd&) { return mu; });
  auto rho = [&](const VectorXd&) { return rho_v; };
  auto cp = [&](const VectorXd&) { return c_v; };

  FanEntry e;
  e.x = 0.6;
  e.y = VectorXd(2);
  e.y << 1.2, 0.7;
  e.lambda = 0.3;
  e.omega = VectorXd(2);
  e.omega << 0.6, 0.8;
  e.admissible = true;
  TraceOptions topts;
  topts.step = 1e-3;
  ChordSamples ch = trace_chord(metric, boundary, e, topts);
  REQUIRE(ch.complete);
  // hand contraction: C_ijkl v^i v^j v^k v^l = lam + 2 mu for unit v
  const double expect = (lam + 2 * mu) / (rho_v * std::pow(c_v, 6)) * ch.length;
  REQUIRE(qp_perturbation(iso, rho, cp, ch) == Catch::Approx(expect).epsilon(1e-6));
}

namespace {

// flat slab chart with lattice-aligned tangential chords, for the discrete
// normal-operator symmetry check
struct SlabSetup {
  ChartMetric metric = ChartMetric::euclidean(3);
  BoundaryChart boundary;
  GridDesc grid;
  GeodesicFan fan;

  SlabSetup() {
    grid = GridDesc::box(3, {4, 17, 17}, {0.5, -1.0, -1.0}, {0.8, 1.0, 1.0});
    boundary.rho = [](const VectorXd& p) {
      return std::min(std::min(1.0 - p[1], p[1] + 1.0), std::min(1.0 - p[2], p[2] + 1.0));
    };
    boundary.xtilde = [](const VectorXd& p) { return p[0]; };
    boundary.c_offset = 0.0;
    boundary.point_of = [](double x, const VectorXd& y) {
      VectorXd p(3);
      p << x, y[0], y[1];
      return p;
    };
    std::vector<VectorXd> dirs;
    for (auto [a, b] : {std::pair{1.0, 0.0}, {0.0, 1.0}, {M_SQRT1_2, M_SQRT1_2},
                        {M_SQRT1_2, -M_SQRT1_2}}) {
      VectorXd w(2);
      w << a, b;
      dirs.push_back(w);
      dirs.push_back(-w);
    }
    fan.dim = 3;
    int base_id = 0;
    for (int ix = 0; ix < grid.shape[0]; ++ix)
      for (int iy = 1; iy + 1 < grid.shape[1]; ++iy)
        for (int iz = 1; iz + 1 < grid.shape[2]; ++iz) {
          const VectorXd p = grid.point(grid.index({ix, iy, iz}));
          for (const auto& w : dirs) {
            FanEntry e;
            e.x = p[0];
            e.y = VectorXd(2);
            e.y << p[1], p[2];
            e.lambda = 0.0;
            e.omega = w;
            e.admissible = true;
            e.base_id = base_id;
            fan.entries.push_back(e);
          }
          ++base_id;
        }
    fan.base_count = base_id;
  }
};

double pair_sc(const SymmetricTensorField& lf, const SymmetricTensorField& g_sc) {
  const GridDesc& grid = lf.grid();
  const auto& idx = lf.index_set();
  double s = 0;
  for (std::int64_t node = 0; node < grid.num_nodes(); ++node) {
    const double vol = grid.trapezoid_weight(grid.coords(node));
    for (int c = 0; c < idx.size(); ++c)
      s += vol * idx.multiplicity(c) * lf.at(node, c) * g_sc.at(node, c);
  }
  return s;
}

SymmetricTensorField interior_field(const GridDesc& grid, std::uint64_t seed) {
  Rng r2(seed);
  std::normal_distribution<double> gg;
  SymmetricTensorField f(grid, 4);
  for (std::int64_t node = 0; node < grid.num_nodes(); ++node) {
    const auto iv = grid.coords(node);
    if (iv[1] < 4 || iv[1] > grid.shape[1] - 5 || iv[2] < 4 || iv[2] > grid.shape[2] - 5)
      continue;
    for (int c = 0; c < f.component_count(); ++c) f.at(node, c) = gg(r2);
  }
  return f;
}

}  // namespace

TEST_CASE("weighted transform: parity, coverage, and discrete symmetry") {
  SlabSetup slab;
  TraceOptions topts;
  topts.step = slab.grid.spacing(1);  // chord samples land on lattice nodes
  auto x_field = [](const VectorXd& p) { return p[0]; };

  SymmetricTensorField f = interior_field(slab.grid, 21), g = interior_field(slab.grid, 22);
  CutoffProfile chi = CutoffProfile::gaussian_profile(1.0);

  // zero data maps to the zero field
  RayData zero_data = forward_fan(SymmetricTensorField(slab.grid, 4), slab.fan, slab.metric,
                                  slab.boundary, topts);
  auto lz = weighted_transform_L(zero_data, slab.metric, chi, slab.grid);
  REQUIRE(lz.field.max_abs() == 0.0);

  // discrete symmetry of <L I f, g> on the lattice fan
  RayData df = forward_fan(f, slab.fan, slab.metric, slab.boundary, topts);
  RayData dg = forward_fan(g, slab.fan, slab.metric, slab.boundary, topts);
  auto lf = weighted_transform_L(df, slab.metric, chi, slab.grid);
  auto lg = weighted_transform_L(dg, slab.metric, chi, slab.grid);
  SymmetricTensorField f_sc = scattering_basis_convert(f, x_field, ScatteringDirection::from_sc);
  SymmetricTensorField g_sc = scattering_basis_convert(g, x_field, ScatteringDirection::from_sc);
  const double s1 = pair_sc(lf.field, g_sc);
  const double s2 = pair_sc(lg.field, f_sc);
  const double scale = std::max(std::abs(s1), std::abs(s2));
  REQUIRE(std::abs(s1 - s2) <= 1e-8 * scale);

  // constant data on a symmetric lambda-grid: odd-in-lambda blocks vanish
  {
    GeodesicFan lam_fan;
    lam_fan.dim = 3;
    VectorXd y0(2);
    y0 << 0.0, 0.0;
    for (double lam : {-0.3, -0.15, 0.0, 0.15, 0.3})
      for (int k = 0; k < 8; ++k) {
        FanEntry e;
        e.x = 0.65;
        e.y = y0;
        e.lambda = lam;
        e.omega = VectorXd(2);
        e.omega << std::cos(2 * M_PI * k / 8), std::sin(2 * M_PI * k / 8);
        e.admissible = true;
        lam_fan.entries.push_back(e);
      }
    lam_fan.base_count = 1;
    RayData ones;
    ones.fan = lam_fan;
    ones.values.assign(lam_fan.entries.size(), 1.0);
    ones.lengths.assign(lam_fan.entries.size(), 1.0);
    ones.valid.assign(lam_fan.entries.size(), 1);
    ones.errors.assign(lam_fan.entries.size(), "");
    GridDesc node_grid = GridDesc::box(3, {2, 3, 3}, {0.65, -0.5, -0.5}, {0.85, 0.5, 0.5});
    auto lu = weighted_transform_L(ones, slab.metric, chi, node_grid);
    const auto& idx = lu.field.index_set();
    const std::int64_t node = node_grid.index({0, 1, 1});
    double even_mass = 0;
    for (int c = 0; c < idx.size(); ++c) {
      int a = 0;
      for (int k = 0; k < 4; ++k)
        if (idx.tuple(c)[k] == 0) ++a;
      if (a % 2 == 1) {
        REQUIRE(std::abs(lu.field.at(node, c)) < 1e-12);
      } else {
        even_mass += std::abs(lu.field.at(node, c));
      }
    }
    REQUIRE(even_mass > 0.0);
  }

  // cutoff support excluded by the fan range: zero field plus warning
  {
    CutoffProfile tight = CutoffProfile::bump_profile(1e-4);
    RayData df2 = df;
    for (auto& e : df2.fan.entries) e.lambda = 0.4;  // outside the cutoff support
    auto lw = weighted_transform_L(df2, slab.metric, tight, slab.grid);
    REQUIRE(lw.coverage_warning);
    REQUIRE(lw.field.max_abs() == 0.0);
  }
}

TEST_CASE("fan refinement self-convergence of the composed transform") {
  SlabSetup slab;
  TraceOptions topts;
  topts.step = slab.grid.spacing(1) * 0.5;
  // smooth interior field
  SymmetricTensorField f = SymmetricTensorField::from_function(
      slab.grid, 4, [](const VectorXd& p, const std::uint8_t* t, int) {
        const double env = std::max(0.0, 1.0 - p[1] * p[1]) * std::max(0.0, 1.0 - p[2] * p[2]);
        return env * std::sin(2.0 * p[1] + t[0]) * std::cos(1.5 * p[2] - t[2]);
      });
  CutoffProfile chi = CutoffProfile::gaussian_profile(1.0);

  auto composed = [&](int nomega) {
    GeodesicFan fan;
    fan.dim = 3;
    VectorXd y0(2);
    y0 << 0.0, 0.0;
    for (int k = 0; k < nomega; ++k) {
      FanEntry e;
      e.x = 0.65;
      e.y = y0;
      e.lambda = 0.0;
      e.omega = VectorXd(2);
      e.omega << std::cos(2 * M_PI * k / nomega), std::sin(2 * M_PI * k / nomega);
      e.admissible = true;
      fan.entries.push_back(e);
    }
    fan.base_count = 1;
    RayData d = forward_fan(f, fan, slab.metric, slab.boundary, topts);
    GridDesc node_grid = GridDesc::box(3, {2, 3, 3}, {0.65, -0.5, -0.5}, {0.85, 0.5, 0.5});
    auto l = weighted_transform_L(d, slab.metric, chi, node_grid);
    VectorXd out(l.field.component_count());
    const std::int64_t node = node_grid.index({0, 1, 1});
    for (int c = 0; c < l.field.component_count(); ++c)
      out[c] = l.field.at(node, c) / (nomega / 8.0);  // uniform measure normalization
    return out;
  };

  VectorXd coarse = composed(16);
  VectorXd fine = composed(32);
  REQUIRE((coarse - fine).norm() <= 1e-4 * std::max(1.0, fine.norm()));
}

// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_ELLIPTICITY_HPP
#define TRAY_ELLIPTICITY_HPP

#include "tray/block_space.hpp"
#include "tray/common.hpp"
#include "tray/symbol.hpp"

#include <complex>
#include <vector>

namespace tray {

// Point on the equatorial sphere S tilde * xi + Yhat . eta = 0 over which the
// normal-operator projector is integrated.
struct EquatorPoint {
  double s_tilde = 0.0;
  VectorXd y_hat;

  double equator_defect(double xi, const VectorXd& eta) const {
    return s_tilde * xi + y_hat.dot(eta);
  }
};

// Semiclassical quantities of the finite-point ellipticity analysis:
// nu = alpha / F, h = 1/F, rescaled frequencies, and the closed forms
// phi = nu (xi^2 + F^2) and c_j = (-1)^j (xi_F^2+1)^{-j} (xi_F - i)^j rho^j.
struct FinitePointSymbolParams {
  double alpha = 1.0;
  double F = 1.0;
  double xi = 0.0;
  VectorXd eta;

  double nu() const { return alpha / F; }
  double h() const { return 1.0 / F; }
  double xi_F() const { return xi / F; }
  VectorXd eta_F() const { return eta / F; }
  Complex phi() const {
    const Complex z(xi, F);
    return (nu() * z - Complex(0, 2.0 * alpha)) * z;
  }
  double phi_closed() const { return nu() * (xi * xi + F * F); }

  Complex c_coeff(int j, const VectorXd& y_hat) const {
    const double rho = y_hat.dot(eta_F());
    const double xf = xi_F();
    const Complex base = Complex(xf, -1.0) * rho / (xf * xf + 1.0);
    Complex out(1.0, 0.0);
    for (int k = 0; k < j; ++k) out *= -base;
    return out;
  }
};

struct CertificateRecord {
  double xi = 0.0;
  VectorXd eta;
  double F = 0.0;
  double min_sigma = 0.0;
  bool trivial_kernel = false;
};

namespace detail {

// Row of the projector pairing <(s, Y)-powers, f> over the 5-block
// decomposition, with binomial weights: block j gets C(4,j) s^{4-j} Y^(x)j.
inline VectorXd moment_row(const BlockSpace& sp, double s, const VectorXd& y_hat) {
  VectorXd r = VectorXd::Zero(sp.dim());
  for (int j = 0; j <= sp.rank(); ++j) {
    const VectorXd pw = sp.power_block(j, y_hat);
    const double coeff =
        binomial(sp.rank(), j) * std::pow(s, sp.rank() - j);
    for (int c = 0; c < sp.block_dim(j); ++c)
      r[sp.offset(j) + c] = coeff * pw[c] * sp.block(j).multiplicity(c);
  }
  return r;
}

inline void append_normalized(std::vector<VectorXcd>& rows, const VectorXcd& r) {
  const double nrm = r.norm();
  if (nrm > 1e-300) rows.push_back(r / nrm);
}

// Tangential directions orthogonal to eta, plus the near-orthogonal ring
// Y(eps) = eps etahat + sqrt(1-eps^2) Yperp that discretizes the derivative
// argument of the ellipticity proofs.
inline std::vector<VectorXd> perpendicular_ring(const VectorXd& eta, int extra,
                                                Rng& rng) {
  const int ny = static_cast<int>(eta.size());
  std::vector<VectorXd> out;
  if (eta.norm() < 1e-14) return out;
  const VectorXd he = eta / eta.norm();
  std::vector<VectorXd> perp;
  if (ny == 2) {
    VectorXd p(2);
    p << -he[1], he[0];
    perp.push_back(p);
  } else {
    for (int d = 0; d < ny && static_cast<int>(perp.size()) < ny - 1; ++d) {
      VectorXd e = VectorXd::Unit(ny, d);
      e -= he.dot(e) * he;
      for (const auto& f : perp) e -= f.dot(e) * f;
      if (e.norm() < 1e-8) continue;
      perp.push_back(e / e.norm());
    }
    for (int k = 0; k < extra; ++k) {
      VectorXd v = random_unit_vector(ny, rng);
      v -= he.dot(v) * he;
      if (v.norm() > 1e-8) perp.push_back(v / v.norm());
    }
  }
  static const double kEps[] = {0.0, 0.02, -0.02, 0.05, -0.05, 0.1, -0.1, 0.2, -0.2};
  for (const auto& yp : perp)
    for (double e : kEps) {
      VectorXd y = e * he + std::sqrt(1.0 - e * e) * yp;
      out.push_back(y / y.norm());
    }
  return out;
}

}  // namespace detail

// Ellipticity at fiber infinity restricted to the kernel of the gauge symbol:
// stacks the kernel relations of the delta^s symbol (principal part, F and
// curvature drop at fiber infinity) with the moment constraints over the
// equatorial sphere, and reports the smallest singular value of the
// row-normalized system over symmetric 4-tensors. Trivial kernel iff
// min sigma exceeds the tolerance.
inline CertificateRecord fiber_infinity_certificate(int n, double xi,
                                                    const VectorXd& eta,
                                                    int y_samples = 32,
                                                    double tol = 1e-8,
                                                    std::uint64_t seed = 77001ull) {
  if (std::abs(xi) < 1e-300 && eta.norm() < 1e-300)
    throw InsufficientRowsError("fiber_infinity_certificate: zero direction");
  const int ny = n - 1;
  BlockSpace sp(n, 4);
  Rng rng(seed);
  std::vector<VectorXcd> rows;

  if (std::abs(xi) > 1e-12) {
    // gauge kernel relations: xi on the diagonal, contraction one block up
    const CovectorSplit pt(xi, eta, 0.0);
    const MatrixXcd B = deltasF_symbol_display(pt, 3, CurvatureCoefficients::zero(n, 3));
    for (int r = 0; r < B.rows(); ++r) detail::append_normalized(rows, B.row(r));
    // moment constraints on the equator: s = -Yhat.eta / xi
    auto add_moment = [&](const VectorXd& y) {
      const double s = -y.dot(eta) / xi;
      detail::append_normalized(rows, detail::moment_row(sp, s, y).cast<Complex>());
    };
    for (const auto& y : uniform_sphere_directions(n - 1, y_samples)) add_moment(y);
    for (const auto& y : detail::perpendicular_ring(eta, std::max(0, ny - 2), rng))
      add_moment(y);
  } else {
    // xi = 0 branch: contraction relations by etahat on every block, plus the
    // S-derivative family at the equator Yhat . eta = 0.
    const VectorXd he = eta / eta.norm();
    for (int j = 1; j <= 4; ++j) {
      const MatrixXd C = contraction_op(ny, j, he);
      for (int r = 0; r < C.rows(); ++r) {
        VectorXcd row = VectorXcd::Zero(sp.dim());
        for (int c = 0; c < sp.block_dim(j); ++c)
          row[sp.offset(j) + c] = C(r, c);
        detail::append_normalized(rows, row);
      }
    }
    std::vector<VectorXd> perp;
    if (ny == 2) {
      VectorXd p(2);
      p << -he[1], he[0];
      perp.push_back(p);
    } else {
      for (int k = 0; k < 2 * ny; ++k) {
        VectorXd v = random_unit_vector(ny, rng);
        v -= he.dot(v) * he;
        if (v.norm() > 1e-8) perp.push_back(v / v.norm());
      }
    }
    for (const auto& y : perp)
      for (int j = 0; j <= 4; ++j) {
        // d^{4-j}/dS^{4-j} of the moment row at S = 0 isolates block j
        VectorXcd row = VectorXcd::Zero(sp.dim());
        const VectorXd pw = sp.power_block(j, y);
        for (int c = 0; c < sp.block_dim(j); ++c)
          row[sp.offset(j) + c] = pw[c] * sp.block(j).multiplicity(c);
        detail::append_normalized(rows, row);
      }
  }

  if (static_cast<int>(rows.size()) < sp.dim())
    throw InsufficientRowsError("fiber_infinity_certificate: not enough rows");
  MatrixXcd A(rows.size(), sp.dim());
  for (std::size_t r = 0; r < rows.size(); ++r) A.row(r) = rows[r];
  CertificateRecord rec;
  rec.xi = xi;
  rec.eta = eta;
  rec.min_sigma = A.jacobiSvd().singularValues().minCoeff();
  rec.trivial_kernel = rec.min_sigma > tol;
  return rec;
}

// Finite-point ellipticity certificate in the semiclassical limit h -> 0:
// stacks the rescaled gauge kernel relations (diagonal xi_F - i) with the
// reduced moment family <((xi_F^2+1)^{-1} (Yhat.eta_F) eta_F + Yhat)^(x)4,
// f_yyyy> over sampled directions. For h > 0 a curvature margin estimate is
// reported alongside.
struct FinitePointRecord : CertificateRecord {
  double margin_estimate = 0.0;  // min_sigma minus the O(h) curvature estimate
};

inline FinitePointRecord finite_point_certificate(int n, double xi_F,
                                                  const VectorXd& eta_F,
                                                  int y_samples = 32,
                                                  double h = 0.0,
                                                  double curv_bound = 0.0,
                                                  double tol = 1e-8,
                                                  std::uint64_t seed = 77002ull) {
  const int ny = n - 1;
  BlockSpace sp(n, 4);
  Rng rng(seed);
  std::vector<VectorXcd> rows;

  const CovectorSplit pt(xi_F, eta_F, 1.0);  // diagonal becomes xi_F - i
  const MatrixXcd B = deltasF_symbol_display(pt, 3, CurvatureCoefficients::zero(n, 3));
  for (int r = 0; r < B.rows(); ++r) detail::append_normalized(rows, B.row(r));

  auto add_reduced = [&](const VectorXd& y) {
    const double a = y.dot(eta_F) / (xi_F * xi_F + 1.0);
    const VectorXd w = a * eta_F + y;
    VectorXcd row = VectorXcd::Zero(sp.dim());
    const VectorXd pw = sp.power_block(4, w);
    for (int c = 0; c < sp.block_dim(4); ++c)
      row[sp.offset(4) + c] = pw[c] * sp.block(4).multiplicity(c);
    detail::append_normalized(rows, row);
  };
  for (const auto& y : uniform_sphere_directions(n - 1, y_samples)) add_reduced(y);
  for (const auto& y : detail::perpendicular_ring(eta_F, std::max(0, ny - 2), rng))
    add_reduced(y);

  if (static_cast<int>(rows.size()) < sp.dim())
    throw InsufficientRowsError("finite_point_certificate: not enough rows");
  MatrixXcd A(rows.size(), sp.dim());
  for (std::size_t r = 0; r < rows.size(); ++r) A.row(r) = rows[r];

  FinitePointRecord rec;
  rec.xi = xi_F;
  rec.eta = eta_F;
  rec.F = h > 0 ? 1.0 / h : std::numeric_limits<double>::infinity();
  rec.min_sigma = A.jacobiSvd().singularValues().minCoeff();
  // Curvature perturbs the normalized gauge rows by O(h * C) through the
  // paired coupling coefficients (largest is 6 on the a-flat block).
  rec.margin_estimate = rec.min_sigma - 6.0 * h * curv_bound;
  rec.trivial_kernel = rec.min_sigma > tol;
  return rec;
}

// The five orthogonality families produced by differentiating the reduced
// moment identity at eps = 0: etahat^k (x)_s Yperp^(4-k), k = 0..4. Each must
// be a linear consequence of the stacked certificate system; checked by a
// least-squares solve on the transposed system.
inline bool finite_point_family_check(int n, double xi_F, const VectorXd& eta_F,
                                      int y_samples = 32, double tol = 1e-8,
                                      std::uint64_t seed = 77003ull) {
  if (eta_F.norm() < 1e-12) return true;  // families degenerate at eta = 0
  const int ny = n - 1;
  BlockSpace sp(n, 4);
  Rng rng(seed);

  std::vector<VectorXcd> rows;
  const CovectorSplit pt(xi_F, eta_F, 1.0);
  const MatrixXcd B = deltasF_symbol_display(pt, 3, CurvatureCoefficients::zero(n, 3));
  for (int r = 0; r < B.rows(); ++r) detail::append_normalized(rows, B.row(r));
  auto add_reduced = [&](const VectorXd& y) {
    const double a = y.dot(eta_F) / (xi_F * xi_F + 1.0);
    const VectorXd w = a * eta_F + y;
    VectorXcd row = VectorXcd::Zero(sp.dim());
    const VectorXd pw = sp.power_block(4, w);
    for (int c = 0; c < sp.block_dim(4); ++c)
      row[sp.offset(4) + c] = pw[c] * sp.block(4).multiplicity(c);
    detail::append_normalized(rows, row);
  };
  for (const auto& y : uniform_sphere_directions(n - 1, y_samples)) add_reduced(y);
  for (const auto& y : detail::perpendicular_ring(eta_F, std::max(0, ny - 2), rng))
    add_reduced(y);

  MatrixXcd A(rows.size(), sp.dim());
  for (std::size_t r = 0; r < rows.size(); ++r) A.row(r) = rows[r];

  const VectorXd he = eta_F / eta_F.norm();
  VectorXd yp(ny);
  if (ny == 2) {
    yp << -he[1], he[0];
  } else {
    Rng prng(seed + 1);
    do {
      yp = random_unit_vector(ny, prng);
      yp -= he.dot(yp) * he;
    } while (yp.norm() < 1e-8);
    yp /= yp.norm();
  }

  // symmetrized power basis tensors etahat^k (x)_s yperp^{4-k} as functionals
  const auto& s4 = SymmetricIndexSet::get(ny, 4);
  Eigen::JacobiSVD<MatrixXcd> svd(A, Eigen::ComputeThinV);
  const auto& sig = svd.singularValues();
  int rank = 0;
  while (rank < sig.size() && sig[rank] > 1e-10 * sig[0]) ++rank;
  const MatrixXcd Vr = svd.matrixV().leftCols(rank);  // row-space basis
  for (int k = 0; k <= 4; ++k) {
    VectorXcd fam = VectorXcd::Zero(sp.dim());
    for (int c = 0; c < s4.size(); ++c) {
      // dense value of Sym(etahat^k (x) yperp^{4-k}) at the canonical tuple
      const auto& t = s4.tuple(c);
      int perm[4] = {0, 1, 2, 3};
      double acc = 0;
      int cnt = 0;
      std::sort(perm, perm + 4);
      do {
        double prod = 1;
        for (int i = 0; i < 4; ++i) {
          const double* vec = (perm[i] < k) ? he.data() : yp.data();
          prod *= vec[t[i]];
        }
        acc += prod;
        ++cnt;
      } while (std::next_permutation(perm, perm + 4));
      fam[sp.offset(4) + c] = (acc / cnt) * s4.multiplicity(c);
    }
    fam /= fam.norm();
    // fam must lie in the row space of the stacked system
    const double resid = (fam - Vr * (Vr.adjoint() * fam)).norm();
    if (resid > tol) return false;
  }
  return true;
}

// chi(S) (S^4, S^3 Yhat, ..., Yhat^4) (x) M(4)-pairing row: the rank-one
// projector integrand over the equatorial sphere. (4,4)-self-adjoint by
// construction; returned as a matrix on the 5-block space.
inline MatrixXd projector_integrand(double s_tilde, const VectorXd& y_hat, int n,
                                    double chi_value = 1.0) {
  BlockSpace sp(n, 4);
  VectorXd u = VectorXd::Zero(sp.dim());
  for (int j = 0; j <= 4; ++j) {
    const VectorXd pw = sp.power_block(j, y_hat);
    for (int c = 0; c < sp.block_dim(j); ++c)
      u[sp.offset(j) + c] = std::pow(s_tilde, 4 - j) * pw[c];
  }
  const VectorXd w = sp.weight_diagonal();
  return chi_value * u * (w.cwiseProduct(u)).transpose();
}

struct GaussianTransformReport {
  double constant = 0.0;   // c in chihat = c sqrt(nu) exp(-nu k^2 / 2)
  double max_error = 0.0;  // quadrature FT vs closed form
  // Convention: chihat(k) = integral chi(s) exp(-i k s) ds, giving c = sqrt(2 pi).
};

// Quadrature Fourier transform of the Gaussian cutoff chi(s) = exp(-s^2/(2 nu))
// against the closed form c sqrt(nu) exp(-nu k^2 / 2).
inline GaussianTransformReport gaussian_cutoff_transform(double nu) {
  if (!(nu > 0)) throw InvalidProfileError("gaussian_cutoff_transform: nu must be > 0");
  GaussianTransformReport rep;
  rep.constant = std::sqrt(2.0 * M_PI);
  const double half_width = 14.0 * std::sqrt(nu);
  const int N = 20000;
  const double ds = 2.0 * half_width / N;
  for (double k : {0.0, 0.3 / std::sqrt(nu), 1.0 / std::sqrt(nu), 2.5 / std::sqrt(nu)}) {
    double re = 0.0;
    for (int i = 0; i <= N; ++i) {
      const double s = -half_width + i * ds;
      const double w = (i == 0 || i == N) ? 0.5 : 1.0;
      re += w * std::exp(-s * s / (2 * nu)) * std::cos(k * s) * ds;
    }
    const double closed = rep.constant * std::sqrt(nu) * std::exp(-nu * k * k / 2);
    rep.max_error = std::max(rep.max_error, std::abs(re - closed));
  }
  return rep;
}

}  // namespace tray

#endif  // TRAY_ELLIPTICITY_HPP

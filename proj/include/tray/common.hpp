// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_COMMON_HPP
#define TRAY_COMMON_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tray {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

class TrayError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define TRAY_ERROR_TYPE(Name)                                                  \
  class Name : public TrayError {                                             \
  public:                                                                      \
    using TrayError::TrayError;                                               \
  }

TRAY_ERROR_TYPE(DegenerateMetricError);   // metric not positive definite
TRAY_ERROR_TYPE(BlowUpError);             // non-finite integrator state
TRAY_ERROR_TYPE(NoExitError);             // geodesic failed to reach the boundary
TRAY_ERROR_TYPE(OutOfDomainError);        // point outside the grid chart
TRAY_ERROR_TYPE(InvalidProfileError);     // non-positive wave speed profile
TRAY_ERROR_TYPE(EmptyLevelError);         // level set not found in the chart
TRAY_ERROR_TYPE(RankError);               // tensor rank outside the supported range
TRAY_ERROR_TYPE(WeightSingularityError);  // exponential weight needs x > 0
TRAY_ERROR_TYPE(InvalidStiffnessError);   // stiffness symmetries violated
TRAY_ERROR_TYPE(CoverageError);           // fan does not cover requested nodes
TRAY_ERROR_TYPE(InsufficientRowsError);   // certificate system is under-determined
TRAY_ERROR_TYPE(SymbolRegressionError);   // assembled symbol disagrees with product
TRAY_ERROR_TYPE(SolverError);             // iterative solve stagnated
TRAY_ERROR_TYPE(ScheduleError);           // layer schedule hit a non-convex level
TRAY_ERROR_TYPE(ConfigError);             // experiment config validation failure
TRAY_ERROR_TYPE(IoError);                 // file format / filesystem failure

#undef TRAY_ERROR_TYPE

using Rng = std::mt19937_64;

// FNV-1a: stable content hash used for run manifests.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline VectorXd random_unit_vector(int dim, Rng& rng) {
  std::normal_distribution<double> gauss;
  VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

// Deterministic directions on the unit sphere in R^dim: the two signs at
// dim = 1, a uniform circle at dim = 2, seeded quasi-random points beyond.
inline std::vector<VectorXd> uniform_sphere_directions(int dim, int count,
                                                       std::uint64_t seed = 9001ull) {
  std::vector<VectorXd> out;
  if (dim == 1) {
    VectorXd plus(1), minus(1);
    plus << 1.0;
    minus << -1.0;
    out = {plus, minus};
  } else if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * M_PI * k / count;
      VectorXd w(2);
      w << std::cos(th), std::sin(th);
      out.push_back(w);
    }
  } else {
    Rng rng(seed);
    for (int k = 0; k < count; ++k) out.push_back(random_unit_vector(dim, rng));
  }
  return out;
}

// Deterministic quasi-uniform points on S^2 (Fibonacci lattice); used for
// direction sweeps so reruns are bit-identical and no sample sits closer than
// 1/count to the xi = 0 ring.
inline VectorXd fibonacci_sphere_point(int k, int count) {
  const double z = 1.0 - (2.0 * k + 1.0) / count;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  VectorXd v(3);
  v << z, r * std::cos(golden * k), r * std::sin(golden * k);
  return v;
}

}  // namespace tray

#endif  // TRAY_COMMON_HPP

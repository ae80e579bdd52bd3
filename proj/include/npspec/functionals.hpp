#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "npspec/errors.hpp"
#include "npspec/grid.hpp"

namespace npspec {

// Weyl-law coefficients of the NP spectrum.
//   A_total = (3 W - 2 pi chi) / (128 pi)
//   A_plus, A_minus: angular integrals of the squared negative / positive part
//   of the normal-curvature form k1 cos^2 t + k2 sin^2 t.
struct WeylCoefficients {
  double A_total = 0.0;
  double A_plus = 0.0;
  double A_minus = 0.0;
  double willmore = 0.0;
  double euler_char = 0.0;
  int angular_resolution = 0;
};

inline constexpr int kDefaultAngularResolution = 64;

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }
inline double negative_part(double x) { return x < 0.0 ? -x : 0.0; }

inline double willmore_energy(const QuadratureGrid& grid) {
  return surface_integral(grid, [](const SurfaceFrame& f) {
    const double h = principal_curvatures(f).mean;
    return h * h;
  });
}

/// Unrounded Gauss-Bonnet value (1/2pi) * integral of K. Throws
/// TopologyWarning when it is farther than 1e-3 from an integer.
inline double euler_characteristic(const QuadratureGrid& grid) {
  const double total =
      surface_integral(grid, [](const SurfaceFrame& f) { return principal_curvatures(f).gauss; });
  const double chi = total / (2.0 * std::numbers::pi);
  if (std::abs(chi - std::round(chi)) > 1e-3) {
    std::ostringstream os;
    os.precision(10);
    os << "Gauss-Bonnet gives chi = " << chi << ", not near an integer; refine the grid";
    throw TopologyWarning(os.str());
  }
  return chi;
}

// Order -1 principal symbol of the NP operator in the frame's coordinates,
// for covector (xi1, xi2).
inline double principal_symbol(const SurfaceFrame& f, double xi1, double xi2) {
  if (xi1 == 0.0 && xi2 == 0.0) {
    throw DomainError("principal symbol needs a nonzero covector", "curvature-functionals");
  }
  const double det = f.metric_determinant();
  // g^{jk} = adj(g) / det
  const double dual_norm_sq = (f.G * xi1 * xi1 - 2.0 * f.F * xi1 * xi2 + f.E * xi2 * xi2) / det;
  const double form = f.L * xi2 * xi2 - 2.0 * f.M * xi1 * xi2 + f.N * xi1 * xi1;
  return -form / (4.0 * det * std::pow(dual_norm_sq, 1.5));
}

inline double weyl_coefficient_total(const QuadratureGrid& grid) {
  const double w = willmore_energy(grid);
  const double chi = euler_characteristic(grid);
  return (3.0 * w - 2.0 * std::numbers::pi * chi) / (128.0 * std::numbers::pi);
}

/// Signed coefficients. A_plus integrates the negative part of the curvature
/// form and A_minus the positive part; the angular integral uses an
/// n_theta-point periodic trapezoidal rule.
inline WeylCoefficients weyl_coefficients_signed(const QuadratureGrid& grid,
                                                 int n_theta = kDefaultAngularResolution) {
  if (n_theta < 16) {
    throw ConfigError("angular resolution must be >= 16", {}, "curvature-functionals");
  }
  std::vector<double> c2(n_theta), s2(n_theta);
  for (int t = 0; t < n_theta; ++t) {
    const double theta = 2.0 * std::numbers::pi * t / n_theta;
    c2[t] = std::cos(theta) * std::cos(theta);
    s2[t] = std::sin(theta) * std::sin(theta);
  }
  const double dtheta = 2.0 * std::numbers::pi / n_theta;
  const double prefactor = 1.0 / (128.0 * std::numbers::pi * std::numbers::pi);

  auto angular = [&](const SurfaceFrame& f, auto part) {
    const Curvatures k = principal_curvatures(f);
    CompensatedSum s;
    for (int t = 0; t < n_theta; ++t) {
      const double p = part(k.k1 * c2[t] + k.k2 * s2[t]);
      s += p * p;
    }
    return s.value() * dtheta;
  };

  WeylCoefficients out;
  out.angular_resolution = n_theta;
  out.A_plus = prefactor * surface_integral(grid, [&](const SurfaceFrame& f) {
                 return angular(f, negative_part);
               });
  out.A_minus = prefactor * surface_integral(grid, [&](const SurfaceFrame& f) {
                  return angular(f, positive_part);
                });
  out.willmore = willmore_energy(grid);
  out.euler_char = euler_characteristic(grid);
  out.A_total =
      (3.0 * out.willmore - 2.0 * std::numbers::pi * out.euler_char) / (128.0 * std::numbers::pi);
  return out;
}

}  // namespace npspec

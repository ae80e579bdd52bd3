#pragma once

#include <Eigen/Core>
#include <cmath>

namespace npspec {

using Vec3 = Eigen::Vector3d;

// Local differential geometry at one parameter point. The second fundamental
// form is taken against the outward normal, so a round sphere has both
// principal curvatures negative.
struct SurfaceFrame {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
  Vec3 xu = Vec3::Zero();
  Vec3 xv = Vec3::Zero();
  double E = 0.0, F = 0.0, G = 0.0;
  double L = 0.0, M = 0.0, N = 0.0;
  double area_element = 0.0;

  double metric_determinant() const { return E * G - F * F; }
};

struct Curvatures {
  double k1 = 0.0;  // larger principal curvature
  double k2 = 0.0;
  double mean = 0.0;
  double gauss = 0.0;
};

// Eigenvalues of the shape operator I^{-1} II, computed from its symmetric
// form in an orthonormal tangent basis (I = A^T A, P = A^{-T} II A^{-1}).
// The discriminant is a sum of squares, which keeps umbilic points accurate
// where sqrt(H^2 - K) would lose half the digits.
inline Curvatures principal_curvatures(const SurfaceFrame& f) {
  const double a = std::sqrt(f.E);
  const double b = f.F / a;
  const double c22 = std::sqrt(f.E * f.G - f.F * f.F) / a;
  const double p11 = f.L / (a * a);
  const double p12 = (f.M - b * p11 * a) / (a * c22);
  const double p22 = (f.N - 2.0 * b * (f.M / a) + b * b * p11) / (c22 * c22);
  const double mean = 0.5 * (p11 + p22);
  const double gauss = p11 * p22 - p12 * p12;
  const double disc = std::hypot(0.5 * (p11 - p22), p12);
  Curvatures c;
  c.k1 = mean + disc;
  c.k2 = mean - disc;
  c.mean = mean;
  c.gauss = gauss;
  return c;
}

}  // namespace npspec

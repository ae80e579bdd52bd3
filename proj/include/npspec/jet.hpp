#pragma once

#include <cmath>

namespace npspec {

// Second-order forward-mode jet in two variables (u, v). Carries the value,
// the gradient and the Hessian so chart maps written once as templates yield
// exact first and second partial derivatives.
struct Jet2 {
  double f = 0.0;
  double fu = 0.0, fv = 0.0;
  double fuu = 0.0, fuv = 0.0, fvv = 0.0;

  constexpr Jet2() = default;
  constexpr Jet2(double value) : f(value) {}  // NOLINT: constants promote implicitly
  constexpr Jet2(double value, double du, double dv, double duu, double duv, double dvv)
      : f(value), fu(du), fv(dv), fuu(duu), fuv(duv), fvv(dvv) {}

  static constexpr Jet2 variable_u(double u) { return {u, 1.0, 0.0, 0.0, 0.0, 0.0}; }
  static constexpr Jet2 variable_v(double v) { return {v, 0.0, 1.0, 0.0, 0.0, 0.0}; }
};

// Chain rule for a scalar function g with g(f), g'(f), g''(f) known.
constexpr Jet2 compose(const Jet2& a, double g, double g1, double g2) {
  return {g,
          g1 * a.fu,
          g1 * a.fv,
          g1 * a.fuu + g2 * a.fu * a.fu,
          g1 * a.fuv + g2 * a.fu * a.fv,
          g1 * a.fvv + g2 * a.fv * a.fv};
}

constexpr Jet2 operator+(const Jet2& a, const Jet2& b) {
  return {a.f + b.f, a.fu + b.fu, a.fv + b.fv, a.fuu + b.fuu, a.fuv + b.fuv, a.fvv + b.fvv};
}
constexpr Jet2 operator-(const Jet2& a, const Jet2& b) {
  return {a.f - b.f, a.fu - b.fu, a.fv - b.fv, a.fuu - b.fuu, a.fuv - b.fuv, a.fvv - b.fvv};
}
constexpr Jet2 operator-(const Jet2& a) { return {-a.f, -a.fu, -a.fv, -a.fuu, -a.fuv, -a.fvv}; }
constexpr Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.f * b.f,
          a.fu * b.f + a.f * b.fu,
          a.fv * b.f + a.f * b.fv,
          a.fuu * b.f + 2.0 * a.fu * b.fu + a.f * b.fuu,
          a.fuv * b.f + a.fu * b.fv + a.fv * b.fu + a.f * b.fuv,
          a.fvv * b.f + 2.0 * a.fv * b.fv + a.f * b.fvv};
}
constexpr Jet2 reciprocal(const Jet2& a) {
  const double r = 1.0 / a.f;
  return compose(a, r, -r * r, 2.0 * r * r * r);
}
constexpr Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }

constexpr Jet2 operator+(const Jet2& a, double b) { return a + Jet2(b); }
constexpr Jet2 operator+(double a, const Jet2& b) { return Jet2(a) + b; }
constexpr Jet2 operator-(const Jet2& a, double b) { return a - Jet2(b); }
constexpr Jet2 operator-(double a, const Jet2& b) { return Jet2(a) - b; }
constexpr Jet2 operator*(const Jet2& a, double b) {
  return {a.f * b, a.fu * b, a.fv * b, a.fuu * b, a.fuv * b, a.fvv * b};
}
constexpr Jet2 operator*(double a, const Jet2& b) { return b * a; }
constexpr Jet2 operator/(const Jet2& a, double b) { return a * (1.0 / b); }
constexpr Jet2 operator/(double a, const Jet2& b) { return a * reciprocal(b); }

inline Jet2 sin(const Jet2& a) {
  const double s = std::sin(a.f), c = std::cos(a.f);
  return compose(a, s, c, -s);
}
inline Jet2 cos(const Jet2& a) {
  const double s = std::sin(a.f), c = std::cos(a.f);
  return compose(a, c, -s, -c);
}
inline Jet2 sqrt(const Jet2& a) {
  const double r = std::sqrt(a.f);
  return compose(a, r, 0.5 / r, -0.25 / (r * a.f));
}

}  // namespace npspec

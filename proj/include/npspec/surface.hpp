#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "npspec/errors.hpp"
#include "npspec/frame.hpp"
#include "npspec/jet.hpp"

namespace npspec {

using JetPoint = std::array<Jet2, 3>;

// A single chart map (u, v) -> R^3. Implementations return the position and
// the second-order jet (exact partial derivatives up to order two).
class ChartMap {
 public:
  virtual ~ChartMap() = default;
  virtual Vec3 position(double u, double v) const = 0;
  virtual JetPoint jet(double u, double v) const = 0;
};

// Adapts a shape functor with a templated `operator()(T u, T v) -> array<T,3>`.
template <class Shape>
class AnalyticChart final : public ChartMap {
 public:
  explicit AnalyticChart(Shape shape) : shape_(std::move(shape)) {}

  Vec3 position(double u, double v) const override {
    const auto p = shape_(u, v);
    return {p[0], p[1], p[2]};
  }
  JetPoint jet(double u, double v) const override {
    return shape_(Jet2::variable_u(u), Jet2::variable_v(v));
  }

 private:
  Shape shape_;
};

// ---------------------------------------------------------------------------
// Catalog shapes. Polar charts use u = polar angle in (0, pi), v = azimuth.

struct EllipsoidShape {
  double a, b, c;
  template <class T>
  std::array<T, 3> operator()(T u, T v) const {
    using std::cos, std::sin;
    const T s = sin(u);
    return {a * s * cos(v), b * s * sin(v), c * cos(u)};
  }
};

// Torus of revolution about the z axis; u runs around the tube, v around the axis.
struct TorusShape {
  double major, minor;
  template <class T>
  std::array<T, 3> operator()(T u, T v) const {
    using std::cos, std::sin;
    const T rho = major + minor * cos(u);
    return {rho * cos(v), rho * sin(v), minor * sin(u)};
  }
};

// Cassini-oval body of revolution r(u) = c sqrt(cos 2u + sqrt(d - sin^2 2u)).
// Smooth for d > 1, with a waist at the equator.
struct PeanutShape {
  double c, d;
  template <class T>
  std::array<T, 3> operator()(T u, T v) const {
    using std::cos, std::sin, std::sqrt;
    const T s2 = sin(2.0 * u);
    const T r = c * sqrt(cos(2.0 * u) + sqrt(d - s2 * s2));
    const T s = sin(u);
    return {r * s * cos(v), r * s * sin(v), r * cos(u)};
  }
};

// x -> scale * R x + t applied to an inner chart.
class AffineChart final : public ChartMap {
 public:
  AffineChart(std::shared_ptr<const ChartMap> inner, double scale, Eigen::Matrix3d rotation,
              Vec3 translation)
      : inner_(std::move(inner)), scale_(scale), rotation_(rotation), translation_(translation) {}

  Vec3 position(double u, double v) const override {
    return scale_ * (rotation_ * inner_->position(u, v)) + translation_;
  }
  JetPoint jet(double u, double v) const override {
    const JetPoint p = inner_->jet(u, v);
    JetPoint out;
    for (int i = 0; i < 3; ++i) {
      Jet2 acc(translation_[i]);
      for (int k = 0; k < 3; ++k) acc = acc + (scale_ * rotation_(i, k)) * p[k];
      out[i] = acc;
    }
    return out;
  }

 private:
  std::shared_ptr<const ChartMap> inner_;
  double scale_;
  Eigen::Matrix3d rotation_;
  Vec3 translation_;
};

// Sphere inversion x -> c + rho^2 (x - c) / |x - c|^2 of an inner chart. The
// jet is propagated through the map, so derivatives stay exact.
class InversionChart final : public ChartMap {
 public:
  InversionChart(std::shared_ptr<const ChartMap> inner, Vec3 center, double radius)
      : inner_(std::move(inner)), center_(center), radius_(radius) {}

  Vec3 position(double u, double v) const override {
    const Vec3 p = inner_->position(u, v) - center_;
    return center_ + (radius_ * radius_ / p.squaredNorm()) * p;
  }
  JetPoint jet(double u, double v) const override {
    JetPoint p = inner_->jet(u, v);
    for (int i = 0; i < 3; ++i) p[i] = p[i] - center_[i];
    const Jet2 scale = (radius_ * radius_) / (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    JetPoint out;
    for (int i = 0; i < 3; ++i) out[i] = center_[i] + scale * p[i];
    return out;
  }

 private:
  std::shared_ptr<const ChartMap> inner_;
  Vec3 center_;
  double radius_;
};

// ---------------------------------------------------------------------------

enum class ParamKind {
  periodic,  // equispaced trapezoidal nodes
  polar,     // Gauss-Legendre interior nodes; endpoints are coordinate poles
};

enum class DerivativeMode { analytic, finite_difference };

// One chart covers one closed component of the surface.
struct Chart {
  std::shared_ptr<const ChartMap> map;
  double u_min = 0.0, u_max = std::numbers::pi;
  double v_min = 0.0, v_max = 2.0 * std::numbers::pi;
  ParamKind u_kind = ParamKind::polar;
  ParamKind v_kind = ParamKind::periodic;
  bool flip_normal = false;  // set by orientation check
};

struct DerivativeJet {
  Vec3 x, xu, xv, xuu, xuv, xvv;
};

class ParametricSurface {
 public:
  ParametricSurface() = default;

  ParametricSurface(std::string name, std::vector<Chart> charts,
                    DerivativeMode mode = DerivativeMode::analytic, double fd_step = 1e-5)
      : name_(std::move(name)), charts_(std::move(charts)), mode_(mode), fd_step_(fd_step) {
    if (charts_.empty()) throw ConfigError("surface needs at least one chart", {}, "surface-geometry");
    orient();
  }

  const std::string& name() const { return name_; }
  const std::vector<Chart>& charts() const { return charts_; }
  std::size_t chart_count() const { return charts_.size(); }
  DerivativeMode derivative_mode() const { return mode_; }
  double fd_step() const { return fd_step_; }

  // Same geometry, other derivative mode. Orientation is re-derived.
  ParametricSurface with_derivative_mode(DerivativeMode mode, double fd_step = 1e-5) const {
    std::vector<Chart> charts = charts_;
    for (auto& c : charts) c.flip_normal = false;
    return ParametricSurface(name_, std::move(charts), mode, fd_step);
  }

  Vec3 position(std::size_t chart, double u, double v) const {
    return charts_.at(chart).map->position(u, v);
  }

  // Partial derivatives up to order two in the configured mode. Central
  // differences use step h for first derivatives and sqrt(h)-scaled step for
  // second derivatives (see fd_second_step()).
  DerivativeJet derivatives(std::size_t chart, double u, double v) const {
    const ChartMap& m = *charts_.at(chart).map;
    DerivativeJet d;
    if (mode_ == DerivativeMode::analytic) {
      const JetPoint p = m.jet(u, v);
      for (int i = 0; i < 3; ++i) {
        d.x[i] = p[i].f;
        d.xu[i] = p[i].fu;
        d.xv[i] = p[i].fv;
        d.xuu[i] = p[i].fuu;
        d.xuv[i] = p[i].fuv;
        d.xvv[i] = p[i].fvv;
      }
      return d;
    }
    const double h = fd_step_;
    d.x = m.position(u, v);
    d.xu = (m.position(u + h, v) - m.position(u - h, v)) / (2.0 * h);
    d.xv = (m.position(u, v + h) - m.position(u, v - h)) / (2.0 * h);
    const double k = fd_second_step();
    d.xuu = (m.position(u + k, v) - 2.0 * d.x + m.position(u - k, v)) / (k * k);
    d.xvv = (m.position(u, v + k) - 2.0 * d.x + m.position(u, v - k)) / (k * k);
    d.xuv = (m.position(u + k, v + k) - m.position(u + k, v - k) - m.position(u - k, v + k) +
             m.position(u - k, v - k)) /
            (4.0 * k * k);
    return d;
  }

  // Rounding in a second difference grows like eps / k^2, so the second-order
  // step is the first-order step scaled by 10: 1e-4 for the default h = 1e-5.
  double fd_second_step() const { return 10.0 * fd_step_; }

  // Area-weighted centroid and maximal extent of a chart, from a coarse
  // midpoint-rule sampling.
  std::pair<Vec3, double> chart_extent(std::size_t chart, int nu = 24, int nv = 48) const {
    const Chart& c = charts_.at(chart);
    Vec3 centroid = Vec3::Zero();
    double area = 0.0;
    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(nu) * nv);
    for (int i = 0; i < nu; ++i) {
      const double u = c.u_min + (c.u_max - c.u_min) * (i + 0.5) / nu;
      for (int j = 0; j < nv; ++j) {
        const double v = c.v_min + (c.v_max - c.v_min) * (j + 0.5) / nv;
        const JetPoint p = c.map->jet(u, v);
        const Vec3 xu(p[0].fu, p[1].fu, p[2].fu), xv(p[0].fv, p[1].fv, p[2].fv);
        const Vec3 x(p[0].f, p[1].f, p[2].f);
        const double dA = xu.cross(xv).norm();
        centroid += dA * x;
        area += dA;
        pts.push_back(x);
      }
    }
    centroid /= area;
    double extent = 0.0;
    for (const auto& x : pts) extent = std::max(extent, (x - centroid).norm());
    return {centroid, extent};
  }

  // Largest chart extent; used as the length scale for tolerances.
  double length_scale() const {
    double s = 0.0;
    for (std::size_t c = 0; c < charts_.size(); ++c) s = std::max(s, chart_extent(c).second);
    return s;
  }

 private:
  // Outer-normal convention: at the sample farthest from the component
  // centroid, xu x xv must point away from the centroid; otherwise the chart's
  // normal is flipped.
  void orient() {
    for (std::size_t ci = 0; ci < charts_.size(); ++ci) {
      Chart& c = charts_[ci];
      const Vec3 centroid = chart_extent(ci).first;
      const int nu = 24, nv = 48;
      double best = -1.0;
      bool outward = true;
      for (int i = 0; i < nu; ++i) {
        const double u = c.u_min + (c.u_max - c.u_min) * (i + 0.5) / nu;
        for (int j = 0; j < nv; ++j) {
          const double v = c.v_min + (c.v_max - c.v_min) * (j + 0.5) / nv;
          const DerivativeJet d = derivatives(ci, u, v);
          const double dist = (d.x - centroid).norm();
          if (dist > best) {
            best = dist;
            outward = d.xu.cross(d.xv).dot(d.x - centroid) >= 0.0;
          }
        }
      }
      c.flip_normal = !outward;
    }
  }

  std::string name_;
  std::vector<Chart> charts_;
  DerivativeMode mode_ = DerivativeMode::analytic;
  double fd_step_ = 1e-5;
};

// ---------------------------------------------------------------------------

inline std::string describe_node(std::size_t chart, double u, double v) {
  std::ostringstream os;
  os.precision(17);
  os << "chart " << chart << " at (u=" << u << ", v=" << v << ")";
  return os.str();
}

inline SurfaceFrame frame_from_derivatives(const DerivativeJet& d, bool flip) {
  SurfaceFrame f;
  f.point = d.x;
  f.xu = d.xu;
  f.xv = d.xv;
  f.E = d.xu.dot(d.xu);
  f.F = d.xu.dot(d.xv);
  f.G = d.xv.dot(d.xv);
  Vec3 n = d.xu.cross(d.xv);
  const double len = n.norm();
  f.area_element = len;
  if (len > 0.0) n /= len;
  if (flip) n = -n;
  f.normal = n;
  f.L = d.xuu.dot(n);
  f.M = d.xuv.dot(n);
  f.N = d.xvv.dot(n);
  return f;
}

/// Frame at (u, v) of the given chart, with the outward normal and the second
/// fundamental form measured against it. Throws DegenerateChart when the first
/// fundamental form is not positive definite there.
inline SurfaceFrame evaluate_frame(const ParametricSurface& surface, double u, double v,
                                   std::size_t chart = 0) {
  const DerivativeJet d = surface.derivatives(chart, u, v);
  SurfaceFrame f = frame_from_derivatives(d, surface.charts()[chart].flip_normal);
  const double det = f.metric_determinant();
  if (!(det > 0.0) || !std::isfinite(det) || !(f.area_element > 0.0)) {
    throw DegenerateChart("EG - F^2 <= 0 at " + describe_node(chart, u, v));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Catalog.

inline Chart polar_chart(std::shared_ptr<const ChartMap> map) {
  Chart c;
  c.map = std::move(map);
  return c;
}

inline Chart torus_chart(std::shared_ptr<const ChartMap> map) {
  Chart c;
  c.map = std::move(map);
  c.u_min = 0.0;
  c.u_max = 2.0 * std::numbers::pi;
  c.u_kind = ParamKind::periodic;
  return c;
}

inline std::shared_ptr<const ChartMap> translated(std::shared_ptr<const ChartMap> m,
                                                  const Vec3& center) {
  if (center.isZero(0.0)) return m;
  return std::make_shared<AffineChart>(std::move(m), 1.0, Eigen::Matrix3d::Identity(), center);
}

inline ParametricSurface make_ellipsoid(double a, double b, double c,
                                        const Vec3& center = Vec3::Zero()) {
  if (!(a > 0.0 && b > 0.0 && c > 0.0)) {
    throw ConfigError("ellipsoid semi-axes must be positive", {}, "surface-geometry");
  }
  auto m = std::make_shared<AnalyticChart<EllipsoidShape>>(EllipsoidShape{a, b, c});
  return ParametricSurface("ellipsoid", {polar_chart(translated(m, center))});
}

inline ParametricSurface make_sphere(double r, const Vec3& center = Vec3::Zero()) {
  if (!(r > 0.0)) throw ConfigError("sphere radius must be positive", {}, "surface-geometry");
  auto s = make_ellipsoid(r, r, r, center);
  return ParametricSurface("sphere", s.charts());
}

// Spheroids are ellipsoids with a = b (equatorial) and polar semi-axis c.
inline ParametricSurface make_spheroid(double a, double c, const Vec3& center = Vec3::Zero()) {
  auto s = make_ellipsoid(a, a, c, center);
  return ParametricSurface(c < a ? "oblate_spheroid" : "prolate_spheroid", s.charts());
}

inline ParametricSurface make_torus(double major, double minor, const Vec3& center = Vec3::Zero()) {
  if (!(major > minor && minor > 0.0)) {
    throw ConfigError("torus requires R > r > 0", {}, "surface-geometry");
  }
  auto m = std::make_shared<AnalyticChart<TorusShape>>(TorusShape{major, minor});
  return ParametricSurface("torus", {torus_chart(translated(m, center))});
}

inline constexpr double kPeanutScale = 1.0;
inline constexpr double kPeanutShape = 1.1;

inline ParametricSurface make_peanut(double c = kPeanutScale, double d = kPeanutShape,
                                     const Vec3& center = Vec3::Zero()) {
  if (!(c > 0.0 && d > 1.0)) {
    throw ConfigError("peanut requires c > 0 and d > 1", {}, "surface-geometry");
  }
  auto m = std::make_shared<AnalyticChart<PeanutShape>>(PeanutShape{c, d});
  return ParametricSurface("peanut", {polar_chart(translated(m, center))});
}

/// Rigid motion plus uniform scaling: x -> scale * rotation * x + translation.
inline ParametricSurface transform(const ParametricSurface& s, double scale,
                                   const Eigen::Matrix3d& rotation, const Vec3& translation) {
  if (!(scale > 0.0)) throw ConfigError("scale must be positive", {}, "surface-geometry");
  std::vector<Chart> charts = s.charts();
  for (auto& c : charts) {
    c.map = std::make_shared<AffineChart>(c.map, scale, rotation, translation);
    c.flip_normal = false;
  }
  return ParametricSurface(s.name(), std::move(charts), s.derivative_mode(), s.fd_step());
}

/// Disjoint union of closed surfaces; one chart per component.
inline ParametricSurface combine(const std::vector<ParametricSurface>& parts) {
  if (parts.empty()) throw ConfigError("union needs at least one component", {}, "surface-geometry");
  std::vector<Chart> charts;
  std::string name = "union(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (auto c : parts[i].charts()) {
      c.flip_normal = false;
      charts.push_back(c);
    }
    name += (i ? "," : "") + parts[i].name();
  }
  name += ")";
  return ParametricSurface(name, std::move(charts), parts.front().derivative_mode(),
                           parts.front().fd_step());
}

/// Smallest distance from `p` to the surface: coarse sampling followed by
/// damped Newton on |x(u,v) - p|^2 from the best samples.
inline double distance_to_surface(const ParametricSurface& s, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t ci = 0; ci < s.chart_count(); ++ci) {
    const Chart& c = s.charts()[ci];
    const int nu = 64, nv = 128;
    // Keep a few starting points; the nearest sample may sit in a different
    // basin than the true minimum.
    std::vector<std::pair<double, std::pair<double, double>>> starts;
    for (int i = 0; i < nu; ++i) {
      const double u = c.u_min + (c.u_max - c.u_min) * (i + 0.5) / nu;
      for (int j = 0; j < nv; ++j) {
        const double v = c.v_min + (c.v_max - c.v_min) * (j + 0.5) / nv;
        starts.push_back({(c.map->position(u, v) - p).squaredNorm(), {u, v}});
      }
    }
    std::partial_sort(starts.begin(), starts.begin() + 8, starts.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
    for (int k = 0; k < 8; ++k) {
      auto [u, v] = starts[k].second;
      double val = starts[k].first;
      for (int it = 0; it < 50; ++it) {
        const JetPoint j = c.map->jet(u, v);
        Eigen::Vector2d g = Eigen::Vector2d::Zero();
        Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
        for (int i = 0; i < 3; ++i) {
          const double r = j[i].f - p[i];
          g[0] += 2.0 * r * j[i].fu;
          g[1] += 2.0 * r * j[i].fv;
          H(0, 0) += 2.0 * (j[i].fu * j[i].fu + r * j[i].fuu);
          H(0, 1) += 2.0 * (j[i].fu * j[i].fv + r * j[i].fuv);
          H(1, 1) += 2.0 * (j[i].fv * j[i].fv + r * j[i].fvv);
        }
        H(1, 0) = H(0, 1);
        Eigen::Vector2d step = H.ldlt().solve(-g);
        if (!step.allFinite() || g.dot(step) >= 0.0) step = -1e-2 * g;
        double t = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 30; ++ls) {
          const double un = u + t * step[0], vn = v + t * step[1];
          const double vn_val = (c.map->position(un, vn) - p).squaredNorm();
          if (vn_val < val) {
            u = un;
            v = vn;
            val = vn_val;
            improved = true;
            break;
          }
          t *= 0.5;
        }
        if (!improved) break;
      }
      best = std::min(best, std::sqrt(val));
    }
  }
  return best;
}

/// Image of `surface` under inversion in the sphere (center, radius). The
/// outward normal of the image body is re-derived from the orientation check.
inline ParametricSurface mobius_invert(const ParametricSurface& surface, const Vec3& center,
                                       double radius) {
  if (!(radius > 0.0)) throw ConfigError("inversion radius must be positive", {}, "surface-geometry");
  const double scale = surface.length_scale();
  if (distance_to_surface(surface, center) <= 1e-8 * scale) {
    std::ostringstream os;
    os.precision(17);
    os << "inversion center (" << center.x() << ", " << center.y() << ", " << center.z()
       << ") lies on the surface";
    throw SingularInversion(os.str());
  }
  std::vector<Chart> charts = surface.charts();
  for (auto& c : charts) {
    c.map = std::make_shared<InversionChart>(c.map, center, radius);
    c.flip_normal = false;
  }
  return ParametricSurface("inverted(" + surface.name() + ")", std::move(charts),
                           surface.derivative_mode(), surface.fd_step());
}

}  // namespace npspec

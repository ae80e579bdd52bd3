#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "npspec/errors.hpp"
#include "npspec/quadrature.hpp"
#include "npspec/surface.hpp"

namespace npspec {

// A node and the parameter cell it owns. Cells tile each chart's parameter
// domain; Gauss-Legendre cells are bounded by the cumulative weights.
struct GridNode {
  std::size_t chart = 0;
  double u = 0.0;
  double v = 0.0;
  double u_lo = 0.0, u_hi = 0.0;
  double v_lo = 0.0, v_hi = 0.0;
};

// Tensor-product quadrature on each chart. Weights include the area element,
// so sum(weights) approximates the surface area.
struct QuadratureGrid {
  std::uint64_t id = 0;
  ParametricSurface surface;
  int n_u = 0;
  int n_v = 0;
  std::vector<GridNode> nodes;
  std::vector<double> weights;
  std::vector<SurfaceFrame> frames;

  std::size_t size() const { return nodes.size(); }
};

namespace detail {
inline std::uint64_t next_grid_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

inline QuadratureRule rule_for(ParamKind kind, int n, double lo, double hi) {
  return kind == ParamKind::polar ? gauss_legendre(n, lo, hi) : periodic_trapezoid(n, lo, hi - lo);
}

// Cell boundaries: cumulative weights for Gauss-Legendre (each node lies in
// its own cell), midpoints for the periodic rule.
inline std::vector<double> cell_edges(ParamKind kind, const QuadratureRule& rule, double lo) {
  const std::size_t n = rule.nodes.size();
  std::vector<double> edges(n + 1);
  if (kind == ParamKind::polar) {
    edges[0] = lo;
    for (std::size_t i = 0; i < n; ++i) edges[i + 1] = edges[i] + rule.weights[i];
  } else {
    for (std::size_t i = 0; i <= n; ++i) edges[i] = lo + (static_cast<double>(i) - 0.5) * rule.weights[0];
  }
  return edges;
}
}  // namespace detail

/// Builds the grid: Gauss-Legendre in polar directions (poles never sampled),
/// periodic trapezoid otherwise. Requires n_u, n_v >= 4.
inline QuadratureGrid build_grid(const ParametricSurface& surface, int n_u, int n_v) {
  if (n_u < 4 || n_v < 4) {
    throw ConfigError("grid resolution must be at least 4x4, got " + std::to_string(n_u) + "x" +
                          std::to_string(n_v),
                      {}, "surface-geometry");
  }
  QuadratureGrid grid;
  grid.id = detail::next_grid_id();
  grid.surface = surface;
  grid.n_u = n_u;
  grid.n_v = n_v;
  const std::size_t total = surface.chart_count() * static_cast<std::size_t>(n_u) * n_v;
  grid.nodes.reserve(total);
  grid.weights.reserve(total);
  grid.frames.reserve(total);
  for (std::size_t ci = 0; ci < surface.chart_count(); ++ci) {
    const Chart& c = surface.charts()[ci];
    const QuadratureRule ru = detail::rule_for(c.u_kind, n_u, c.u_min, c.u_max);
    const QuadratureRule rv = detail::rule_for(c.v_kind, n_v, c.v_min, c.v_max);
    const std::vector<double> eu = detail::cell_edges(c.u_kind, ru, c.u_min);
    const std::vector<double> ev = detail::cell_edges(c.v_kind, rv, c.v_min);
    for (int i = 0; i < n_u; ++i) {
      for (int j = 0; j < n_v; ++j) {
        SurfaceFrame f = evaluate_frame(surface, ru.nodes[i], rv.nodes[j], ci);
        grid.nodes.push_back({ci, ru.nodes[i], rv.nodes[j], eu[i], eu[i + 1], ev[j], ev[j + 1]});
        grid.weights.push_back(ru.weights[i] * rv.weights[j] * f.area_element);
        grid.frames.push_back(std::move(f));
      }
    }
  }
  return grid;
}

/// Sum of f(frame_i) * w_i with compensated accumulation. A non-finite
/// integrand value raises NumericalError naming the node.
template <class Integrand>
double surface_integral(const QuadratureGrid& grid, Integrand&& f) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double value = f(grid.frames[i]);
    if (!std::isfinite(value)) {
      const GridNode& n = grid.nodes[i];
      throw NumericalError("non-finite integrand at node " + std::to_string(i) + " (" +
                               describe_node(n.chart, n.u, n.v) + ")",
                           "surface-geometry");
    }
    acc += value * grid.weights[i];
  }
  return acc.value();
}

inline double surface_area(const QuadratureGrid& grid) {
  return surface_integral(grid, [](const SurfaceFrame&) { return 1.0; });
}

}  // namespace npspec

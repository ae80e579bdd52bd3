#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "npspec/errors.hpp"
#include "npspec/grid.hpp"
#include "npspec/linalg.hpp"
#include "npspec/quadrature.hpp"

namespace npspec {

enum class Basis : std::uint32_t {
  nystrom = 0,      // acts on point values: A_ij = kernel(x_i, x_j) w_j
  weighted_l2 = 1,  // conjugated by diag(sqrt(w)): B_ij = kernel(x_i, x_j) sqrt(w_i w_j)
  symmetrized = 2,
};

enum class OperatorKind : std::uint32_t {
  double_layer = 0,
  single_layer = 1,
  symmetrized_np = 2,
};

inline const char* to_string(Basis b) {
  switch (b) {
    case Basis::nystrom: return "nystrom";
    case Basis::weighted_l2: return "weighted_l2";
    case Basis::symmetrized: return "symmetrized";
  }
  return "?";
}

struct DiscreteOperator {
  linalg::Matrix matrix;
  Basis basis = Basis::nystrom;
  OperatorKind kind = OperatorKind::double_layer;
  std::uint64_t grid_id = 0;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return matrix.rows(); }
};

struct SymmetrizationDiagnostics {
  double plemelj_residual = 0.0;
  double min_eig_negS = 0.0;
  double asymmetry_norm = 0.0;  // ||Kt - Kt^T|| / ||Kt|| before symmetric averaging
};

struct SymmetrizedOperator {
  linalg::Matrix matrix;
  SymmetrizationDiagnostics diagnostics;
  std::uint64_t grid_id = 0;
};

// Pairs closer than `radius` cell diameters are integrated over the source
// cell instead of sampled at its node. Without this, the strongly anisotropic
// cells next to the poles of a polar chart produce spurious oscillatory
// eigenvectors (and an indefinite single layer).
struct NearFieldOptions {
  bool enabled = true;
  double radius = 3.0;
  int max_points = 32;  // per direction, per source cell
};

namespace detail {

inline constexpr std::size_t kMinAssemblyNodes = 16;

inline void check_grid(const QuadratureGrid& grid) {
  if (grid.size() < kMinAssemblyNodes) {
    throw ConfigError("assembly needs at least " + std::to_string(kMinAssemblyNodes) +
                          " nodes, grid has " + std::to_string(grid.size()),
                      {}, "potential-assembly");
  }
}

[[noreturn]] inline void coincident(const QuadratureGrid& grid, std::size_t i, std::size_t j) {
  std::ostringstream os;
  os << "coincident nodes " << i << " and " << j << " ("
     << describe_node(grid.nodes[i].chart, grid.nodes[i].u, grid.nodes[i].v) << ", "
     << describe_node(grid.nodes[j].chart, grid.nodes[j].u, grid.nodes[j].v) << ")";
  throw GridError(os.str());
}

inline Eigen::VectorXd weights_of(const QuadratureGrid& grid) {
  return Eigen::Map<const Eigen::VectorXd>(grid.weights.data(),
                                           static_cast<Eigen::Index>(grid.weights.size()));
}

struct CellSample {
  Vec3 point;
  Vec3 normal;
  double weight;
};

// Gauss-Legendre sub-quadrature of source cells, cached per (cell, mu, mv).
class CellSampler {
 public:
  CellSampler(const QuadratureGrid& grid, const NearFieldOptions& opts) : grid_(grid), opts_(opts) {
    extent_u_.resize(grid.size());
    extent_v_.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const GridNode& n = grid.nodes[j];
      extent_u_[j] = grid.frames[j].xu.norm() * (n.u_hi - n.u_lo);
      extent_v_[j] = grid.frames[j].xv.norm() * (n.v_hi - n.v_lo);
    }
  }

  double diameter(std::size_t j) const { return std::hypot(extent_u_[j], extent_v_[j]); }

  bool is_near(std::size_t j, double r) const {
    return opts_.enabled && r < opts_.radius * diameter(j);
  }

  // Points per direction: enough that sub-cells are no larger than half the
  // distance to the target.
  int points_for(double extent, double dist) const {
    int m = 2;
    while (m < opts_.max_points && extent / m > 0.5 * dist) m *= 2;
    return m;
  }

  const std::vector<CellSample>& samples(std::size_t j, double r) {
    const double dist = std::max(r - 0.5 * diameter(j), 0.25 * r);
    const int mu = points_for(extent_u_[j], dist);
    const int mv = points_for(extent_v_[j], dist);
    const std::uint64_t key = (static_cast<std::uint64_t>(j) << 16) |
                              (static_cast<std::uint64_t>(mu) << 8) | static_cast<std::uint64_t>(mv);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const GridNode& n = grid_.nodes[j];
    const QuadratureRule gu = gauss_legendre(mu, n.u_lo, n.u_hi);
    const QuadratureRule gv = gauss_legendre(mv, n.v_lo, n.v_hi);
    const bool flip = grid_.surface.charts()[n.chart].flip_normal;
    std::vector<CellSample> out;
    out.reserve(static_cast<std::size_t>(mu) * mv);
    for (int a = 0; a < mu; ++a) {
      for (int b = 0; b < mv; ++b) {
        const DerivativeJet d = grid_.surface.derivatives(n.chart, gu.nodes[a], gv.nodes[b]);
        Vec3 nrm = d.xu.cross(d.xv);
        const double area = nrm.norm();
        nrm /= area;
        if (flip) nrm = -nrm;
        out.push_back({d.x, nrm, gu.weights[a] * gv.weights[b] * area});
      }
    }
    return cache_.emplace(key, std::move(out)).first->second;
  }

 private:
  const QuadratureGrid& grid_;
  NearFieldOptions opts_;
  std::vector<double> extent_u_, extent_v_;
  std::unordered_map<std::uint64_t, std::vector<CellSample>> cache_;
};

// Integral of 1/|y - x| over the tangent-plane parallelogram spanned by the
// node's parameter cell, x at the node. Exact: sum over the fan of triangles
// from x of h * (asinh(s_b / h) - asinh(s_a / h)).
inline double flat_cell_inverse_distance(const QuadratureGrid& grid, std::size_t i) {
  const GridNode& n = grid.nodes[i];
  const SurfaceFrame& f = grid.frames[i];
  const std::array<Vec3, 4> corners = {
      f.xu * (n.u_lo - n.u) + f.xv * (n.v_lo - n.v), f.xu * (n.u_hi - n.u) + f.xv * (n.v_lo - n.v),
      f.xu * (n.u_hi - n.u) + f.xv * (n.v_hi - n.v), f.xu * (n.u_lo - n.u) + f.xv * (n.v_hi - n.v)};
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Vec3& a = corners[k];
    const Vec3& b = corners[(k + 1) % 4];
    const Vec3 edge = b - a;
    const double len = edge.norm();
    if (len == 0.0) continue;
    const Vec3 t = edge / len;
    const double sa = a.dot(t);
    const double sb = b.dot(t);
    const double h = (a - sa * t).norm();
    if (h == 0.0) continue;
    total += h * std::abs(std::asinh(sb / h) - std::asinh(sa / h));
  }
  return total;
}

}  // namespace detail

/// Matrix of the NP operator
///   K[phi](x) = 1/(4 pi) int <y - x, n(y)> / |x - y|^3 phi(y) dS_y
/// acting on point values. Far pairs use the node rule, near pairs integrate
/// over the source cell, and the diagonal is fixed by the row-sum identity
/// K 1 = 1/2.
inline DiscreteOperator assemble_double_layer(const QuadratureGrid& grid,
                                              const NearFieldOptions& near = {}) {
  detail::check_grid(grid);
  const auto n = static_cast<Eigen::Index>(grid.size());
  DiscreteOperator op;
  op.kind = OperatorKind::double_layer;
  op.grid_id = grid.id;
  op.weights = detail::weights_of(grid);
  op.matrix.resize(n, n);
  detail::CellSampler sampler(grid, near);
  const double c = 1.0 / (4.0 * std::numbers::pi);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3& xi = grid.frames[i].point;
    CompensatedSum row;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const Vec3 d = grid.frames[j].point - xi;
      const double r2 = d.squaredNorm();
      if (r2 == 0.0) detail::coincident(grid, i, j);
      const double r = std::sqrt(r2);
      double kij;
      if (sampler.is_near(j, r)) {
        CompensatedSum acc;
        for (const auto& q : sampler.samples(j, r)) {
          const Vec3 dq = q.point - xi;
          const double rq2 = dq.squaredNorm();
          acc += dq.dot(q.normal) / (rq2 * std::sqrt(rq2)) * q.weight;
        }
        kij = c * acc.value();
      } else {
        kij = c * d.dot(grid.frames[j].normal) / (r2 * r) * grid.weights[j];
      }
      op.matrix(i, j) = kij;
      row += kij;
    }
    op.matrix(i, i) = 0.5 - row.value();
  }
  return op;
}

/// Matrix of S[phi](x) = -1/(4 pi) int |x - y|^{-1} phi(y) dS_y. Near pairs
/// are integrated over the source cell; the self term is the exact integral
/// over the node's cell flattened into the tangent plane.
inline DiscreteOperator assemble_single_layer(const QuadratureGrid& grid,
                                              const NearFieldOptions& near = {}) {
  detail::check_grid(grid);
  const auto n = static_cast<Eigen::Index>(grid.size());
  DiscreteOperator op;
  op.kind = OperatorKind::single_layer;
  op.grid_id = grid.id;
  op.weights = detail::weights_of(grid);
  op.matrix.resize(n, n);
  detail::CellSampler sampler(grid, near);
  const double c = -1.0 / (4.0 * std::numbers::pi);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3& xi = grid.frames[i].point;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) {
        op.matrix(i, i) = near.enabled
                              ? c * detail::flat_cell_inverse_distance(grid, i)
                              : -0.5 * std::sqrt(grid.weights[i] / std::numbers::pi);
        continue;
      }
      const double r = (grid.frames[j].point - xi).norm();
      if (r == 0.0) detail::coincident(grid, i, j);
      if (sampler.is_near(j, r)) {
        CompensatedSum acc;
        for (const auto& q : sampler.samples(j, r)) acc += q.weight / (q.point - xi).norm();
        op.matrix(i, j) = c * acc.value();
      } else {
        op.matrix(i, j) = c / r * grid.weights[j];
      }
    }
  }
  return op;
}

/// Similarity by diag(sqrt(w)): B = D^{1/2} A D^{-1/2}. Eigenvalues unchanged.
inline DiscreteOperator to_weighted_l2(const DiscreteOperator& op) {
  if (op.basis != Basis::nystrom) {
    throw ConfigError(std::string("operator is already in ") + to_string(op.basis) + " basis", {},
                      "potential-assembly");
  }
  DiscreteOperator out = op;
  out.basis = Basis::weighted_l2;
  const Eigen::VectorXd s = op.weights.cwiseSqrt();
  out.matrix = s.asDiagonal() * op.matrix * s.cwiseInverse().asDiagonal();
  return out;
}

namespace detail {
inline void require_pair(const DiscreteOperator& K, const DiscreteOperator& S) {
  if (K.basis != Basis::weighted_l2 || S.basis != Basis::weighted_l2) {
    throw ConfigError("operators must be in the weighted_l2 basis", {}, "potential-assembly");
  }
  if (K.grid_id != S.grid_id || K.size() != S.size()) {
    throw ConfigError("operators were assembled on different grids", {}, "potential-assembly");
  }
}
}  // namespace detail

/// ||S K^T - K S||_2 / (||K||_2 ||S||_2): discrete defect of the Calderon
/// identity, with 2-norms by power iteration.
inline double plemelj_residual(const DiscreteOperator& K, const DiscreteOperator& S) {
  detail::require_pair(K, S);
  linalg::Matrix defect = S.matrix * K.matrix.transpose();
  defect.noalias() -= K.matrix * S.matrix;
  return linalg::spectral_norm(defect) /
         (linalg::spectral_norm(K.matrix) * linalg::spectral_norm(S.matrix));
}

/// K_sym = (-S)^{-1/2} K (-S)^{1/2}, averaged with its transpose. The
/// relative asymmetry before averaging is recorded in the diagnostics.
inline SymmetrizedOperator symmetrize(const DiscreteOperator& K, const DiscreteOperator& S) {
  detail::require_pair(K, S);
  linalg::Matrix negS = -0.5 * (S.matrix + S.matrix.transpose());
  const linalg::SymmetricEigensystem eig = linalg::symmetric_eigensystem(std::move(negS));
  const double min_eig = eig.values.size() ? eig.values.minCoeff() : 0.0;
  if (!(min_eig > 0.0)) {
    std::ostringstream os;
    os.precision(6);
    os << "-S is not positive definite (min eigenvalue " << min_eig
       << "); grid too coarse or geometry invalid";
    throw NotPositiveDefinite(os.str());
  }
  const linalg::Matrix& Q = eig.vectors;
  const Eigen::VectorXd root = eig.values.cwiseSqrt();
  // Q^T K Q, then scale rows by Lambda^{-1/2} and columns by Lambda^{1/2}.
  linalg::Matrix inner = Q.transpose() * K.matrix * Q;
  inner = root.cwiseInverse().asDiagonal() * inner * root.asDiagonal();
  linalg::Matrix kt = Q * inner * Q.transpose();

  SymmetrizedOperator out;
  out.grid_id = K.grid_id;
  out.diagnostics.min_eig_negS = min_eig;
  const linalg::Matrix anti = kt - kt.transpose();
  const double kt_norm = linalg::spectral_norm(kt);
  out.diagnostics.asymmetry_norm = kt_norm > 0.0 ? linalg::spectral_norm(anti) / kt_norm : 0.0;
  out.diagnostics.plemelj_residual = plemelj_residual(K, S);
  out.matrix = 0.5 * (kt + kt.transpose());
  return out;
}

}  // namespace npspec

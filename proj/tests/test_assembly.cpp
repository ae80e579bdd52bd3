#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "catalog.hpp"
#include "npspec/assembly.hpp"
#include "npspec/linalg.hpp"
#include "npspec/spectrum.hpp"

using namespace npspec;
using npspec::testing::catalog;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> sorted(const linalg::Vector& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end());
  return out;
}

double max_sorted_gap(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// Closed form on the unit sphere: integral of 1/(4 pi |x - y|) over S^2 equals
// 1 for |x| = 1. Checked here by a 1D Gauss-Legendre quadrature in the polar
// angle about x: (1/2) int_0^pi sin t / (2 sin(t/2)) dt.
double sphere_single_layer_of_one() {
  const QuadratureRule r = gauss_legendre(40, 0.0, kPi);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double t = r.nodes[i];
    s += r.weights[i] * 0.5 * std::sin(t) / (2.0 * std::sin(t / 2.0));
  }
  return s;
}

}  // namespace

TEST(DoubleLayer, ConstantEigenpairOnEveryCatalogSurface) {
  for (const auto& entry : catalog()) {
    const QuadratureGrid g = build_grid(entry.surface, 12, 24);
    const DiscreteOperator K = assemble_double_layer(g);
    const Eigen::VectorXd r = K.matrix * Eigen::VectorXd::Ones(g.size());
    EXPECT_LT((r.array() - 0.5).abs().maxCoeff(), 1e-12) << entry.name;
    EXPECT_EQ(K.basis, Basis::nystrom);
    EXPECT_EQ(K.grid_id, g.id);
  }
}

TEST(DoubleLayer, TooFewNodesIsConfigError) {
  // Grids below 4x4 are rejected upstream; a hand-truncated grid reaches assembly.
  QuadratureGrid g = build_grid(make_sphere(1.0), 4, 4);
  g.nodes.resize(12);
  g.weights.resize(12);
  g.frames.resize(12);
  EXPECT_THROW(assemble_double_layer(g), ConfigError);
  EXPECT_THROW(assemble_single_layer(g), ConfigError);
}

TEST(DoubleLayer, CoincidentNodesAreGridError) {
  const ParametricSurface twice = combine({make_sphere(1.0), make_sphere(1.0)});
  const QuadratureGrid g = build_grid(twice, 8, 16);
  EXPECT_THROW(assemble_double_layer(g), GridError);
  EXPECT_THROW(assemble_single_layer(g), GridError);
}

TEST(DoubleLayer, TwoSpheresHaveBoundedCrossBlocks) {
  const ParametricSurface u = combine({make_sphere(1.0, Vec3(-2, 0, 0)), make_sphere(1.0, Vec3(2, 0, 0))});
  const QuadratureGrid g = build_grid(u, 8, 16);
  const DiscreteOperator K = assemble_double_layer(g);
  const Eigen::Index half = static_cast<Eigen::Index>(g.size() / 2);
  // Kernel |<y - x, n>| / (4 pi |x - y|^3) <= 1 / (4 pi d^2) with d = 2 between the bodies.
  for (Eigen::Index i = 0; i < half; ++i) {
    for (Eigen::Index j = half; j < 2 * half; ++j) {
      EXPECT_LE(std::abs(K.matrix(i, j)), g.weights[j] / (4 * kPi * 4.0) + 1e-15);
      EXPECT_LE(std::abs(K.matrix(j, i)), g.weights[i] / (4 * kPi * 4.0) + 1e-15);
    }
  }
}

TEST(DoubleLayer, SphereSecondClusterIsOneSixth) {
  // n = 2048 nodes.
  const QuadratureGrid g = build_grid(make_sphere(1.0), 32, 64);
  const NpSpectrum s = compute_np_spectrum(g, {.singular_values = false});
  EXPECT_NEAR(s.eigenvalues[0], 0.5, 1e-6);
  for (int i = 1; i <= 3; ++i) EXPECT_NEAR(s.eigenvalues[i], 1.0 / 6, 1e-3 / 6) << i;
  EXPECT_LT(s.eigenvalues[4], 0.15);
}

TEST(SingleLayer, SphereConstantModeMatchesOracle) {
  const double oracle = sphere_single_layer_of_one();
  EXPECT_NEAR(oracle, 1.0, 1e-14);
  double previous = 1e300;
  for (auto [nu, nv] : {std::pair{16, 32}, std::pair{32, 64}}) {
    const QuadratureGrid g = build_grid(make_sphere(1.0), nu, nv);
    const DiscreteOperator S = assemble_single_layer(g);
    const Eigen::VectorXd r = -S.matrix * Eigen::VectorXd::Ones(g.size());
    const double residual = (r.array() - oracle).abs().maxCoeff();
    EXPECT_LT(residual, 2e-3);
    EXPECT_LE(2.0 * residual, previous) << nu;  // at least 2x reduction
    previous = residual;
  }
}

TEST(SingleLayer, NegativeIsPositiveDefiniteOnCatalog) {
  for (const auto& entry : catalog()) {
    const QuadratureGrid g = build_grid(entry.surface, 16, 32);
    const DiscreteOperator S = to_weighted_l2(assemble_single_layer(g));
    const linalg::Matrix sym = -0.5 * (S.matrix + S.matrix.transpose());
    EXPECT_GT(linalg::symmetric_eigenvalues(sym)[0], 0.0) << entry.name;
  }
}

TEST(SingleLayer, PlainNystromWeightedFormIsSymmetric) {
  const QuadratureGrid g = build_grid(make_ellipsoid(2.0, 1.2, 1.0), 12, 24);
  const DiscreteOperator S = to_weighted_l2(assemble_single_layer(g, NearFieldOptions{.enabled = false}));
  EXPECT_LT((S.matrix - S.matrix.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  // Flat-disk self term.
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(S.matrix(i, i), -0.5 * std::sqrt(g.weights[i] / kPi), 1e-15);
  }
}

TEST(SingleLayer, NearFieldWeightedFormNearlySymmetric) {
  const QuadratureGrid g = build_grid(make_sphere(1.0), 16, 32);
  const DiscreteOperator S = to_weighted_l2(assemble_single_layer(g));
  const double rel = (S.matrix - S.matrix.transpose()).norm() / S.matrix.norm();
  EXPECT_LT(rel, 2e-2);
}

TEST(WeightedL2, SimilarityPreservesSpectrum) {
  const QuadratureGrid g = build_grid(make_ellipsoid(2.0, 1.2, 1.0), 8, 16);
  const DiscreteOperator K = assemble_double_layer(g);
  const DiscreteOperator B = to_weighted_l2(K);
  EXPECT_EQ(B.basis, Basis::weighted_l2);
  std::vector<double> a, b;
  for (auto z : linalg::general_eigenvalues(K.matrix)) a.push_back(z.real());
  for (auto z : linalg::general_eigenvalues(B.matrix)) b.push_back(z.real());
  EXPECT_LT(max_sorted_gap(a, b), 1e-10);
  EXPECT_THROW(to_weighted_l2(B), ConfigError);
}

TEST(Plemelj, RequiresMatchingGridsAndBasis) {
  const QuadratureGrid g1 = build_grid(make_sphere(1.0), 8, 16);
  const QuadratureGrid g2 = build_grid(make_sphere(1.0), 8, 16);
  const DiscreteOperator K = to_weighted_l2(assemble_double_layer(g1));
  const DiscreteOperator S2 = to_weighted_l2(assemble_single_layer(g2));
  EXPECT_THROW(plemelj_residual(K, S2), ConfigError);
  EXPECT_THROW(symmetrize(K, S2), ConfigError);
  EXPECT_THROW(plemelj_residual(assemble_double_layer(g1), assemble_single_layer(g1)), ConfigError);
}

TEST(Plemelj, SphereResidualSmallAndShrinking) {
  double previous = 1e300;
  for (auto [nu, nv] : {std::pair{12, 24}, std::pair{16, 32}, std::pair{24, 48}}) {
    const QuadratureGrid g = build_grid(make_sphere(1.0), nu, nv);
    const double r = plemelj_residual(to_weighted_l2(assemble_double_layer(g)),
                                      to_weighted_l2(assemble_single_layer(g)));
    EXPECT_LT(r, 5e-3);
    EXPECT_LT(r, previous);
    previous = r;
  }
  EXPECT_LT(previous, 1e-3);
}

TEST(Symmetrize, SphereCloseToIdentityMap) {
  const QuadratureGrid g = build_grid(make_sphere(1.0), 16, 32);
  const DiscreteOperator K = to_weighted_l2(assemble_double_layer(g));
  const SymmetrizedOperator sym = symmetrize(K, to_weighted_l2(assemble_single_layer(g)));
  EXPECT_EQ((sym.matrix - sym.matrix.transpose()).cwiseAbs().maxCoeff(), 0.0);
  std::vector<double> raw;
  for (auto z : linalg::general_eigenvalues(K.matrix)) raw.push_back(z.real());
  const std::vector<double> ev = sorted(linalg::symmetric_eigenvalues(sym.matrix));
  EXPECT_LT(max_sorted_gap(raw, ev), sym.diagnostics.asymmetry_norm);
  EXPECT_GT(sym.diagnostics.min_eig_negS, 0.0);
}

TEST(Symmetrize, EllipsoidMatchesRawEigenvalues) {
  const QuadratureGrid g = build_grid(make_ellipsoid(2.0, 1.2, 1.0), 16, 32);
  const NpSpectrum s = compute_np_spectrum(g, {.singular_values = false, .raw_eigenvalues = true});
  double gap = 0.0, imag = 0.0;
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
    gap = std::max(gap, std::abs(s.raw_eigenvalues[i].real() - s.eigenvalues[i]));
    imag = std::max(imag, std::abs(s.raw_eigenvalues[i].imag()));
  }
  EXPECT_LT(gap, std::max(s.diagnostics.asymmetry_norm, 1e-8));
  EXPECT_LT(imag, s.diagnostics.asymmetry_norm);
  // Spectrum inside (-1/2 - eps, 1/2 + eps] with eps < 5e-2.
  EXPECT_LT(s.eigenvalues.front(), 0.5 + 5e-2);
  EXPECT_GT(s.eigenvalues.back(), -0.5 - 5e-2);
  // The constant mode survives up to second order in the asymmetry.
  EXPECT_NEAR(s.eigenvalues.front(), 0.5, s.diagnostics.asymmetry_norm * s.diagnostics.asymmetry_norm);
}

TEST(Symmetrize, NonPositiveSingleLayerRejected) {
  const QuadratureGrid g = build_grid(make_sphere(1.0), 8, 16);
  const DiscreteOperator K = to_weighted_l2(assemble_double_layer(g));
  DiscreteOperator S = to_weighted_l2(assemble_single_layer(g));
  // Engineer a zero mode: remove the constant-like top component of -S.
  const linalg::SymmetricEigensystem es = linalg::symmetric_eigensystem(-0.5 * (S.matrix + S.matrix.transpose()));
  const Eigen::Index n = es.values.size();
  const Eigen::VectorXd q = es.vectors.col(n - 1);
  S.matrix = S.matrix + es.values[n - 1] * q * q.transpose();
  EXPECT_THROW(symmetrize(K, S), NotPositiveDefinite);
  DiscreteOperator flipped = to_weighted_l2(assemble_single_layer(g));
  flipped.matrix = -flipped.matrix;
  EXPECT_THROW(symmetrize(K, flipped), NotPositiveDefinite);
}

TEST(Symmetrize, ModuliEqualSingularValues) {
  const QuadratureGrid g = build_grid(make_torus(2.0, 1.0), 16, 16);
  const SymmetrizedOperator sym = symmetrize(to_weighted_l2(assemble_double_layer(g)),
                                             to_weighted_l2(assemble_single_layer(g)));
  std::vector<double> moduli;
  for (double x : sorted(linalg::symmetric_eigenvalues(sym.matrix))) moduli.push_back(std::abs(x));
  const linalg::Vector sv = linalg::singular_values(sym.matrix);
  EXPECT_LT(max_sorted_gap(moduli, std::vector<double>(sv.data(), sv.data() + sv.size())), 1e-10);
}

TEST(Assembly, TorusPlemeljResidualModerate) {
  const QuadratureGrid g = build_grid(make_torus(2.0, 1.0), 32, 32);
  const double r = plemelj_residual(to_weighted_l2(assemble_double_layer(g)),
                                    to_weighted_l2(assemble_single_layer(g)));
  EXPECT_LT(r, 1e-2);
}

TEST(Assembly, Deterministic) {
  const QuadratureGrid g = build_grid(make_peanut(), 8, 16);
  const DiscreteOperator a = assemble_double_layer(g), b = assemble_double_layer(g);
  EXPECT_EQ((a.matrix - b.matrix).cwiseAbs().maxCoeff(), 0.0);
  const DiscreteOperator c = assemble_single_layer(g), d = assemble_single_layer(g);
  EXPECT_EQ((c.matrix - d.matrix).cwiseAbs().maxCoeff(), 0.0);
}

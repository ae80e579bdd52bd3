// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "catalog.hpp"
#include "npspec/npspec.hpp"

using namespace npspec;
using npspec::testing::catalog;

namespace {

constexpr double kPi = std::numbers::pi;

// Tolerances.
constexpr double kClusterRelTol = 1e-2;
constexpr double kConstantModeTol = 1e-12;
constexpr double kIdentityTol = 1e-6;
constexpr double kEulerTol = 1e-6;
constexpr double kSphereFitRelTol = 0.10;
constexpr double kNegativeThreshold = 1e-3;
constexpr double kTorusMinusRelTol = 0.25;
constexpr double kMobiusRelTol = 1e-2;
constexpr double kMobiusMinusFloor = 1e-4;
constexpr double kRefinementSlack = 0.10;
constexpr double kModulusSingularTol = 1e-10;
constexpr double kPropertySuiteSeconds = 10.0;

const std::vector<std::pair<int, int>> kStudyResolutions = {{24, 24}, {32, 32}, {48, 48}};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// The 48x96 sphere run is shared by criteria 1 and 4.
const SpectrumReport& sphere_report() {
  static const SpectrumReport r = [] {
    const QuadratureGrid g = build_grid(make_sphere(1.0), 48, 96);
    const NpSpectrum sp = compute_np_spectrum(g, {.singular_values = false});
    return build_report(sp, weyl_coefficients_signed(g));
  }();
  return r;
}

Outcome sphere_clusters() {
  const auto t0 = std::chrono::steady_clock::now();
  const SpectrumReport& r = sphere_report();
  std::ostringstream d;
  bool ok = r.clusters.size() >= 4;
  for (int k = 0; k < 4 && k < static_cast<int>(r.clusters.size()); ++k) {
    const double expect = 1.0 / (2.0 * (2 * k + 1));
    const double rel = std::abs(r.clusters[k].value - expect) / expect;
    ok = ok && rel <= kClusterRelTol && r.clusters[k].multiplicity == 2 * k + 1;
    d << "k=" << k << " m=" << r.clusters[k].multiplicity << " rel=" << fmt("%.1e", rel) << " ";
  }
  d << "(" << fmt("%.0f", seconds_since(t0)) << " s)";
  return {ok, d.str()};
}

Outcome constant_eigenpair() {
  double worst = 0.0;
  for (const auto& e : catalog()) {
    const QuadratureGrid g = build_grid(e.surface, e.n_u / 2, e.n_v / 2);
    const DiscreteOperator K = assemble_double_layer(g);
    const Eigen::VectorXd r = K.matrix * Eigen::VectorXd::Ones(g.size());
    worst = std::max(worst, (r.array() - 0.5).abs().maxCoeff());
  }
  return {worst <= kConstantModeTol, "max |K1 - 1/2| = " + fmt("%.2e", worst)};
}

Outcome coefficient_identities() {
  double worst_split = 0.0, worst_chi = 0.0, worst_closed = 0.0;
  for (const auto& e : catalog()) {
    const WeylCoefficients c = weyl_coefficients_signed(build_grid(e.surface, e.n_u, e.n_v));
    worst_split = std::max(worst_split, std::abs(c.A_plus + c.A_minus - c.A_total));
    worst_chi = std::max(worst_chi, std::abs(c.euler_char - e.genus_chi));
    worst_closed = std::max(worst_closed,
                            std::abs(c.A_total - (3 * c.willmore - 2 * kPi * c.euler_char) / (128 * kPi)));
  }
  const bool ok = worst_split <= kIdentityTol && worst_chi <= kEulerTol && worst_closed == 0.0;
  return {ok, "split " + fmt("%.2e", worst_split) + ", chi " + fmt("%.2e", worst_chi) + ", closed form " +
                  fmt("%.1e", worst_closed)};
}

Outcome sphere_weyl() {
  const SpectrumReport& r = sphere_report();
  if (!r.fit.total) return {false, "no fit"};
  const double c = r.fit.total->c_hat;
  return {std::abs(c - 0.25) <= kSphereFitRelTol * 0.25,
          "C_total_hat = " + fmt("%.4f", c) + " over [" + std::to_string(r.fit.total->window.lo) + ", " +
              std::to_string(r.fit.total->window.hi) + "]"};
}

Outcome sign_structure() {
  struct Case {
    const char* name;
    ParametricSurface s;
    NegativeTrend trend;
    bool zero;  // count must be 0 everywhere
    bool nonzero;  // count must be positive
  };
  const std::vector<Case> cases = {
      {"sphere", make_sphere(1.0), NegativeTrend::bounded, true, false},
      {"prolate", make_spheroid(1.0, 2.0), NegativeTrend::bounded, true, false},
      {"oblate", make_spheroid(2.0, 1.0), NegativeTrend::bounded, false, true},
      {"torus", make_torus(2.0, 1.0), NegativeTrend::growing, false, false},
      {"peanut", make_peanut(), NegativeTrend::growing, false, false},
  };
  bool ok = true;
  std::ostringstream d;
  for (const auto& c : cases) {
    const NegativeStudy st = negative_count_study(c.s, kStudyResolutions, kNegativeThreshold);
    bool this_ok = st.trend == c.trend;
    d << c.name << " [";
    for (const auto& n : st.counts) {
      d << n.count << (&n == &st.counts.back() ? "" : ",");
      if (c.zero && n.count != 0) this_ok = false;
      if (c.nonzero && n.count == 0) this_ok = false;
    }
    d << "] " << to_string(st.trend) << "; ";
    ok = ok && this_ok;
  }
  return {ok, d.str()};
}

Outcome torus_minus() {
  const QuadratureGrid g = build_grid(make_torus(2.0, 1.0), 64, 64);
  const NpSpectrum sp = compute_np_spectrum(g, {.singular_values = false});
  const SpectrumReport r = build_report(sp, weyl_coefficients_signed(g));
  if (!r.fit.minus) return {false, "no fit of the negative sequence"};
  const double target = std::sqrt(r.predicted.A_minus);
  const double rel = std::abs(r.fit.minus->c_hat - target) / target;
  return {rel <= kTorusMinusRelTol, "C_minus_hat = " + fmt("%.4f", r.fit.minus->c_hat) + ", sqrt(A_minus) = " +
                                        fmt("%.4f", target) + ", rel " + fmt("%.3f", rel)};
}

Outcome mobius() {
  const ParametricSurface e = make_ellipsoid(2.0, 1.2, 1.0);
  const WeylCoefficients a = weyl_coefficients_signed(build_grid(e, 48, 96));
  const WeylCoefficients b =
      weyl_coefficients_signed(build_grid(mobius_invert(e, npspec::testing::kInversionCenter, 1.0), 48, 96));
  const double rel = std::abs(a.A_total - b.A_total) / a.A_total;
  const bool ok = rel <= kMobiusRelTol && a.A_minus == 0.0 && b.A_minus > kMobiusMinusFloor;
  return {ok, "A rel " + fmt("%.1e", rel) + ", A_minus " + fmt("%.1e", a.A_minus) + " -> " + fmt("%.2e", b.A_minus)};
}

Outcome refinement() {
  const ParametricSurface e = make_ellipsoid(2.0, 1.2, 1.0);
  bool ok = true;
  double prev_p = INFINITY, prev_a = INFINITY, worst_sv = 0.0;
  std::ostringstream d;
  for (const auto& [nu, nv] : {std::pair{16, 32}, {24, 48}, {32, 64}}) {
    const NpSpectrum sp = compute_np_spectrum(build_grid(e, nu, nv));
    const double p = sp.diagnostics.plemelj_residual;
    const double a = sp.diagnostics.asymmetry_norm;
    ok = ok && p <= prev_p * (1 + kRefinementSlack) && a <= prev_a * (1 + kRefinementSlack);
    prev_p = p;
    prev_a = a;
    // The symmetrized operator is symmetric, so its sorted moduli are its singular values.
    std::vector<double> mod;
    for (double x : sp.eigenvalues) mod.push_back(std::abs(x));
    std::sort(mod.begin(), mod.end(), std::greater<>());
    const QuadratureGrid g = build_grid(e, nu, nv);
    const SymmetrizedOperator sym =
        symmetrize(to_weighted_l2(assemble_double_layer(g)), to_weighted_l2(assemble_single_layer(g)));
    const linalg::Vector sv = linalg::singular_values(sym.matrix);
    for (std::size_t i = 0; i < mod.size(); ++i) worst_sv = std::max(worst_sv, std::abs(mod[i] - sv[i]));
    d << nu << "x" << nv << " plemelj " << fmt("%.2e", p) << " asym " << fmt("%.2e", a) << "; ";
  }
  ok = ok && worst_sv <= kModulusSingularTol;
  d << "|moduli - s| " << fmt("%.1e", worst_sv);
  return {ok, d.str()};
}

Outcome property_suites() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string cmd = std::string("\"") + NPSPEC_PROPERTIES_BIN + "\" > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  const double s = seconds_since(t0);
  return {rc == 0 && s < kPropertySuiteSeconds,
          "exit " + std::to_string(rc) + " in " + fmt("%.2f", s) + " s"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"sphere eigenvalue clusters and multiplicities", sphere_clusters},
      {"constant eigenpair on every catalog surface", constant_eigenpair},
      {"coefficient identities and Gauss-Bonnet", coefficient_identities},
      {"sphere Weyl fit end to end", sphere_weyl},
      {"sign structure under refinement", sign_structure},
      {"torus negative-branch asymptotics", torus_minus},
      {"Mobius invariance of the total coefficient", mobius},
      {"symmetrization diagnostics under refinement", refinement},
      {"solver-free property suites", property_suites},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}

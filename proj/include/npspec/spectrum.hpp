#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "npspec/assembly.hpp"
#include "npspec/errors.hpp"
#include "npspec/functionals.hpp"
#include "npspec/grid.hpp"
#include "npspec/linalg.hpp"

namespace npspec {

inline constexpr double kDefaultNoiseCutoff = 1e-10;
inline constexpr double kDefaultClusterTolerance = 5e-2;
inline constexpr double kPoleTolerance = 1e-12;
// The discrete constant mode reproduces 1/2 only up to discretization error
// after symmetrization; within this distance the top eigenvalue is treated as it.
inline constexpr double kTrivialEigenvalueTolerance = 1e-3;

struct SplitSpectrum {
  std::vector<double> plus;   // positive eigenvalues, descending
  std::vector<double> minus;  // moduli of negative eigenvalues, descending
};

/// Separates eigenvalues by sign; |lambda| < cutoff is treated as noise and dropped.
inline SplitSpectrum split_spectrum(std::span<const double> eigs, double cutoff) {
  if (cutoff < 0.0) throw ConfigError("noise cutoff must be >= 0", {}, "spectral-analysis");
  SplitSpectrum out;
  for (double x : eigs) {
    if (std::abs(x) < cutoff) continue;
    (x > 0.0 ? out.plus : out.minus).push_back(std::abs(x));
  }
  std::sort(out.plus.begin(), out.plus.end(), std::greater<>());
  std::sort(out.minus.begin(), out.minus.end(), std::greater<>());
  return out;
}

/// #{j : seq_j > level} for a descending sequence.
inline int counting_function(std::span<const double> seq, double level) {
  if (!(level > 0.0)) throw DomainError("counting level must be positive");
  const auto it = std::partition_point(seq.begin(), seq.end(), [&](double x) { return x > level; });
  return static_cast<int>(it - seq.begin());
}

struct Cluster {
  double value = 0.0;  // mean of members
  int multiplicity = 0;
};

// Greedy pass over a sorted sequence: a value joins the current cluster when
// it is within rel_tol (relative) of its predecessor.
inline std::vector<Cluster> cluster_multiplicities(std::span<const double> seq, double rel_tol) {
  std::vector<Cluster> out;
  double sum = 0.0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const bool joins = i > 0 && std::abs(seq[i] - seq[i - 1]) <=
                                    rel_tol * std::max(std::abs(seq[i]), std::abs(seq[i - 1]));
    if (!joins) {
      if (i > 0) out.back().value = sum / out.back().multiplicity;
      out.push_back({seq[i], 0});
      sum = 0.0;
    }
    sum += seq[i];
    ++out.back().multiplicity;
  }
  if (!out.empty()) out.back().value = sum / out.back().multiplicity;
  return out;
}

// 1-based inclusive index window into a descending sequence.
struct FitWindow {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

struct WeylFit {
  double c_hat = 0.0;           // median of lambda_j sqrt(j)
  double a_hat_counting = 0.0;  // median of lambda_j^2 n(lambda_j); estimates C^2
  FitWindow window;
};

namespace detail {
inline double median(std::vector<double> v) {
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  if (v.size() % 2 == 1) return v[m];
  const double upper = v[m];
  const double lower = *std::max_element(v.begin(), v.begin() + m);
  return 0.5 * (lower + upper);
}
}  // namespace detail

/// Fits lambda_j ~ C j^{-1/2} over the window. Indexing is 1-based into
/// `seq` as given; callers drop the trivial eigenvalue 1/2 beforehand.
inline WeylFit weyl_fit(std::span<const double> seq, FitWindow window) {
  if (window.lo < 1 || window.hi < window.lo || window.hi > seq.size()) {
    throw ConfigError("fit window [" + std::to_string(window.lo) + ", " +
                          std::to_string(window.hi) + "] outside 1.." + std::to_string(seq.size()),
                      {}, "spectral-analysis");
  }
  std::vector<double> scaled, counted;
  for (std::size_t j = window.lo; j <= window.hi; ++j) {
    const double lambda = seq[j - 1];
    scaled.push_back(lambda * std::sqrt(static_cast<double>(j)));
    counted.push_back(lambda > 0.0 ? lambda * lambda * counting_function(seq, lambda) : 0.0);
  }
  return {detail::median(std::move(scaled)), detail::median(std::move(counted)), window};
}

/// Plasmonic eigenvalue eps = 1 - 2 lambda / (lambda - 1/2).
inline double plasmon_map(double lambda) {
  if (std::abs(lambda - 0.5) <= kPoleTolerance) {
    throw PoleError("lambda = 1/2 (constant eigenfunction) has no plasmonic counterpart");
  }
  return 1.0 - 2.0 * lambda / (lambda - 0.5);
}

// ---------------------------------------------------------------------------
// Discrete NP spectrum of a grid.

struct SpectrumOptions {
  NearFieldOptions near_field;
  bool singular_values = true;    // L2 s-numbers of the weighted_l2 double layer
  bool raw_eigenvalues = false;   // nonsymmetric eigensolve of K, for cross-checking
  bool keep_matrices = false;     // retain K, S (Nystrom basis) and the symmetrized operator
};

struct OperatorSet {
  DiscreteOperator double_layer;
  DiscreteOperator single_layer;
  SymmetrizedOperator symmetrized;
};

struct NpSpectrum {
  std::vector<double> eigenvalues;      // symmetrized operator, descending
  std::vector<double> singular_values;  // descending; empty unless requested
  std::vector<std::complex<double>> raw_eigenvalues;  // of K, sorted by real part descending
  SymmetrizationDiagnostics diagnostics;
  std::size_t n_nodes = 0;
  std::optional<OperatorSet> operators;
};

inline NpSpectrum compute_np_spectrum(const QuadratureGrid& grid, const SpectrumOptions& opts = {}) {
  NpSpectrum out;
  out.n_nodes = grid.size();
  DiscreteOperator K_raw = assemble_double_layer(grid, opts.near_field);
  DiscreteOperator S_raw = assemble_single_layer(grid, opts.near_field);
  const DiscreteOperator K = to_weighted_l2(K_raw);
  const DiscreteOperator S = to_weighted_l2(S_raw);
  SymmetrizedOperator sym = symmetrize(K, S);
  out.diagnostics = sym.diagnostics;
  const linalg::Vector ev = linalg::symmetric_eigenvalues(sym.matrix);
  out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), std::greater<>());
  if (opts.singular_values) {
    const linalg::Vector sv = linalg::singular_values(K.matrix);
    out.singular_values.assign(sv.data(), sv.data() + sv.size());
  }
  if (opts.raw_eigenvalues) {
    out.raw_eigenvalues = linalg::general_eigenvalues(K.matrix);
    std::sort(out.raw_eigenvalues.begin(), out.raw_eigenvalues.end(),
              [](auto a, auto b) { return a.real() > b.real(); });
  }
  if (opts.keep_matrices) {
    out.operators = OperatorSet{std::move(K_raw), std::move(S_raw), std::move(sym)};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Negative-eigenvalue refinement study.

enum class NegativeTrend { bounded, growing, inconclusive };

inline const char* to_string(NegativeTrend t) {
  switch (t) {
    case NegativeTrend::bounded: return "BOUNDED";
    case NegativeTrend::growing: return "GROWING";
    case NegativeTrend::inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

struct NegativeCount {
  int n_u = 0, n_v = 0;
  std::size_t n_nodes = 0;
  int count = 0;
};

struct NegativeStudy {
  std::vector<NegativeCount> counts;
  NegativeTrend trend = NegativeTrend::inconclusive;
  double threshold = 0.0;
};

// BOUNDED: the two finest resolutions agree. GROWING: strictly increasing
// across all resolutions.
inline NegativeTrend classify_negative_counts(std::span<const int> counts) {
  if (counts.size() < 2) return NegativeTrend::inconclusive;
  if (counts[counts.size() - 1] == counts[counts.size() - 2]) return NegativeTrend::bounded;
  const bool increasing =
      std::adjacent_find(counts.begin(), counts.end(), [](int a, int b) { return b <= a; }) ==
      counts.end();
  return increasing ? NegativeTrend::growing : NegativeTrend::inconclusive;
}

inline NegativeStudy negative_count_study(const ParametricSurface& surface,
                                          const std::vector<std::pair<int, int>>& resolutions,
                                          double threshold, const NearFieldOptions& near = {}) {
  if (resolutions.size() < 3) {
    throw ConfigError("negative-count study needs at least 3 resolutions", {}, "spectral-analysis");
  }
  for (std::size_t i = 1; i < resolutions.size(); ++i) {
    const auto& a = resolutions[i - 1];
    const auto& b = resolutions[i];
    if (static_cast<long>(b.first) * b.second <= static_cast<long>(a.first) * a.second) {
      throw ConfigError("study resolutions must be strictly increasing", {}, "spectral-analysis");
    }
  }
  if (!(threshold > 0.0)) throw ConfigError("threshold must be positive", {}, "spectral-analysis");
  NegativeStudy study;
  study.threshold = threshold;
  std::vector<int> counts;
  SpectrumOptions opts;
  opts.near_field = near;
  opts.singular_values = false;
  for (const auto& [nu, nv] : resolutions) {
    const QuadratureGrid grid = build_grid(surface, nu, nv);
    const NpSpectrum spec = compute_np_spectrum(grid, opts);
    const int count = static_cast<int>(std::count_if(spec.eigenvalues.begin(), spec.eigenvalues.end(),
                                                     [&](double x) { return x < -threshold; }));
    study.counts.push_back({nu, nv, grid.size(), count});
    counts.push_back(count);
  }
  study.trend = classify_negative_counts(counts);
  return study;
}

// ---------------------------------------------------------------------------
// Report.

struct FitSummary {
  std::optional<WeylFit> plus;
  std::optional<WeylFit> minus;
  std::optional<WeylFit> total;
};

struct ReportDiagnostics {
  double asymmetry_norm = 0.0;
  double plemelj_residual = 0.0;
  double min_eig_negS = 0.0;
  std::size_t n_nodes = 0;
  // Largest |sorted raw eigenvalue of K - sorted symmetrized eigenvalue|, and
  // largest imaginary part of the raw eigenvalues; present when computed.
  std::optional<double> raw_eigenvalue_deviation;
  std::optional<double> raw_eigenvalue_max_imag;
};

struct SpectrumReport {
  std::vector<double> eigenvalues;  // signed, ordered by modulus descending
  std::vector<double> lambda_plus;
  std::vector<double> lambda_minus;
  std::vector<double> singular_values;
  std::vector<Cluster> clusters;  // of lambda_plus
  FitSummary fit;
  WeylCoefficients predicted;
  // eps for each entry of `eigenvalues`; empty for the trivial eigenvalue 1/2
  std::vector<std::optional<double>> plasmon;
  ReportDiagnostics diagnostics;
};

struct ReportOptions {
  std::optional<FitWindow> window;  // nullopt: [4, n_nodes / 8]
  double noise_cutoff = kDefaultNoiseCutoff;
  double cluster_tolerance = kDefaultClusterTolerance;
};

namespace detail {
// Auto windows are clamped to the available sequence; an empty result means
// no fit. Explicit windows are validated by weyl_fit itself.
inline std::optional<WeylFit> fit_sequence(std::span<const double> seq, FitWindow window,
                                           bool clamp) {
  if (clamp) {
    window.hi = std::min(window.hi, seq.size());
    if (window.lo < 1 || window.hi < window.lo) return std::nullopt;
  }
  return weyl_fit(seq, window);
}

inline std::span<const double> drop_trivial(std::span<const double> seq) {
  if (!seq.empty() && std::abs(seq.front() - 0.5) <= kTrivialEigenvalueTolerance) {
    return seq.subspan(1);
  }
  return seq;
}
}  // namespace detail

inline SpectrumReport build_report(const NpSpectrum& spectrum, const WeylCoefficients& predicted,
                                   const ReportOptions& opts = {}) {
  SpectrumReport r;
  r.predicted = predicted;
  r.eigenvalues = spectrum.eigenvalues;
  std::stable_sort(r.eigenvalues.begin(), r.eigenvalues.end(),
                   [](double a, double b) { return std::abs(a) > std::abs(b); });
  const SplitSpectrum split = split_spectrum(spectrum.eigenvalues, opts.noise_cutoff);
  r.lambda_plus = split.plus;
  r.lambda_minus = split.minus;
  r.singular_values = spectrum.singular_values;
  r.clusters = cluster_multiplicities(r.lambda_plus, opts.cluster_tolerance);

  std::vector<double> moduli;
  for (double x : spectrum.eigenvalues) {
    if (std::abs(x) >= opts.noise_cutoff) moduli.push_back(std::abs(x));
  }
  std::sort(moduli.begin(), moduli.end(), std::greater<>());

  const bool clamp = !opts.window.has_value();
  const FitWindow window = opts.window.value_or(FitWindow{4, spectrum.n_nodes / 8});
  r.fit.total = detail::fit_sequence(detail::drop_trivial(moduli), window, clamp);
  r.fit.plus = detail::fit_sequence(detail::drop_trivial(r.lambda_plus), window, true);
  r.fit.minus = detail::fit_sequence(r.lambda_minus, window, true);

  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
    const double x = r.eigenvalues[i];
    const bool trivial = i == 0 && std::abs(x - 0.5) <= kTrivialEigenvalueTolerance;
    if (trivial || std::abs(x - 0.5) <= kPoleTolerance) {
      r.plasmon.push_back(std::nullopt);
    } else {
      r.plasmon.push_back(plasmon_map(x));
    }
  }

  r.diagnostics.asymmetry_norm = spectrum.diagnostics.asymmetry_norm;
  r.diagnostics.plemelj_residual = spectrum.diagnostics.plemelj_residual;
  r.diagnostics.min_eig_negS = spectrum.diagnostics.min_eig_negS;
  r.diagnostics.n_nodes = spectrum.n_nodes;
  if (!spectrum.raw_eigenvalues.empty()) {
    double dev = 0.0, imag = 0.0;
    for (std::size_t i = 0; i < spectrum.raw_eigenvalues.size(); ++i) {
      dev = std::max(dev, std::abs(spectrum.raw_eigenvalues[i].real() - spectrum.eigenvalues[i]));
      imag = std::max(imag, std::abs(spectrum.raw_eigenvalues[i].imag()));
    }
    r.diagnostics.raw_eigenvalue_deviation = dev;
    r.diagnostics.raw_eigenvalue_max_imag = imag;
  }
  return r;
}

}  // namespace npspec

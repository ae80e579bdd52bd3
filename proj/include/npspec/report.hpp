#pragma once

// Pipeline orchestration and the on-disk artifacts: JSON report, eigenvalue
// CSV and the binary operator dump.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "npspec/config.hpp"
#include "npspec/errors.hpp"
#include "npspec/functionals.hpp"
#include "npspec/grid.hpp"
#include "npspec/spectrum.hpp"

namespace npspec {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kReportSchema = 1;
inline constexpr int kCsvSchema = 1;
inline constexpr std::uint32_t kDumpVersion = 1;

enum class PipelineMode { coefficients, spectrum, study };

struct PipelineResult {
  PipelineMode mode = PipelineMode::spectrum;
  Json config_echo;
  WeylCoefficients coefficients;
  double area = 0.0;
  std::optional<SpectrumReport> report;
  std::optional<NegativeStudy> study;
  std::optional<OperatorSet> operators;
};

/// Runs geometry and functionals, then (unless mode is coefficients) the
/// dense spectral pipeline or the negative-count study.
inline PipelineResult run_pipeline(const RunConfig& cfg, PipelineMode mode = PipelineMode::spectrum) {
  PipelineResult out;
  out.mode = mode;
  out.config_echo = cfg.echo();
  const QuadratureGrid grid = build_grid(cfg.surface, cfg.n_u, cfg.n_v);
  out.coefficients = weyl_coefficients_signed(grid, cfg.angular_resolution);
  out.area = surface_area(grid);

  if (mode == PipelineMode::spectrum) {
    SpectrumOptions opts;
    opts.near_field = cfg.near_field;
    opts.singular_values = cfg.singular_values;
    opts.raw_eigenvalues = cfg.raw_eigenvalues;
    opts.keep_matrices = cfg.outputs.matrix_dump.has_value();
    NpSpectrum spec = compute_np_spectrum(grid, opts);
    out.operators = std::move(spec.operators);
    ReportOptions ro;
    ro.window = cfg.fit_window;
    ro.noise_cutoff = cfg.noise_cutoff;
    ro.cluster_tolerance = cfg.cluster_tolerance;
    out.report = build_report(spec, out.coefficients, ro);
  } else if (mode == PipelineMode::study) {
    out.study = negative_count_study(cfg.surface, cfg.study_resolutions, cfg.negative_threshold,
                                     cfg.near_field);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_json(std::string& out, const Json& j, int indent, int depth) {
  const auto pad = [&](int d) { out.append(static_cast<std::size_t>(d * indent), ' '); };
  switch (j.type()) {
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",";
        if (!flat) {
          out += '\n';
          pad(depth + 1);
        }
        write_json(out, e, indent, depth + 1);
        first = false;
      }
      if (!flat) {
        out += '\n';
        pad(depth);
      }
      out += ']';
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        out += '\n';
        pad(depth + 1);
        out += Json(k).dump();
        out += ": ";
        write_json(out, v, indent, depth + 1);
        first = false;
      }
      out += '\n';
      pad(depth);
      out += '}';
      return;
    }
    default:
      out += j.dump();
  }
}

inline Json array_of(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

inline Json fit_json(const std::optional<WeylFit>& fit, double predicted_a) {
  Json j;
  j["predicted_C"] = std::sqrt(std::max(predicted_a, 0.0));
  if (fit) {
    j["C_hat"] = fit->c_hat;
    j["A_hat_counting"] = fit->a_hat_counting;
    j["window"] = Json::array({fit->window.lo, fit->window.hi});
  } else {
    j["C_hat"] = nullptr;
    j["A_hat_counting"] = nullptr;
    j["window"] = nullptr;
  }
  return j;
}

}  // namespace detail

/// Serializes with 17 significant digits and stable key order, so equal
/// inputs give byte-identical text.
inline std::string to_json_text(const Json& j) {
  std::string out;
  detail::write_json(out, j, 2, 0);
  out += '\n';
  return out;
}

inline Json coefficients_json(const WeylCoefficients& c, double area) {
  return {{"A_total", c.A_total},   {"A_plus", c.A_plus},
          {"A_minus", c.A_minus},   {"willmore", c.willmore},
          {"euler_characteristic", c.euler_char},
          {"angular_resolution", c.angular_resolution},
          {"area", area}};
}

inline Json report_json(const PipelineResult& r) {
  Json j;
  j["config_echo"] = r.config_echo;
  j["coefficients"] = coefficients_json(r.coefficients, r.area);
  if (r.report) {
    const SpectrumReport& s = *r.report;
    Json clusters = Json::array();
    for (const auto& c : s.clusters) clusters.push_back({{"value", c.value}, {"multiplicity", c.multiplicity}});
    j["spectrum"] = {{"n_nodes", s.diagnostics.n_nodes},
                     {"eigenvalues", detail::array_of(s.eigenvalues)},
                     {"lambda_plus", detail::array_of(s.lambda_plus)},
                     {"lambda_minus", detail::array_of(s.lambda_minus)},
                     {"singular_values", detail::array_of(s.singular_values)},
                     {"clusters", clusters}};
    j["fit"] = {{"total", detail::fit_json(s.fit.total, s.predicted.A_total)},
                {"plus", detail::fit_json(s.fit.plus, s.predicted.A_plus)},
                {"minus", detail::fit_json(s.fit.minus, s.predicted.A_minus)}};
    Json eps = Json::array();
    for (const auto& e : s.plasmon) {
      if (e) {
        eps.push_back(*e);
      } else {
        eps.push_back(nullptr);
      }
    }
    j["plasmon"] = eps;
    Json d = {{"asymmetry_norm", s.diagnostics.asymmetry_norm},
              {"plemelj_residual", s.diagnostics.plemelj_residual},
              {"min_eig_negS", s.diagnostics.min_eig_negS},
              {"n_nodes", s.diagnostics.n_nodes}};
    if (s.diagnostics.raw_eigenvalue_deviation) {
      d["raw_eigenvalue_deviation"] = *s.diagnostics.raw_eigenvalue_deviation;
      d["raw_eigenvalue_max_imag"] = *s.diagnostics.raw_eigenvalue_max_imag;
    }
    j["diagnostics"] = d;
  } else {
    j["spectrum"] = nullptr;
    j["fit"] = nullptr;
    j["plasmon"] = nullptr;
    j["diagnostics"] = nullptr;
  }
  if (r.study) {
    Json counts = Json::array();
    for (const auto& c : r.study->counts) {
      counts.push_back({{"resolution", Json::array({c.n_u, c.n_v})},
                        {"n_nodes", c.n_nodes},
                        {"count", c.count}});
    }
    j["negative_study"] = {{"threshold", r.study->threshold},
                           {"counts", counts},
                           {"trend", to_string(r.study->trend)}};
  }
  j["version"] = {{"npspec", kVersion}, {"report_schema", kReportSchema}};
  return j;
}

// ---------------------------------------------------------------------------
// CSV: one row per eigenvalue, ordered by modulus.

inline std::string eigen_csv_text(const SpectrumReport& s) {
  std::string out = "# npspec eigen-table v" + std::to_string(kCsvSchema) + "\n";
  out += "j,lambda,sign,mu_j,epsilon_j\n";
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
    const double x = s.eigenvalues[i];
    out += std::to_string(i + 1) + ',' + detail::format_double(x) + ',';
    out += x > 0.0 ? "1" : (x < 0.0 ? "-1" : "0");
    out += ',';
    if (i < s.singular_values.size()) out += detail::format_double(s.singular_values[i]);
    out += ',';
    if (i < s.plasmon.size() && s.plasmon[i]) out += detail::format_double(*s.plasmon[i]);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary operator dump. Each record: 32-byte header (magic "NPOP", u32
// format version, u32 basis tag, u32 operator tag, u64 n, u64 reserved),
// then n*n little-endian float64 in row-major order.

struct DumpRecord {
  std::uint32_t version = kDumpVersion;
  Basis basis = Basis::nystrom;
  OperatorKind kind = OperatorKind::double_layer;
  linalg::Matrix matrix;
};

namespace detail {

template <class T>
void put_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get_le(const char* p) {
  char buf[sizeof(T)];
  std::memcpy(buf, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

inline void append_record(std::string& out, const linalg::Matrix& m, Basis basis, OperatorKind kind) {
  out += "NPOP";
  put_le<std::uint32_t>(out, kDumpVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(basis));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(kind));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put_le<std::uint64_t>(out, 0);
  out.reserve(out.size() + static_cast<std::size_t>(m.size()) * 8);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(m(i, k)));
    }
  }
}

}  // namespace detail

inline std::string matrix_dump_bytes(const OperatorSet& ops) {
  std::string out;
  detail::append_record(out, ops.double_layer.matrix, ops.double_layer.basis, ops.double_layer.kind);
  detail::append_record(out, ops.single_layer.matrix, ops.single_layer.basis, ops.single_layer.kind);
  detail::append_record(out, ops.symmetrized.matrix, Basis::symmetrized, OperatorKind::symmetrized_np);
  return out;
}

inline std::vector<DumpRecord> read_matrix_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<DumpRecord> out;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 32 || bytes.compare(pos, 4, "NPOP") != 0) {
      throw IoError(path + ": bad record header at byte " + std::to_string(pos));
    }
    const char* h = bytes.data() + pos;
    DumpRecord rec;
    rec.version = detail::get_le<std::uint32_t>(h + 4);
    rec.basis = static_cast<Basis>(detail::get_le<std::uint32_t>(h + 8));
    rec.kind = static_cast<OperatorKind>(detail::get_le<std::uint32_t>(h + 12));
    const auto n = detail::get_le<std::uint64_t>(h + 16);
    pos += 32;
    if ((bytes.size() - pos) / 8 / std::max<std::uint64_t>(n, 1) < n) {
      throw IoError(path + ": truncated matrix payload");
    }
    rec.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::uint64_t i = 0; i < n; ++i) {
      for (std::uint64_t k = 0; k < n; ++k) {
        rec.matrix(i, k) = std::bit_cast<double>(detail::get_le<std::uint64_t>(bytes.data() + pos));
        pos += 8;
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output writing. Everything is staged to temporary files and renamed only
// once all artifacts were produced, so a failure leaves no partial output.

struct OutputFile {
  std::filesystem::path path;
  std::string contents;
};

inline void write_files_atomically(const std::vector<OutputFile>& files) {
  namespace fs = std::filesystem;
  std::vector<fs::path> staged;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& p : staged) fs::remove(p, ec);
  };
  for (const auto& f : files) {
    std::error_code ec;
    if (f.path.has_parent_path()) fs::create_directories(f.path.parent_path(), ec);
    fs::path tmp = f.path;
    tmp += ".partial";
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) {
      cleanup();
      throw IoError("cannot write " + tmp.string());
    }
    staged.push_back(tmp);
    os.write(f.contents.data(), static_cast<std::streamsize>(f.contents.size()));
    os.close();
    if (!os) {
      cleanup();
      throw IoError("failed writing " + tmp.string());
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::error_code ec;
    fs::rename(staged[i], files[i].path, ec);
    if (ec) {
      cleanup();
      throw IoError("cannot move output into place: " + files[i].path.string() + ": " + ec.message());
    }
  }
}

/// Artifacts requested by the config, resolved against `out_dir` when the
/// configured path is relative. With an output directory but no explicit
/// outputs, a report (and for spectra an eigenvalue table) is written there.
inline std::vector<OutputFile> collect_outputs(const PipelineResult& r, const OutputPaths& paths,
                                               const std::optional<std::filesystem::path>& out_dir) {
  namespace fs = std::filesystem;
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return out_dir && path.is_relative() ? *out_dir / path : path;
  };
  OutputPaths want = paths;
  if (out_dir && !want.report_json && !want.eigen_csv && !want.matrix_dump) {
    want.report_json = "report.json";
    if (r.report) want.eigen_csv = "eigenvalues.csv";
  }
  std::vector<OutputFile> files;
  if (want.report_json) files.push_back({resolve(*want.report_json), to_json_text(report_json(r))});
  if (want.eigen_csv && r.report) files.push_back({resolve(*want.eigen_csv), eigen_csv_text(*r.report)});
  if (want.matrix_dump && r.operators) {
    files.push_back({resolve(*want.matrix_dump), matrix_dump_bytes(*r.operators)});
  }
  return files;
}

inline void write_outputs(const PipelineResult& r, const OutputPaths& paths,
                          const std::optional<std::filesystem::path>& out_dir = std::nullopt) {
  write_files_atomically(collect_outputs(r, paths, out_dir));
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace npspec

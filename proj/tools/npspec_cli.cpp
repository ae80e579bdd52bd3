// npspec: command-line front end for the NP spectrum pipeline.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <regex>
#include <string>

#include "npspec/npspec.hpp"

namespace {

using namespace npspec;

constexpr std::size_t kPrintedRows = 20;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string fmt_opt(const std::optional<WeylFit>& f) { return f ? fmt(f->c_hat) : "n/a"; }

void print_coefficients(const PipelineResult& r) {
  const WeylCoefficients& c = r.coefficients;
  std::cout << "A           " << fmt(c.A_total) << '\n'
            << "A_plus      " << fmt(c.A_plus) << '\n'
            << "A_minus     " << fmt(c.A_minus) << '\n'
            << "willmore    " << fmt(c.willmore) << '\n'
            << "euler_char  " << fmt(c.euler_char) << '\n'
            << "area        " << fmt(r.area) << '\n';
}

void print_spectrum(const SpectrumReport& s) {
  std::cout << "nodes            " << s.diagnostics.n_nodes << '\n'
            << "n_plus           " << s.lambda_plus.size() << '\n'
            << "n_minus          " << s.lambda_minus.size() << '\n'
            << "asymmetry_norm   " << fmt(s.diagnostics.asymmetry_norm) << '\n'
            << "plemelj_residual " << fmt(s.diagnostics.plemelj_residual) << '\n'
            << "min_eig(-S)      " << fmt(s.diagnostics.min_eig_negS) << '\n';
  std::cout << "\nleading eigenvalues (by modulus)\n";
  for (std::size_t i = 0; i < std::min(kPrintedRows, s.eigenvalues.size()); ++i) {
    std::cout << "  " << i + 1 << "\t" << fmt(s.eigenvalues[i]) << '\n';
  }
  std::cout << "\nleading positive clusters\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(8, s.clusters.size()); ++i) {
    std::cout << "  " << fmt(s.clusters[i].value) << "  x" << s.clusters[i].multiplicity << '\n';
  }
}

void print_weyl(const SpectrumReport& s) {
  auto row = [](const char* name, double a, const std::optional<WeylFit>& f) {
    std::printf("%-9s %-13s %-13s\n", name, fmt(std::sqrt(std::max(a, 0.0))).c_str(),
                fmt_opt(f).c_str());
  };
  std::printf("%-9s %-13s %-13s\n", "", "predicted", "fitted");
  row("C_total", s.predicted.A_total, s.fit.total);
  row("C_plus", s.predicted.A_plus, s.fit.plus);
  row("C_minus", s.predicted.A_minus, s.fit.minus);
  if (s.fit.total) {
    std::cout << "window    [" << s.fit.total->window.lo << ", " << s.fit.total->window.hi << "]\n";
  }
}

void print_plasmon(const SpectrumReport& s) {
  std::printf("%-6s %-14s %-14s\n", "j", "lambda", "epsilon");
  for (std::size_t i = 0; i < std::min(kPrintedRows, s.eigenvalues.size()); ++i) {
    const auto& e = s.plasmon[i];
    std::printf("%-6zu %-14s %-14s\n", i + 1, fmt(s.eigenvalues[i]).c_str(),
                e ? fmt(*e).c_str() : "(constant)");
  }
}

void print_study(const NegativeStudy& st) {
  std::printf("%-12s %-8s %-8s\n", "resolution", "nodes", "count");
  for (const auto& c : st.counts) {
    const std::string res = std::to_string(c.n_u) + "x" + std::to_string(c.n_v);
    std::printf("%-12s %-8zu %-8d\n", res.c_str(), c.n_nodes, c.count);
  }
  std::cout << "threshold " << fmt(st.threshold) << "\ntrend     " << to_string(st.trend) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neumann-Poincare spectra of closed surfaces and their Weyl asymptotics", "npspec"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string resolution;
  const struct {
    const char* name;
    const char* help;
  } commands[] = {
      {"coefficients", "Curvature functionals and predicted Weyl coefficients (no solver)"},
      {"spectrum", "Full pipeline: assemble, symmetrize, eigensolve, report"},
      {"weyl-check", "Spectrum plus predicted vs fitted Weyl constants"},
      {"plasmon", "Spectrum plus plasmonic eigenvalue table"},
      {"study-negatives", "Negative eigenvalue counts across resolutions"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Directory for report.json and other artifacts");
    sub->add_option("--resolution", resolution, "Grid resolution override, NxM");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return static_cast<int>(ExitCode::usage);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = load_config(config_path);
    if (!resolution.empty()) {
      std::smatch m;
      if (!std::regex_match(resolution, m, std::regex(R"((\d+)[xX](\d+))"))) {
        throw ConfigError("expected NxM, got '" + resolution + "'", "/resolution");
      }
      cfg.n_u = std::stoi(m[1]);
      cfg.n_v = std::stoi(m[2]);
    }
    const PipelineMode mode = command == "coefficients"      ? PipelineMode::coefficients
                              : command == "study-negatives" ? PipelineMode::study
                                                             : PipelineMode::spectrum;
    const PipelineResult result = run_pipeline(cfg, mode);
    write_outputs(result, cfg.outputs,
                  out_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(out_dir));

    if (command == "coefficients") {
      print_coefficients(result);
    } else if (command == "spectrum") {
      print_spectrum(*result.report);
    } else if (command == "weyl-check") {
      print_weyl(*result.report);
    } else if (command == "plasmon") {
      print_plasmon(*result.report);
    } else {
      print_study(*result.study);
    }
    return static_cast<int>(ExitCode::ok);
  } catch (const Error& e) {
    std::cerr << "npspec: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "npspec: " << e.what() << '\n';
    return static_cast<int>(ExitCode::numerical);
  }
}

#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "npspec/assembly.hpp"
#include "npspec/errors.hpp"
#include "npspec/functionals.hpp"
#include "npspec/spectrum.hpp"
#include "npspec/surface.hpp"

namespace npspec {

using Json = nlohmann::ordered_json;

struct OutputPaths {
  std::optional<std::string> report_json;
  std::optional<std::string> eigen_csv;
  std::optional<std::string> matrix_dump;
};

struct RunConfig {
  Json surface_spec;  // normalized surface description, echoed into reports
  ParametricSurface surface;
  int n_u = 0;
  int n_v = 0;
  int angular_resolution = kDefaultAngularResolution;
  std::optional<FitWindow> fit_window;  // nullopt: auto
  double noise_cutoff = kDefaultNoiseCutoff;
  double cluster_tolerance = kDefaultClusterTolerance;
  double negative_threshold = 1e-3;
  std::vector<std::pair<int, int>> study_resolutions = {{24, 24}, {32, 32}, {48, 48}};
  NearFieldOptions near_field;
  bool singular_values = true;
  bool raw_eigenvalues = false;
  DerivativeMode derivative_mode = DerivativeMode::analytic;
  double fd_step = 1e-5;
  OutputPaths outputs;

  // Normalized configuration with every default filled in.
  Json echo() const;
};

inline const std::vector<std::string>& surface_catalog() {
  static const std::vector<std::string> names = {
      "sphere", "ellipsoid", "oblate_spheroid", "prolate_spheroid", "torus", "peanut", "union"};
  return names;
}

namespace detail {

inline std::string catalog_list() {
  std::string s;
  for (const auto& n : surface_catalog()) s += (s.empty() ? "" : ", ") + n;
  return s + " (or an {\"invert\": {center, radius, inner}} wrapper)";
}

class ConfigReader {
 public:
  ConfigReader(const Json& node, std::string pointer) : node_(node), pointer_(std::move(pointer)) {
    if (!node_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(what, where()); }
  [[noreturn]] void fail_at(const std::string& key, const std::string& what) const {
    throw ConfigError(what, pointer_ + "/" + key);
  }
  std::string where() const { return pointer_.empty() ? "/" : pointer_; }
  std::string child(const std::string& key) const { return pointer_ + "/" + key; }

  bool has(const std::string& key) const { return node_.contains(key); }
  const Json& at(const std::string& key) const { return node_.at(key); }

  double number(const std::string& key) const {
    if (!has(key)) fail_at(key, "missing required parameter");
    return as_number(key);
  }
  double number_or(const std::string& key, double fallback) const {
    return has(key) ? as_number(key) : fallback;
  }
  double positive(const std::string& key) const {
    const double x = number(key);
    if (!(x > 0.0)) fail_at(key, "must be strictly positive");
    return x;
  }
  double positive_or(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return positive(key);
  }
  int integer_or(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const Json& v = at(key);
    if (!v.is_number_integer()) fail_at(key, "expected an integer");
    return v.get<int>();
  }
  bool boolean_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_boolean()) fail_at(key, "expected a boolean");
    return at(key).get<bool>();
  }
  std::optional<std::string> string_opt(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    if (!at(key).is_string()) fail_at(key, "expected a string");
    return at(key).get<std::string>();
  }
  Vec3 vec3_or(const std::string& key, const Vec3& fallback) const {
    if (!has(key)) return fallback;
    const Json& v = at(key);
    if (!v.is_array() || v.size() != 3) fail_at(key, "expected an array of 3 numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number()) throw ConfigError("expected a number", child(key) + "/" + std::to_string(i));
      out[i] = v[i].get<double>();
    }
    return out;
  }
  void only(std::initializer_list<const char*> allowed) const {
    for (const auto& [key, value] : node_.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) {
        std::string list;
        for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
        fail_at(key, "unknown key; allowed: " + list);
      }
    }
  }

 private:
  double as_number(const std::string& key) const {
    const Json& v = at(key);
    if (!v.is_number()) fail_at(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail_at(key, "must be finite");
    return x;
  }

  const Json& node_;
  std::string pointer_;
};

inline Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

// Parses one surface node. Returns the surface and its normalized description.
inline std::pair<ParametricSurface, Json> parse_surface(const Json& node, const std::string& ptr) {
  ConfigReader rd(node, ptr);
  if (rd.has("invert")) {
    rd.only({"invert"});
    ConfigReader inv(rd.at("invert"), rd.child("invert"));
    inv.only({"center", "radius", "inner"});
    if (!inv.has("center")) inv.fail_at("center", "missing required parameter");
    if (!inv.has("inner")) inv.fail_at("inner", "missing required parameter");
    const Vec3 center = inv.vec3_or("center", Vec3::Zero());
    const double radius = inv.positive("radius");
    auto [inner, inner_json] = parse_surface(inv.at("inner"), inv.child("inner"));
    Json echo = {{"invert", {{"center", vec_json(center)}, {"radius", radius}, {"inner", inner_json}}}};
    return {mobius_invert(inner, center, radius), echo};
  }
  const auto name_opt = rd.string_opt("name");
  if (!name_opt) rd.fail_at("name", "missing surface name; catalog: " + catalog_list());
  const std::string& name = *name_opt;
  const Vec3 center = rd.vec3_or("center", Vec3::Zero());
  Json echo = {{"name", name}};
  auto finish = [&](ParametricSurface s) {
    echo["center"] = vec_json(center);
    return std::pair{std::move(s), echo};
  };

  if (name == "sphere") {
    rd.only({"name", "r", "center"});
    const double r = rd.positive("r");
    echo["r"] = r;
    return finish(make_sphere(r, center));
  }
  if (name == "ellipsoid") {
    rd.only({"name", "a", "b", "c", "center"});
    const double a = rd.positive("a"), b = rd.positive("b"), c = rd.positive("c");
    echo["a"] = a;
    echo["b"] = b;
    echo["c"] = c;
    return finish(make_ellipsoid(a, b, c, center));
  }
  if (name == "oblate_spheroid" || name == "prolate_spheroid") {
    rd.only({"name", "a", "c", "center"});
    const double a = rd.positive("a"), c = rd.positive("c");
    if (name == "oblate_spheroid" && !(c < a)) rd.fail_at("c", "oblate spheroid requires c < a");
    if (name == "prolate_spheroid" && !(c > a)) rd.fail_at("c", "prolate spheroid requires c > a");
    echo["a"] = a;
    echo["c"] = c;
    return finish(make_spheroid(a, c, center));
  }
  if (name == "torus") {
    rd.only({"name", "R", "r", "center"});
    const double R = rd.positive("R"), r = rd.positive("r");
    if (!(R > r)) rd.fail_at("R", "torus requires R > r > 0");
    echo["R"] = R;
    echo["r"] = r;
    return finish(make_torus(R, r, center));
  }
  if (name == "peanut") {
    rd.only({"name", "c", "d", "center"});
    const double c = rd.positive_or("c", kPeanutScale);
    const double d = rd.number_or("d", kPeanutShape);
    if (!(d > 1.0)) rd.fail_at("d", "peanut requires d > 1");
    echo["c"] = c;
    echo["d"] = d;
    return finish(make_peanut(c, d, center));
  }
  if (name == "union") {
    rd.only({"name", "components"});
    if (!rd.has("components") || !rd.at("components").is_array() || rd.at("components").empty()) {
      rd.fail_at("components", "expected a nonempty array of surfaces");
    }
    std::vector<ParametricSurface> parts;
    Json comps = Json::array();
    const Json& arr = rd.at("components");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      auto [s, j] = parse_surface(arr[i], rd.child("components") + "/" + std::to_string(i));
      parts.push_back(std::move(s));
      comps.push_back(std::move(j));
    }
    return {combine(parts), Json{{"name", "union"}, {"components", comps}}};
  }
  rd.fail_at("name", "unknown surface '" + name + "'; catalog: " + catalog_list());
}

inline std::pair<int, int> parse_resolution(const Json& v, const std::string& ptr) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
    throw ConfigError("expected [n_u, n_v] integers", ptr);
  }
  const int nu = v[0].get<int>(), nv = v[1].get<int>();
  if (nu < 4 || nv < 4) throw ConfigError("resolution must be at least 4x4", ptr);
  return {nu, nv};
}

}  // namespace detail

/// Default grid resolution: 48x96 when the first chart has a polar direction
/// (sphere-type), 64x64 for doubly periodic charts (torus-type).
inline std::pair<int, int> default_resolution(const ParametricSurface& s) {
  const Chart& c = s.charts().front();
  if (c.u_kind == ParamKind::polar || c.v_kind == ParamKind::polar) return {48, 96};
  return {64, 64};
}

/// Parses and validates a JSON run configuration. Violations raise
/// ConfigError carrying a JSON pointer to the offending field.
inline RunConfig parse_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what(), "");
  }
  detail::ConfigReader rd(doc, "");
  rd.only({"surface", "resolution", "angular_resolution", "fit_window", "noise_cutoff",
           "cluster_tolerance", "negative_threshold", "study_resolutions", "near_field",
           "diagnostics", "derivatives", "outputs"});
  if (!rd.has("surface")) rd.fail_at("surface", "missing required surface description");

  RunConfig cfg;
  if (rd.has("derivatives")) {
    detail::ConfigReader d(rd.at("derivatives"), "/derivatives");
    d.only({"mode", "step"});
    const std::string mode = d.string_opt("mode").value_or("analytic");
    if (mode == "analytic") {
      cfg.derivative_mode = DerivativeMode::analytic;
    } else if (mode == "finite_difference") {
      cfg.derivative_mode = DerivativeMode::finite_difference;
    } else {
      d.fail_at("mode", "expected \"analytic\" or \"finite_difference\"");
    }
    cfg.fd_step = d.positive_or("step", cfg.fd_step);
  }

  auto [surface, surface_json] = detail::parse_surface(rd.at("surface"), "/surface");
  cfg.surface = cfg.derivative_mode == DerivativeMode::analytic
                    ? std::move(surface)
                    : surface.with_derivative_mode(cfg.derivative_mode, cfg.fd_step);
  cfg.surface_spec = std::move(surface_json);

  std::tie(cfg.n_u, cfg.n_v) = rd.has("resolution")
                                   ? detail::parse_resolution(rd.at("resolution"), "/resolution")
                                   : default_resolution(cfg.surface);
  cfg.angular_resolution = rd.integer_or("angular_resolution", kDefaultAngularResolution);
  if (cfg.angular_resolution < 16) rd.fail_at("angular_resolution", "must be >= 16");

  if (rd.has("fit_window")) {
    const Json& w = rd.at("fit_window");
    if (w.is_string() && w.get<std::string>() == "auto") {
      cfg.fit_window.reset();
    } else if (w.is_array() && w.size() == 2 && w[0].is_number_unsigned() &&
               w[1].is_number_unsigned()) {
      const FitWindow fw{w[0].get<std::size_t>(), w[1].get<std::size_t>()};
      if (fw.lo < 1 || fw.hi < fw.lo) rd.fail_at("fit_window", "expected 1 <= j_lo <= j_hi");
      cfg.fit_window = fw;
    } else {
      rd.fail_at("fit_window", "expected \"auto\" or [j_lo, j_hi]");
    }
  }
  cfg.noise_cutoff = rd.positive_or("noise_cutoff", cfg.noise_cutoff);
  cfg.cluster_tolerance = rd.positive_or("cluster_tolerance", cfg.cluster_tolerance);
  cfg.negative_threshold = rd.positive_or("negative_threshold", cfg.negative_threshold);

  if (rd.has("study_resolutions")) {
    const Json& arr = rd.at("study_resolutions");
    if (!arr.is_array() || arr.size() < 3) {
      rd.fail_at("study_resolutions", "expected at least 3 [n_u, n_v] pairs");
    }
    cfg.study_resolutions.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      cfg.study_resolutions.push_back(
          detail::parse_resolution(arr[i], "/study_resolutions/" + std::to_string(i)));
    }
  }
  if (rd.has("near_field")) {
    detail::ConfigReader nf(rd.at("near_field"), "/near_field");
    nf.only({"enabled", "radius", "max_points"});
    cfg.near_field.enabled = nf.boolean_or("enabled", cfg.near_field.enabled);
    cfg.near_field.radius = nf.positive_or("radius", cfg.near_field.radius);
    cfg.near_field.max_points = nf.integer_or("max_points", cfg.near_field.max_points);
    if (cfg.near_field.max_points < 2 || cfg.near_field.max_points > 128) {
      nf.fail_at("max_points", "must be in [2, 128]");
    }
  }
  if (rd.has("diagnostics")) {
    detail::ConfigReader dg(rd.at("diagnostics"), "/diagnostics");
    dg.only({"singular_values", "raw_eigenvalues"});
    cfg.singular_values = dg.boolean_or("singular_values", cfg.singular_values);
    cfg.raw_eigenvalues = dg.boolean_or("raw_eigenvalues", cfg.raw_eigenvalues);
  }
  if (rd.has("outputs")) {
    detail::ConfigReader out(rd.at("outputs"), "/outputs");
    out.only({"report_json", "eigen_csv", "matrix_dump"});
    cfg.outputs.report_json = out.string_opt("report_json");
    cfg.outputs.eigen_csv = out.string_opt("eigen_csv");
    cfg.outputs.matrix_dump = out.string_opt("matrix_dump");
  }
  return cfg;
}

inline Json RunConfig::echo() const {
  Json j;
  j["surface"] = surface_spec;
  j["resolution"] = Json::array({n_u, n_v});
  j["angular_resolution"] = angular_resolution;
  if (fit_window) {
    j["fit_window"] = Json::array({fit_window->lo, fit_window->hi});
  } else {
    j["fit_window"] = "auto";
  }
  j["noise_cutoff"] = noise_cutoff;
  j["cluster_tolerance"] = cluster_tolerance;
  j["negative_threshold"] = negative_threshold;
  Json study = Json::array();
  for (const auto& [nu, nv] : study_resolutions) study.push_back(Json::array({nu, nv}));
  j["study_resolutions"] = study;
  j["near_field"] = {{"enabled", near_field.enabled},
                     {"radius", near_field.radius},
                     {"max_points", near_field.max_points}};
  j["diagnostics"] = {{"singular_values", singular_values}, {"raw_eigenvalues", raw_eigenvalues}};
  j["derivatives"] = {
      {"mode", derivative_mode == DerivativeMode::analytic ? "analytic" : "finite_difference"},
      {"step", fd_step}};
  Json out = Json::object();
  if (outputs.report_json) out["report_json"] = *outputs.report_json;
  if (outputs.eigen_csv) out["eigen_csv"] = *outputs.eigen_csv;
  if (outputs.matrix_dump) out["matrix_dump"] = *outputs.matrix_dump;
  j["outputs"] = out;
  return j;
}

}  // namespace npspec

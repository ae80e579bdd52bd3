#include <gtest/gtest.h>

#include <string>

#include "npspec/config.hpp"

using namespace npspec;

namespace {

std::string pointer_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.pointer();
  }
  return "<no error>";
}

}  // namespace

TEST(ParseConfig, SphereDefaults) {
  const RunConfig c = parse_config(R"({"surface":{"name":"sphere","r":1.0}})");
  EXPECT_EQ(c.n_u, 48);
  EXPECT_EQ(c.n_v, 96);
  EXPECT_EQ(c.angular_resolution, 64);
  EXPECT_DOUBLE_EQ(c.noise_cutoff, 1e-10);
  EXPECT_FALSE(c.fit_window.has_value());
  EXPECT_EQ(c.surface.name(), "sphere");
  EXPECT_FALSE(c.outputs.report_json.has_value());
  EXPECT_EQ(c.derivative_mode, DerivativeMode::analytic);
}

TEST(ParseConfig, TorusDefaultsToSquareGrid) {
  const RunConfig c = parse_config(R"({"surface":{"name":"torus","R":2.0,"r":1.0}})");
  EXPECT_EQ(c.n_u, 64);
  EXPECT_EQ(c.n_v, 64);
}

TEST(ParseConfig, TorusRadiiOrder) {
  EXPECT_EQ(pointer_of(R"({"surface":{"name":"torus","R":1.0,"r":2.0}})"), "/surface/R");
}

TEST(ParseConfig, UnknownSurfaceListsCatalog) {
  try {
    parse_config(R"({"surface":{"name":"dodecahedron"}})");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    for (const auto& name : surface_catalog()) EXPECT_NE(what.find(name), std::string::npos) << name;
    EXPECT_EQ(e.pointer(), "/surface/name");
    EXPECT_EQ(e.exit_code(), ExitCode::config);
  }
}

TEST(ParseConfig, MissingParameterAndBadTypes) {
  EXPECT_EQ(pointer_of(R"({"surface":{"name":"sphere"}})"), "/surface/r");
  EXPECT_EQ(pointer_of(R"({"surface":{"name":"sphere","r":"one"}})"), "/surface/r");
  EXPECT_EQ(pointer_of(R"({"surface":{"name":"sphere","r":-1}})"), "/surface/r");
  EXPECT_EQ(pointer_of(R"({"surface":{"name":"sphere","r":1,"colour":2}})"), "/surface/colour");
  EXPECT_EQ(pointer_of(R"({})"), "/surface");
  EXPECT_EQ(pointer_of(R"({"surface":{"name":"sphere","r":1},"bogus":1})"), "/bogus");
}

TEST(ParseConfig, TolerancesStrictlyPositive) {
  const std::string s = R"("surface":{"name":"sphere","r":1})";
  EXPECT_EQ(pointer_of("{" + s + R"(,"noise_cutoff":0})"), "/noise_cutoff");
  EXPECT_EQ(pointer_of("{" + s + R"(,"cluster_tolerance":-0.1})"), "/cluster_tolerance");
  EXPECT_EQ(pointer_of("{" + s + R"(,"negative_threshold":0})"), "/negative_threshold");
  EXPECT_EQ(pointer_of("{" + s + R"(,"near_field":{"radius":0}})"), "/near_field/radius");
}

TEST(ParseConfig, ResolutionAndWindow) {
  const RunConfig c = parse_config(
      R"({"surface":{"name":"ellipsoid","a":2,"b":1.2,"c":1},"resolution":[16,32],
          "fit_window":[4,40],"angular_resolution":128})");
  EXPECT_EQ(c.n_u, 16);
  EXPECT_EQ(c.n_v, 32);
  ASSERT_TRUE(c.fit_window.has_value());
  EXPECT_EQ(c.fit_window->lo, 4u);
  EXPECT_EQ(c.fit_window->hi, 40u);
  EXPECT_EQ(c.angular_resolution, 128);
  const std::string s = R"("surface":{"name":"sphere","r":1})";
  EXPECT_EQ(pointer_of("{" + s + R"(,"resolution":[2,8]})"), "/resolution");
  EXPECT_EQ(pointer_of("{" + s + R"(,"resolution":[16]})"), "/resolution");
  EXPECT_EQ(pointer_of("{" + s + R"(,"fit_window":[5,2]})"), "/fit_window");
  EXPECT_EQ(pointer_of("{" + s + R"(,"fit_window":"manual"})"), "/fit_window");
  EXPECT_EQ(pointer_of("{" + s + R"(,"angular_resolution":8})"), "/angular_resolution");
  EXPECT_EQ(pointer_of("{" + s + R"(,"study_resolutions":[[8,8],[16,16]]})"), "/study_resolutions");
  EXPECT_EQ(pointer_of("{" + s + R"(,"study_resolutions":[[8,8],[16,16],[2,2]]})"), "/study_resolutions/2");
}

TEST(ParseConfig, SpheroidAliasesCheckShape) {
  EXPECT_NO_THROW(parse_config(R"({"surface":{"name":"oblate_spheroid","a":2,"c":1}})"));
  EXPECT_EQ(pointer_of(R"({"surface":{"name":"oblate_spheroid","a":1,"c":2}})"), "/surface/c");
  EXPECT_EQ(pointer_of(R"({"surface":{"name":"prolate_spheroid","a":2,"c":1}})"), "/surface/c");
}

TEST(ParseConfig, PeanutDefaults) {
  const RunConfig c = parse_config(R"({"surface":{"name":"peanut"}})");
  EXPECT_DOUBLE_EQ(c.surface_spec["c"].get<double>(), kPeanutScale);
  EXPECT_DOUBLE_EQ(c.surface_spec["d"].get<double>(), kPeanutShape);
  EXPECT_EQ(pointer_of(R"({"surface":{"name":"peanut","d":0.5}})"), "/surface/d");
}

TEST(ParseConfig, NestedInversionWrapper) {
  const RunConfig c = parse_config(R"({"surface":{"invert":{"center":[0,0,2],"radius":1,
      "inner":{"invert":{"center":[0,0,0],"radius":1,"inner":{"name":"sphere","r":2}}}}}})");
  EXPECT_EQ(c.surface.name(), "inverted(inverted(sphere))");
  EXPECT_THROW(parse_config(R"({"surface":{"invert":{"center":[0,0,1],"radius":1,
      "inner":{"name":"sphere","r":1}}}})"), SingularInversion);
  EXPECT_EQ(pointer_of(R"({"surface":{"invert":{"center":[0,0],"radius":1,
      "inner":{"name":"sphere","r":1}}}})"), "/surface/invert/center");
  EXPECT_EQ(pointer_of(R"({"surface":{"invert":{"center":[0,0,5],"radius":1,
      "inner":{"name":"cube"}}}})"), "/surface/invert/inner/name");
}

TEST(ParseConfig, UnionOfComponents) {
  const RunConfig c = parse_config(R"({"surface":{"name":"union","components":[
      {"name":"sphere","r":1,"center":[-2,0,0]},{"name":"sphere","r":1,"center":[2,0,0]}]}})");
  EXPECT_EQ(c.surface.chart_count(), 2u);
  EXPECT_EQ(pointer_of(R"({"surface":{"name":"union","components":[]}})"), "/surface/components");
  EXPECT_EQ(pointer_of(R"({"surface":{"name":"union","components":[{"name":"torus","R":1}]}})"),
            "/surface/components/0/r");
}

TEST(ParseConfig, MalformedJson) {
  EXPECT_THROW(parse_config("{\"surface\": "), ConfigError);
}

TEST(ParseConfig, OutputsAndDerivativeMode) {
  const RunConfig c = parse_config(R"({"surface":{"name":"sphere","r":1},
      "outputs":{"report_json":"r.json","matrix_dump":"m.npop"},
      "derivatives":{"mode":"finite_difference","step":1e-5}})");
  EXPECT_EQ(*c.outputs.report_json, "r.json");
  EXPECT_EQ(*c.outputs.matrix_dump, "m.npop");
  EXPECT_FALSE(c.outputs.eigen_csv.has_value());
  EXPECT_EQ(c.surface.derivative_mode(), DerivativeMode::finite_difference);
  EXPECT_EQ(pointer_of(R"({"surface":{"name":"sphere","r":1},"derivatives":{"mode":"symbolic"}})"),
            "/derivatives/mode");
}

TEST(ParseConfig, EchoIsReparseable) {
  const RunConfig a = parse_config(R"({"surface":{"name":"torus","R":2,"r":1},"fit_window":[4,20]})");
  const RunConfig b = parse_config(a.echo().dump());
  EXPECT_EQ(a.echo().dump(), b.echo().dump());
}

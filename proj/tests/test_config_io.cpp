#include <capwave/config.hpp>
#include <capwave/io.hpp>
#include <capwave/verify.hpp>
#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace capwave;

TEST(KeyValues, ParsesCommentsAndWhitespace) {
  auto kv = KeyValues::parse_string("# header\n grid.n = 128  # trailing\n\nname=abc\n");
  EXPECT_EQ(kv.get("grid.n", 0), 128);
  EXPECT_EQ(kv.get("name", std::string{}), "abc");
  EXPECT_EQ(kv.get("missing", 2.5), 2.5);
  EXPECT_TRUE(kv.unused().empty());
}

TEST(KeyValues, RejectsMalformedInput) {
  EXPECT_THROW(KeyValues::parse_string("a = 1\na = 2\n"), ValidationError);
  EXPECT_THROW(KeyValues::parse_string("just words\n"), ValidationError);
  EXPECT_THROW(KeyValues::parse_string(" = 3\n"), ValidationError);
  auto kv = KeyValues::parse_string("x = 1.5\ny = abc\n");
  EXPECT_THROW(kv.get("x", 0), ValidationError);
  EXPECT_THROW(kv.get("y", 0.0), ValidationError);
  EXPECT_THROW(KeyValues::parse_file("/nonexistent/file.cfg"), ValidationError);
}

TEST(RunConfig, DefaultsValidate) {
  const RunConfig c = parse_run_config(KeyValues::parse_string(""));
  EXPECT_EQ(c.n, 64);
  EXPECT_NEAR(c.step() * omega_max(c.grid(), c.geometry()), 0.5, 1e-14);
  EXPECT_EQ(c.steps(), static_cast<int>(std::ceil(c.T / c.step() - 1e-9)));
}

TEST(RunConfig, ParsesAllSections) {
  const RunConfig c = parse_run_config(KeyValues::parse_string(R"(
grid.n = 32
grid.length = 10
geometry.kind = strip
geometry.depth = 2
init.profile = gaussian
init.amplitude = 0.01
evolution.scheme = rk4
evolution.system = mollified
evolution.epsilon = 0.05
evolution.T = 0.25
diagnostics.s = 2
seed = 4
output.dir = results
)"));
  EXPECT_EQ(c.n, 32);
  EXPECT_EQ(c.geometry().kind, Geometry::Kind::parallel_strip);
  EXPECT_EQ(c.options().scheme, Scheme::rk4);
  EXPECT_EQ(c.options().system, System::mollified);
  EXPECT_DOUBLE_EQ(c.options().epsilon, 0.05);
  EXPECT_EQ(c.seed, 4u);
  EXPECT_EQ(c.output_dir, "results");
}

TEST(RunConfig, RejectsInvalidValues) {
  const auto bad = [](const std::string& s) { return parse_run_config(KeyValues::parse_string(s)); };
  EXPECT_THROW(bad("grid.n = 7"), ValidationError);
  EXPECT_THROW(bad("geometry.kind = ocean"), ValidationError);
  EXPECT_THROW(bad("geometry.depth = -1"), ValidationError);
  EXPECT_THROW(bad("evolution.scheme = euler"), ValidationError);
  EXPECT_THROW(bad("evolution.dt = 1.0"), ValidationError);
  EXPECT_THROW(bad("evolution.epsilon = -0.1"), ValidationError);
  EXPECT_THROW(bad("init.profile = mode\ninit.mode = 40"), ValidationError);
  EXPECT_THROW(bad("unknown.key = 1"), ValidationError);
  EXPECT_THROW(bad("seed = -3"), ValidationError);
}

TEST(InitialState, Profiles) {
  RunConfig c;
  c.init.profile = "mode";
  c.init.amplitude = 0.1;
  c.init.mode = 3;
  const WaveState s = initial_state(c);
  EXPECT_NEAR(std::abs(s.eta.spectrum()[3]), 0.05, 1e-14);
  EXPECT_EQ(max_abs(s.psi), 0.0);
  c.init.profile = "zero";
  EXPECT_EQ(max_abs(initial_state(c).eta), 0.0);
}

TEST(InitialState, RoughPacketSharesLowModesAcrossResolutions) {
  RunConfig c;
  c.length = 40.0;
  c.init.profile = "rough_packet";
  c.init.amplitude = 1e-3;
  c.n = 128;
  const CVec a = initial_state(c).eta.spectrum();
  c.n = 256;
  const Grid g256 = c.grid();
  const CVec b = initial_state(c).eta.spectrum();
  for (int k = -63; k < 64; ++k) EXPECT_NEAR(std::abs(a[Grid(128, 40.0).index(k)] - b[g256.index(k)]), 0.0, 1e-17);
}

TEST(InitialState, RoughPacketTailDecay) {
  // |eta_hat|^2 ~ <xi>^{-(2 s + tail_excess)}: H^{s+1/2} converges, H^{s+2} keeps growing
  RunConfig c;
  c.length = 40.0;
  c.init.profile = "rough_packet";
  c.init.amplitude = 1.0;
  c.n = 512;
  const Field a = initial_state(c).eta;
  c.n = 1024;
  const Field b = initial_state(c).eta;
  EXPECT_NEAR(sobolev_norm(b, c.s + 0.5) / sobolev_norm(a, c.s + 0.5), 1.0, 0.05);
  EXPECT_GT(sobolev_norm(b, c.s + 2.0) / sobolev_norm(a, c.s + 2.0), 1.5);
}

TEST(Io, FieldJsonRoundTrip) {
  const Grid g(16, 3.0);
  const Field u = Field::from_values(g, oracle::random_values(16, 1, false), false);
  const Field w = io::field_from_json(io::json::parse(io::field_json(u).dump()));
  EXPECT_EQ(w.grid(), g);
  EXPECT_LT(max_abs(u - w), 1e-15);
  auto j = io::field_json(u);
  j["spectrum"].erase(0);
  EXPECT_THROW(io::field_from_json(j), ValidationError);
}

TEST(Io, FieldCsv) {
  const Grid g(8, 2 * pi);
  std::ostringstream os;
  io::write_field_csv(Field::from_function(g, [](double x) { return x; }), os);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("x,re,im\n", 0), 0u);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 9);
}

TEST(Io, SymbolJsonShape) {
  const Grid g(8, 2 * pi);
  const io::json j = io::symbol_json(dn_symbol(Field(g)), {1.0, -2.0});
  EXPECT_EQ(j.at("principal").size(), 8u);
  EXPECT_EQ(j.at("principal")[0].size(), 2u);
  EXPECT_NEAR(j.at("principal")[0][1][0].get<double>(), 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(j.at("order").get<double>(), 1.0);
}

TEST(Io, TrajectoryCsv) {
  std::vector<DiagnosticRecord> rs(3);
  std::ostringstream os;
  io::write_trajectory_csv(rs, os);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "t,eta_norm,psi_norm,M,H_total,H0,w");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 4);
}

TEST(Verify, UnknownSuiteThrows) {
  EXPECT_THROW(verify::run_suite("nonsense"), ValidationError);
  EXPECT_EQ(verify::suite_names().size(), 4u);
}

TEST(Verify, SymbolsSuitePasses) {
  const verify::Suite s = verify::run_suite("symbols");
  EXPECT_TRUE(verify::all_pass(s));
  const io::json j = verify::to_json(s);
  EXPECT_EQ(j.size(), s.size());
}

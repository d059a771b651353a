#include <capwave/dno.hpp>
#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"

using namespace capwave;

namespace {

Field surface(const Grid& g, double a = 0.1) {
  return Field::from_function(g, [a](double x) { return a * std::cos(x) + 0.5 * a * std::sin(2 * x); });
}

Field potential(const Grid& g) {
  return Field::from_function(g, [](double x) { return std::sin(x) + 0.3 * std::cos(3 * x) + 0.1 * std::sin(5 * x); });
}

}  // namespace

class FlatModes : public ::testing::TestWithParam<double> {};

// Separation of variables: G(0) e^{i k x} = k tanh(k h) e^{i k x}.
TEST_P(FlatModes, MatchesSeparationOfVariables) {
  const double h = GetParam();
  const Grid g(64, 2 * pi);
  const Geometry geo = Geometry::flat(h);
  for (int k : {1, 2, 5, 12}) {
    const Field psi = Field::from_function(g, [k](double x) { return std::cos(k * x); });
    const Field ref = Field::from_function(g, [k, h](double x) { return k * std::tanh(k * h) * std::cos(k * x); });
    const Field G = dirichlet_neumann(Field(g), psi, geo, 32);
    EXPECT_LT(max_abs(G - ref), 1e-9 * k) << "k=" << k << " h=" << h;
  }
}

INSTANTIATE_TEST_SUITE_P(Depths, FlatModes, ::testing::Values(0.5, 1.0, 3.0));

TEST(Dno, StripOfFlatSurfaceMatchesFlatBottom) {
  const Grid g(64, 2 * pi);
  const Field psi = potential(g);
  const Field a = dirichlet_neumann(Field(g), psi, Geometry::flat(1.5), 32);
  const Field b = dirichlet_neumann(Field(g), psi, Geometry::strip(1.5), 32);
  EXPECT_LT(max_abs(a - b), 1e-10);
}

TEST(Dno, AnnihilatesConstants) {
  const Grid g(64, 2 * pi);
  const Field one = Field::from_function(g, [](double) { return 1.0; });
  EXPECT_LT(max_abs(dirichlet_neumann(surface(g), one, Geometry::flat(1.0), 32)), 1e-10);
}

TEST(Dno, MeanZero) {
  const Grid g(64, 2 * pi);
  const Field G = dirichlet_neumann(surface(g), potential(g), Geometry::flat(1.0), 32);
  EXPECT_LT(std::abs(G.spectrum()[0]), 1e-11);
}

TEST(Dno, SymmetricAndNonnegative) {
  const Grid g(64, 2 * pi);
  const Geometry geo = Geometry::flat(1.0);
  const Field eta = surface(g, 0.15);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Field u = Field::from_spectrum(g, oracle::random_spectrum(64, 10, seed), true);
    const Field v = Field::from_spectrum(g, oracle::random_spectrum(64, 10, seed + 100), true);
    const Field Gu = dirichlet_neumann(eta, u, geo, 32), Gv = dirichlet_neumann(eta, v, geo, 32);
    const double scale = l2_norm(Gu) * l2_norm(v);
    EXPECT_LT(std::abs(inner(Gu, v) - inner(u, Gv)), 1e-9 * scale);
    EXPECT_GE(inner(Gu, u).real(), -1e-12 * scale);
  }
}

TEST(Dno, LinearInPotential) {
  const Grid g(64, 2 * pi);
  const Geometry geo = Geometry::flat(1.0);
  const Field eta = surface(g);
  const Field u = potential(g), v = Field::from_function(g, [](double x) { return std::cos(2 * x); });
  const Field lhs = dirichlet_neumann(eta, 2.0 * u + v, geo, 32);
  const Field rhs = 2.0 * dirichlet_neumann(eta, u, geo, 32) + dirichlet_neumann(eta, v, geo, 32);
  EXPECT_LT(max_abs(lhs - rhs), 1e-10);
}

TEST(Dno, TranslationCovariant) {
  const Grid g(64, 2 * pi);
  const Geometry geo = Geometry::flat(1.0);
  const int shift = 5;
  auto shifted = [&](const Field& f) {
    CVec v(g.n());
    for (int j = 0; j < g.n(); ++j) v[j] = f[(j + shift) % g.n()];
    return Field::from_values(g, v, true);
  };
  const Field eta = surface(g), psi = potential(g);
  const Field a = shifted(dirichlet_neumann(eta, psi, geo, 32));
  const Field b = dirichlet_neumann(shifted(eta), shifted(psi), geo, 32);
  EXPECT_LT(max_abs(a - b), 1e-10);
}

TEST(Dno, ShapeDerivativeMatchesFiniteDifference) {
  const Grid g(64, 2 * pi);
  const Geometry geo = Geometry::flat(1.0);
  const Field eta = surface(g), psi = potential(g);
  const Field ht = Field::from_function(g, [](double x) { return std::sin(3 * x); });
  const double e = 1e-5;
  const Field fd = (1.0 / (2 * e)) * (dirichlet_neumann(eta + e * ht, psi, geo, 32) -
                                      dirichlet_neumann(eta - e * ht, psi, geo, 32));
  const Field sd = shape_derivative(eta, psi, ht, geo, 32);
  EXPECT_LT(l2_norm(fd - sd), 1e-6 * l2_norm(sd));
}

TEST(Dno, BVOfFlatSurface) {
  const Grid g(32, 2 * pi);
  const Field psi = potential(g);
  const Field G = dirichlet_neumann(Field(g), psi, Geometry::flat(1.0), 24);
  const auto [B, V] = compute_B_V(Field(g), psi, G);
  EXPECT_LT(max_abs(B - G), 1e-14);
  EXPECT_LT(max_abs(V - dx(psi)), 1e-14);
}

TEST(Dno, CancellationDecreasesWithResolution) {
  const Grid g(128, 2 * pi);
  const Geometry geo = Geometry::flat(12.0);
  const Field eta = surface(g), psi = potential(g);
  const auto c16 = cancellation(eta, psi, geo, 16), c32 = cancellation(eta, psi, geo, 32);
  EXPECT_LT(c32.residual, c16.residual);
  EXPECT_LT(c32.residual, 1e-5 * c32.reference);
}

TEST(Dno, Validation) {
  const Grid g(32, 2 * pi);
  EXPECT_THROW(dirichlet_neumann(Field(g), Field(g), Geometry::flat(-1.0), 24), ValidationError);
  EXPECT_THROW(dirichlet_neumann(Field(g), Field(g), Geometry::flat(1.0), 4), ValidationError);
  EXPECT_THROW(shape_derivative(Field(g), Field(g), Field(g), Geometry::strip(1.0), 24), ValidationError);
  EXPECT_THROW(cancellation(Field(g), Field(g), Geometry::strip(1.0), 24), ValidationError);
}

TEST(Dno, SurfaceTouchingBottomIsRejected) {
  const Grid g(32, 2 * pi);
  const Field eta = Field::from_function(g, [](double x) { return -1.2 * std::cos(x); });
  EXPECT_THROW(dirichlet_neumann(eta, potential(g), Geometry::flat(1.0), 24), GeometryError);
}

TEST(Dno, StripCsvHasHeaderAndRows) {
  const Grid g(16, 2 * pi);
  const StripSolution sol = solve_strip(surface(g), potential(g), Geometry::flat(1.0), 8);
  std::ostringstream os;
  write_strip_csv(sol, os);
  const std::string s = os.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 16 * 8);
}

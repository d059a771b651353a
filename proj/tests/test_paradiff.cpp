#include <capwave/paradiff.hpp>
#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace capwave;

namespace {

Field modes(const Grid& g, int kmin, int kmax, std::uint64_t seed) {
  CVec c = oracle::random_spectrum(g.n(), kmax, seed);
  for (int k = 1; k < kmin; ++k) c[k] = c[g.n() - k] = 0.0;
  return Field::from_spectrum(g, c, true);
}

}  // namespace

TEST(Cutoffs, Shapes) {
  const Cutoffs c;
  EXPECT_DOUBLE_EQ(c.chi(0.05, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(c.chi(0.25, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(c.chi(1.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(c.psi(0.5), 0.0);
  EXPECT_DOUBLE_EQ(c.psi(-2.0), 1.0);
  for (double t = 0.1; t < 0.2; t += 0.01) EXPECT_GE(c.chi(t, 1.0), c.chi(t + 0.01, 1.0));
}

TEST(Quantize, ConstantSymbolAboveCutoffIsIdentity) {
  const Grid g(64, 2 * pi);
  const Field u = modes(g, 2, 20, 1);
  EXPECT_LT(max_abs(quantize(Symbol::constant(g, 3.0), u) - 3.0 * u), 1e-13);
}

TEST(Quantize, LowFrequenciesAreRemoved) {
  const Grid g(64, 2 * pi);
  const Field u = Field::from_function(g, [](double x) { return 1.0 + std::cos(x); });
  EXPECT_LT(max_abs(quantize(Symbol::constant(g, 1.0), u)), 1e-15);
}

TEST(Quantize, FourierMultiplier) {
  const Grid g(64, 2 * pi);
  const Field u = modes(g, 2, 25, 2);
  EXPECT_LT(max_abs(quantize(Symbol::power(g, 1.0), u) - multiplier(u, [](double xi) { return cplx{std::abs(xi)}; })),
            1e-12);
  // sgn(xi) |xi| = -i d_x
  EXPECT_LT(max_abs(quantize(Symbol::power(g, 1.0, 1.0, -1.0), u) - (-I) * dx(u)), 1e-12);
}

TEST(Paraproduct, LowHighIsPointwiseProduct) {
  const Grid g(128, 2 * pi);
  const Field a = Field::from_function(g, [](double x) { return 2.0 + std::cos(x); });
  const Field u = Field::from_function(g, [](double x) { return std::sin(30 * x); });
  const Field ref = Field::from_function(g, [](double x) { return (2.0 + std::cos(x)) * std::sin(30 * x); });
  EXPECT_LT(max_abs(paraproduct(a, u) - ref), 1e-13);
}

TEST(Paraproduct, HighLowIsDropped) {
  const Grid g(128, 2 * pi);
  const Field a = Field::from_function(g, [](double x) { return std::cos(30 * x); });
  const Field u = Field::from_function(g, [](double x) { return std::sin(3 * x); });
  EXPECT_LT(max_abs(paraproduct(a, u)), 1e-14);
}

TEST(Quantize, FastMatchesDense) {
  const Grid g(64, 2 * pi);
  const Field f = Field::from_function(g, [](double x) { return 1.0 + 0.2 * std::sin(x); });
  const Symbol a = Symbol::of_x(f) * Symbol::power(g, 1.5) + Symbol::power(g, 0.5, I, -I);
  const Field u = modes(g, 1, 28, 3);
  const Field fast = quantize(a, u), dense = quantize_dense(a, u);
  EXPECT_LT(max_abs(fast - dense), 1e-12 * max_abs(dense));
}

TEST(Quantize, AdjointPairing) {
  const Grid g(64, 2 * pi);
  const Field f = Field::from_function(g, [](double x) { return std::cos(x) + 0.3 * std::sin(2 * x); });
  const Symbol a = Symbol::of_x(f) * Symbol::power(g, 1.0, 1.0, 2.0);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Field u = Field::from_values(g, oracle::random_values(64, s, false), false);
    const Field v = Field::from_values(g, oracle::random_values(64, s + 50, false), false);
    const cplx lhs = inner(quantize(a, u), v), rhs = inner(u, quantize_adjoint(a, v));
    EXPECT_LT(std::abs(lhs - rhs), 1e-10 * std::abs(lhs));
  }
}

TEST(Quantize, RealityPreserved) {
  const Grid g(64, 2 * pi);
  const Field f = Field::from_function(g, [](double x) { return std::cos(x); });
  const Symbol a = Symbol::of_x(f) * Symbol::power(g, 1.0);
  const Field u = modes(g, 1, 20, 4);
  const Field r = quantize(a, u);
  EXPECT_TRUE(r.is_real());
  const Field c = quantize_dense(a, u);
  double im = 0.0;
  for (const auto& z : c.values()) im = std::max(im, std::abs(z.imag()));
  EXPECT_LT(im, 1e-13);
}

TEST(Quantize, GridMismatchThrows) {
  const Grid g(64, 2 * pi), h(32, 2 * pi);
  EXPECT_THROW(quantize(Symbol::constant(g, 1.0), Field(h)), ValidationError);
}

TEST(Compose, ValidatesRho) {
  const Grid g(32, 2 * pi);
  EXPECT_THROW(compose(Symbol::constant(g, 1.0), Symbol::constant(g, 1.0), 2.0), ValidationError);
  EXPECT_THROW(adjoint_symbol(Symbol::constant(g, 1.0), 0.0), ValidationError);
}

TEST(Compose, CorrectionTermForXDependentSymbols) {
  // a = |xi| (Fourier multiplier) after b = f(x): exact T_a T_b = T_{a#b} up to the cutoffs
  const Grid g(64, 2 * pi);
  const Field f = Field::from_function(g, [](double x) { return std::sin(x); });
  const Symbol ab = compose(Symbol::power(g, 2.0), Symbol::of_x(f), 1.5);
  // xi^2 f - i (2 xi) f' keeps orders 2 and 1
  EXPECT_EQ(ab.parts().size(), 2u);
  for (int j = 0; j < g.n(); j += 7) {
    const double x = g.x(j), xi = 3.0;
    const cplx ref = xi * xi * std::sin(x) - I * 2.0 * xi * std::cos(x);
    EXPECT_NEAR(std::abs(ab.at(j, xi) - ref), 0.0, 1e-12);
  }
}

TEST(Probe, BumpIsUnitAndLocalized) {
  const Grid g(256, 2 * pi);
  for (int j : {2, 4, 6}) {
    const Field u = probe_bump(g, j, 1.0, 3);
    EXPECT_NEAR(sobolev_norm(u, 1.0), 1.0, 1e-12);
    const CVec c = u.spectrum();
    for (int k = 0; k < g.n(); ++k) {
      const double xi = std::abs(g.xi(k));
      if (xi <= std::ldexp(1.0, j) || xi >= std::ldexp(1.0, j + 1)) EXPECT_LT(std::abs(c[k]), 1e-15);
    }
  }
  EXPECT_THROW(probe_bump(Grid(16, 2 * pi), 5, 0.0, 0), ValidationError);
}

TEST(Probe, LeastSquaresSlope) {
  EXPECT_NEAR(lsq_slope({0, 1, 2, 3}, {1, 3, 5, 7}), 2.0, 1e-14);
}

TEST(Probe, MeasuresKnownOrder) {
  // A - B = T_{|xi|^{-2}}, so the remainder gains exactly two derivatives
  const Grid g(1024, 2 * pi);
  const Symbol m2 = Symbol::power(g, -2.0);
  const ProbeReport r = remainder_order(
      [&](const Field& u) { return quantize(Symbol::constant(g, 1.0), u) + quantize(m2, u); },
      [&](const Field& u) { return quantize(Symbol::constant(g, 1.0), u); }, g, 0.0, 0.0, 2.0);
  EXPECT_FALSE(r.flagged);
  EXPECT_NEAR(r.measured, 2.0, 0.1);
  EXPECT_TRUE(r.pass);
}

TEST(Probe, IdenticalOperatorsSaturate) {
  const Grid g(1024, 2 * pi);
  const auto A = [&](const Field& u) { return quantize(Symbol::power(g, 1.0), u); };
  const ProbeReport r = remainder_order(A, A, g, 0.0, 1.0, 1.0);
  EXPECT_TRUE(r.saturated);
  EXPECT_TRUE(r.pass);
  EXPECT_GE(r.noise_shells, 3);
}

TEST(Probe, TooSmallGridIsFlagged) {
  const Grid g(32, 2 * pi);
  const auto A = [&](const Field& u) { return u; };
  const auto B = [&](const Field& u) { return 2.0 * u; };
  const ProbeReport r = remainder_order(A, B, g, 0.0, 0.0, 1.0);
  EXPECT_TRUE(r.flagged);
  EXPECT_FALSE(r.pass);
}

TEST(Bony, SmoothRemainderDecaysFaster) {
  const Grid g(512, 2 * pi);
  // a in H^{s} with s about 2: spectrum ~ k^{-3}
  CVec c(g.n(), cplx{});
  for (int k = 1; k < g.n() / 3; ++k) c[k] = c[g.n() - k] = 0.1 * std::pow(double(k), -3.0);
  const Field a = Field::from_spectrum(g, c, true);
  const Field r = bony_residual([](double v) { return std::sin(v); }, [](double v) { return std::cos(v); }, a);
  EXPECT_GT(shell_decay(r, 3, 6), shell_decay(a, 3, 6) + 0.5);
}

TEST(Bony, ParaproductRemainderOfLowTimesHigh) {
  const Grid g(128, 2 * pi);
  const Field a = Field::from_function(g, [](double x) { return std::cos(x); });
  const Field b = Field::from_function(g, [](double x) { return std::cos(40 * x); });
  // ab = T_a b exactly; T_b a vanishes
  EXPECT_LT(max_abs(paraproduct_remainder(a, b)), 1e-13);
}

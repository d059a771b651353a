#include <capwave/evolution.hpp>
#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace capwave;

namespace {

WaveState smooth_state(const Grid& g, double a = 1.0) {
  return {0.0, Field::from_function(g, [a](double x) { return a * (0.05 * std::cos(x) + 0.02 * std::sin(2 * x)); }),
          Field::from_function(g, [a](double x) { return a * (0.03 * std::sin(x) + 0.01 * std::cos(3 * x)); })};
}

}  // namespace

TEST(Linear, DispersionClosedForm) {
  for (double h : {0.5, 1.0, 4.0})
    for (double k : {0.5, 1.0, 3.0})
      EXPECT_NEAR(dispersion(k, Geometry::flat(h, 9.81, 0.07)), oracle::linear_omega(k, h, 9.81, 0.07), 1e-12);
}

// Jacobian of the full right-hand side at rest, from one-mode finite differences.
TEST(Linear, JacobianAtRestGivesDispersion) {
  const Grid g(32, 2 * pi);
  const Geometry geo = Geometry::flat(1.0, 1.0, 1.0);
  const double e = 1e-7;
  for (int k : {1, 3, 6}) {
    const Field c = Field::from_function(g, [k](double x) { return std::cos(k * x); });
    const Tendency de = zakharov_rhs({0.0, e * c, Field(g)}, geo);
    const Tendency dp = zakharov_rhs({0.0, Field(g), e * c}, geo);
    const double restoring_k = -de.psi_t.spectrum()[k].real() / (0.5 * e);
    const double dn_k = dp.eta_t.spectrum()[k].real() / (0.5 * e);
    EXPECT_NEAR(std::sqrt(restoring_k * dn_k), oracle::linear_omega(k, 1.0, 1.0, 1.0), 1e-6 * k * k);
  }
}

TEST(Rhs, RestIsStationary) {
  const Grid g(32, 2 * pi);
  const Tendency t = zakharov_rhs({0.0, Field(g), Field(g)}, Geometry::flat(1.0));
  EXPECT_EQ(max_abs(t.eta_t), 0.0);
  EXPECT_LT(max_abs(t.psi_t), 1e-15);
}

TEST(Rhs, MollifiedAtZeroEpsilonIsZakharov) {
  const Grid g(64, 2 * pi);
  const Geometry geo = Geometry::flat(1.0);
  const WaveState s = smooth_state(g);
  const Tendency a = zakharov_rhs(s, geo), b = mollified_rhs(s, 0.0, geo);
  EXPECT_LT(max_abs(a.eta_t - b.eta_t), 1e-13);
  EXPECT_LT(max_abs(a.psi_t - b.psi_t), 1e-13);
}

TEST(Rhs, MollifiedDiffersForPositiveEpsilon) {
  const Grid g(64, 2 * pi);
  const Geometry geo = Geometry::flat(1.0);
  const WaveState s = smooth_state(g);
  const Tendency a = zakharov_rhs(s, geo), b = mollified_rhs(s, 0.1, geo);
  EXPECT_GT(l2_norm(a.psi_t - b.psi_t) + l2_norm(a.eta_t - b.eta_t), 1e-6);
}

TEST(Rhs, MassFluxVanishes) {
  const Grid g(64, 2 * pi);
  const Tendency t = zakharov_rhs(smooth_state(g), Geometry::flat(1.0));
  EXPECT_LT(std::abs(t.eta_t.spectrum()[0]), 1e-13);
}

TEST(Linear, DiagonalVariablesRotate) {
  const Grid g(32, 2 * pi);
  const Geometry geo = Geometry::flat(1.0);
  const int k = 2;
  const WaveState s0{0.0, Field::from_function(g, [](double x) { return 1e-6 * std::cos(2 * x); }), Field(g)};
  const double dt = default_dt(g, geo);
  const int steps = 40;
  const Trajectory tr = simulate(s0, geo, dt, steps, {}, {}, steps, false);
  const cplx a0 = diagonalize(s0, geo).spectrum()[k], a1 = diagonalize(tr.states.back(), geo).spectrum()[k];
  const cplx ref = a0 * std::polar(1.0, dispersion(k, geo) * dt * steps);
  EXPECT_LT(std::abs(a1 - ref), 1e-6 * std::abs(a0));
}

TEST(Linear, FrequencyFitOfLinearMode) {
  const Grid g(32, 2 * pi);
  const Geometry geo = Geometry::flat(1.0);
  const WaveState s0{0.0, Field::from_function(g, [](double x) { return 1e-5 * std::cos(3 * x); }), Field(g)};
  const Trajectory tr = simulate(s0, geo, default_dt(g, geo), 200, {}, {}, 1, false);
  const FrequencyFit f = fit_frequency(tr.states, geo, 3);
  EXPECT_LT(f.rel_error, 1e-5);
  EXPECT_THROW(fit_frequency({s0}, geo, 3), ValidationError);
  EXPECT_THROW(fit_frequency(tr.states, geo, 16), ValidationError);
}

TEST(Stepper, RejectsUnstableStep) {
  const Grid g(64, 2 * pi);
  const Geometry geo = Geometry::flat(1.0);
  const double w = omega_max(g, geo);
  EXPECT_THROW(Stepper(g, geo, 2.1 / w, {}), ValidationError);
  EvolutionOptions rk;
  rk.scheme = Scheme::rk4;
  EXPECT_NO_THROW(Stepper(g, geo, 2.5 / w, rk));
  EXPECT_THROW(Stepper(g, geo, 2.9 / w, rk), ValidationError);
  EXPECT_THROW(Stepper(g, geo, 0.0, {}), ValidationError);
}

TEST(Stepper, DegenerateLayerAborts) {
  const Grid g(32, 2 * pi);
  const WaveState s{0.0, Field::from_function(g, [](double x) { return -1.5 * std::cos(x); }), Field(g)};
  EXPECT_THROW(step(s, 1e-3, Geometry::flat(1.0)), EvolutionAbort);
}

TEST(Stepper, SchemesAgree) {
  const Grid g(32, 2 * pi);
  const Geometry geo = Geometry::flat(1.0);
  const WaveState s0 = smooth_state(g);
  EvolutionOptions rk;
  rk.scheme = Scheme::rk4;
  const double dt = 0.25 / omega_max(g, geo);
  const WaveState a = simulate(s0, geo, dt, 40, {}, {}, 40, false).states.back();
  const WaveState b = simulate(s0, geo, dt, 40, rk, {}, 40, false).states.back();
  EXPECT_LT(l2_norm(a.eta - b.eta), 1e-8 * l2_norm(a.eta));
  EXPECT_NEAR(a.t, 40 * dt, 1e-14);
}

TEST(Conservation, EnergyAndMassOverShortRun) {
  const Grid g(32, 2 * pi);
  const Geometry geo = Geometry::flat(1.0);
  const WaveState s0 = smooth_state(g);
  const Trajectory tr = simulate(s0, geo, default_dt(g, geo), 100, {}, {2.5, 0.1}, 10);
  ASSERT_EQ(tr.records.size(), 11u);
  const double E0 = tr.records.front().H_total;
  for (const auto& r : tr.records) EXPECT_LT(std::abs(r.H_total - E0), 1e-9 * E0);
  EXPECT_LT(std::abs(tr.states.back().eta.spectrum()[0] - s0.eta.spectrum()[0]), 1e-14);
}

TEST(Energy, QuadraticPartForSmallData) {
  const Grid g(32, 2 * pi);
  const Geometry geo = Geometry::flat(1.0);
  const Energy E = hamiltonian(smooth_state(g, 1e-3), geo);
  EXPECT_NEAR(E.total, E.quadratic, 1e-3 * E.quadratic);
  // single-mode closed form: (1/2) L (k tanh k) |c|^2 * 2 for psi = cos(x)
  const WaveState s{0.0, Field(g), Field::from_function(g, [](double x) { return std::cos(x); })};
  EXPECT_NEAR(hamiltonian(s, geo).quadratic, 0.5 * 2 * pi * std::tanh(1.0) * 0.5, 1e-12);
  EXPECT_NEAR(hamiltonian(s, geo).total, hamiltonian(s, geo).quadratic, 1e-10);
}

TEST(Simulate, StrideKeepsEndpoint) {
  const Grid g(32, 2 * pi);
  const Geometry geo = Geometry::flat(1.0);
  const Trajectory tr = simulate(smooth_state(g), geo, default_dt(g, geo), 7, {}, {}, 3);
  ASSERT_EQ(tr.states.size(), 4u);  // 0, 3, 6, 7
  EXPECT_EQ(tr.records.size(), 4u);
  EXPECT_THROW(simulate(smooth_state(g), geo, default_dt(g, geo), -1, {}, {}), ValidationError);
}

TEST(Monitor, SlopeIsSmallestLinearBound) {
  const Grid g(16, 2 * pi);
  std::vector<WaveState> traj;
  for (int i = 0; i < 5; ++i) {
    const double a = 1.0 + 0.1 * i * i;
    traj.push_back({0.5 * i, Field::from_function(g, [a](double x) { return a * std::cos(x); }), Field(g)});
  }
  const MonitorReport m = monitor(traj, 0.5);
  double c = 0.0;
  for (size_t i = 1; i < traj.size(); ++i) c = std::max(c, (m.M[i] - m.M[0]) / traj[i].t);
  EXPECT_NEAR(m.slope, c, 1e-14);
  for (size_t i = 1; i < m.M.size(); ++i) EXPECT_GE(m.M[i], m.M[i - 1]);
  EXPECT_THROW(monitor({}, 0.5), ValidationError);
}

TEST(Diagnostics, PairNormDefinition) {
  const Grid g(32, 2 * pi);
  const WaveState s = smooth_state(g);
  const double a = sobolev_norm(s.eta, 3.0), b = sobolev_norm(s.psi, 2.5);
  EXPECT_NEAR(pair_norm(s, 2.5), std::sqrt(a * a + b * b), 1e-14);
  const double wa = weighted_norm(s.eta, 3.25, 0.1), wb = weighted_norm(s.psi, 2.75, 0.1);
  EXPECT_NEAR(smoothing_integrand(s, 2.5, 0.1), wa * wa + wb * wb, 1e-14 * (wa * wa + wb * wb));
}

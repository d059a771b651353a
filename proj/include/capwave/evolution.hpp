#pragma once

#include <array>

#include "dno.hpp"
#include "paradiff.hpp"
#include "symbols.hpp"

namespace capwave {

struct WaveState {
  double t = 0.0;
  Field eta, psi;
};

struct Tendency {
  Field eta_t, psi_t;
};

enum class Scheme { rk4, etdrk4 };
enum class System { zakharov, mollified };

struct EvolutionOptions {
  int nz = 24;
  DnOptions dn;
  Cutoffs cut;
  System system = System::zakharov;
  double epsilon = 0.0;
  Scheme scheme = Scheme::etdrk4;
};

// Thrown when a step produces non-finite values or a degenerate layer.
struct EvolutionAbort : std::runtime_error {
  WaveState last;
  EvolutionAbort(const std::string& what, WaveState s) : std::runtime_error(what), last(std::move(s)) {}
};

// ---------------------------------------------------------------------------
// Linearization about the flat state.

inline double flat_depth(const Geometry& geo) { return geo.depth; }

// |xi| tanh(|xi| h).
inline double flat_dn(double xi, const Geometry& geo) {
  const double a = std::abs(xi);
  return a * std::tanh(a * flat_depth(geo));
}

inline double restoring(double xi, const Geometry& geo) { return geo.g + geo.kappa * xi * xi; }

inline double dispersion(double xi, const Geometry& geo) { return std::sqrt(restoring(xi, geo) * flat_dn(xi, geo)); }

inline double omega_max(const Grid& g, const Geometry& geo) {
  double w = 0.0;
  for (int k = 0; k < g.n(); ++k) w = std::max(w, dispersion(g.xi(k), geo));
  return w;
}

inline double default_dt(const Grid& g, const Geometry& geo) { return 0.5 / omega_max(g, geo); }

// ---------------------------------------------------------------------------
// Right-hand sides.

// -g eta + kappa H(eta) - psi_x^2 / 2 + (eta_x psi_x + G)^2 / (2 (1 + eta_x^2)).
inline Field dynamic_terms(const Field& eta, const Field& psi, const Field& G, const Geometry& geo) {
  const Field ex = dx(eta), px = dx(psi);
  const Field slope = ex.map_real([](double e) { return e / std::sqrt(1.0 + e * e); });
  const Field curvature = dx(slope);
  const Field inv = product(ex, ex).map([](cplx w) { return 1.0 / (1.0 + w); });
  const Field num = product(ex, px) + G;
  return -geo.g * eta + geo.kappa * curvature - 0.5 * product(px, px) + 0.5 * product(product(num, num), inv);
}

inline Tendency zakharov_rhs(const WaveState& s, const Geometry& geo, const EvolutionOptions& o = {}) {
  const Field G = dirichlet_neumann(s.eta, s.psi, geo, o.nz, o.dn);
  return {G, dynamic_terms(s.eta, s.psi, G, geo)};
}

struct WaveCache {
  Field G, B, V, U, Phi1, Phi2;
};

inline WaveCache derive(const WaveState& s, const Geometry& geo, const EvolutionOptions& o = {}) {
  WaveCache c;
  c.G = dirichlet_neumann(s.eta, s.psi, geo, o.nz, o.dn);
  std::tie(c.B, c.V) = compute_B_V(s.eta, s.psi, c.G);
  c.U = s.psi - paraproduct(c.B, s.eta, o.cut);
  const Symmetrizer S = symmetrizer(s.eta);
  c.Phi1 = quantize(S.p, s.eta, o.cut);
  c.Phi2 = quantize(S.q, c.U, o.cut);
  return c;
}

struct Paralinear {
  Field f1, f2;
};

// f1 = G - (T_lambda (psi - T_B eta) - T_V eta_x);
// f2 = dynamic terms + T_V psi_x - T_B T_V eta_x - T_B G + kappa T_h eta.
inline Paralinear paralinear_residuals(const Field& eta, const Field& psi, const Field& G, const Field& B,
                                       const Field& V, const Geometry& geo, const Cutoffs& cut = {}) {
  const Symbol lam = dn_symbol(eta);
  const Symbol h = curvature_symbol(eta);
  const Field ex = dx(eta), px = dx(psi);
  const Field TVex = paraproduct(V, ex, cut);
  Paralinear r;
  r.f1 = G - (quantize(lam, psi - paraproduct(B, eta, cut), cut) - TVex);
  r.f2 = dynamic_terms(eta, psi, G, geo) + paraproduct(V, px, cut) - paraproduct(B, TVex, cut) -
         paraproduct(B, G, cut) + geo.kappa * quantize(h, eta, cut);
  return r;
}

inline Paralinear paralinear_residuals(const WaveState& s, const Geometry& geo, const EvolutionOptions& o = {}) {
  const Field G = dirichlet_neumann(s.eta, s.psi, geo, o.nz, o.dn);
  auto [B, V] = compute_B_V(s.eta, s.psi, G);
  return paralinear_residuals(s.eta, s.psi, G, B, V, geo, o.cut);
}

// Approximate system: d_t u = -T_V d_x J u - L^eps u + f(J eta, J psi), with
// J = I - T_{1 - j_eps} and the symmetrizer blocks I - T_wp T_{1-j} T_p,
// I - T_{1/q} T_{1-j} T_q. Every correction vanishes identically at eps = 0.
inline Tendency mollified_rhs(const WaveState& s, double eps, const Geometry& geo, const EvolutionOptions& o = {}) {
  if (!(eps >= 0.0)) throw ValidationError("mollified_rhs: eps must be nonnegative");
  const Cutoffs& cut = o.cut;
  const Field& eta = s.eta;
  const Field& psi = s.psi;
  const Field G = dirichlet_neumann(eta, psi, geo, o.nz, o.dn);
  auto [B, V] = compute_B_V(eta, psi, G);
  const Symbol lam = dn_symbol(eta);
  const Symbol h = curvature_symbol(eta);

  const bool smooth = eps > 0.0;
  std::optional<Mollifier> mol;
  Symbol p, wp, q, qinv;
  if (smooth) {
    mol = mollifier_symbol(eta, eps);
    const Symmetrizer S = symmetrizer(eta);
    p = S.p;
    q = S.q;
    wp = parametrix(eta, p);
    qinv = Symbol(eta.grid(), 0.0, {hom::inv(q.principal())});
  }
  auto off = [&](const Field& u) { return quantize_dense(mol->complement, u, cut); };
  auto J = [&](const Field& u) { return smooth ? u - off(u) : u; };

  const Field Jeta = J(eta), Jpsi = J(psi);
  Field eta_t = -paraproduct(V, dx(Jeta), cut);
  Field psi_t = -paraproduct(V, dx(Jpsi), cut);

  Field w1 = eta;
  Field w2 = psi - paraproduct(B, eta, cut);
  if (smooth) {
    w1 = w1 - quantize(wp, off(quantize(p, w1, cut)), cut);
    w2 = w2 - quantize(qinv, off(quantize(q, w2, cut)), cut);
  }
  const Field y1 = -quantize(lam, w2, cut);
  const Field y2 = geo.kappa * quantize(h, w1, cut);
  eta_t = eta_t - y1;
  psi_t = psi_t - (y2 + paraproduct(B, y1, cut));

  Paralinear f;
  Field Bj = B;
  if (smooth) {
    const Field Gj = dirichlet_neumann(Jeta, Jpsi, geo, o.nz, o.dn);
    auto [b, v] = compute_B_V(Jeta, Jpsi, Gj);
    Bj = b;
    f = paralinear_residuals(Jeta, Jpsi, Gj, b, v, geo, cut);
  } else {
    f = paralinear_residuals(eta, psi, G, B, V, geo, cut);
  }
  eta_t = eta_t + f.f1;
  psi_t = psi_t + f.f2 + paraproduct(Bj, f.f1, cut);
  return {eta_t, psi_t};
}

inline Tendency rhs(const WaveState& s, const Geometry& geo, const EvolutionOptions& o) {
  if (o.system == System::mollified) return mollified_rhs(s, o.epsilon, geo, o);
  return zakharov_rhs(s, geo, o);
}

// ---------------------------------------------------------------------------
// Time stepping.

namespace detail {

// f(A) = alpha I + beta A for A = h [[0, a], [-b, 0]], A^2 = -theta^2 I.
struct MatFn {
  double alpha = 0.0, beta = 0.0;
};

template <class F>
MatFn contour(F f, double theta, int points = 64) {
  const double R = theta + 1.0;
  cplx sa{}, sb{};
  for (int j = 0; j < points; ++j) {
    const cplx z = R * std::exp(I * (2.0 * pi * (j + 0.5) / points));
    const cplx fz = f(z);
    const cplx den = z * z + theta * theta;
    sa += fz * z * z / den;
    sb += fz * z / den;
  }
  return {sa.real() / points, sb.real() / points};
}

struct ModeCoeffs {
  double a = 0.0, b = 0.0;  // generator [[0, a], [-b, 0]]
  MatFn E, E2, Q, f1, f2, f3;
};

inline std::array<cplx, 2> apply(const MatFn& m, const ModeCoeffs& c, double h, cplx x, cplx y) {
  return {m.alpha * x + m.beta * h * c.a * y, m.alpha * y - m.beta * h * c.b * x};
}

}  // namespace detail

// Per-mode exponential integrator coefficients for the flat linearization.
class Etdrk4 {
 public:
  Etdrk4(const Grid& g, const Geometry& geo, double dt) : grid_(g), dt_(dt) {
    const int n = g.n();
    modes_.resize(n);
    for (int k = 0; k < n; ++k) {
      auto& m = modes_[k];
      const double xi = g.xi(k);
      m.a = flat_dn(xi, geo);
      m.b = restoring(xi, geo);
      const double theta = dt * std::sqrt(m.a * m.b);
      const double th2 = 0.5 * theta;
      m.E = {std::cos(theta), theta > 0.0 ? std::sin(theta) / theta : 1.0};
      m.E2 = {std::cos(th2), theta > 0.0 ? std::sin(th2) / theta : 0.5};
      m.Q = detail::contour([](cplx z) { return (std::exp(z / 2.0) - 1.0) / z; }, theta);
      m.f1 = detail::contour(
          [](cplx z) { return (-4.0 - z + std::exp(z) * (4.0 - 3.0 * z + z * z)) / (z * z * z); }, theta);
      m.f2 = detail::contour([](cplx z) { return (2.0 + z + std::exp(z) * (z - 2.0)) / (z * z * z); }, theta);
      m.f3 = detail::contour(
          [](cplx z) { return (-4.0 - 3.0 * z - z * z + std::exp(z) * (4.0 - z)) / (z * z * z); }, theta);
    }
  }

  double dt() const { return dt_; }

  template <class Rhs>
  WaveState step(const WaveState& s, Rhs&& f) const {
    const int n = grid_.n();
    const double h = dt_;
    using Spec = std::array<CVec, 2>;
    auto spec = [](const WaveState& w) { return Spec{w.eta.spectrum(), w.psi.spectrum()}; };
    auto state = [&](const Spec& c, double t) {
      return WaveState{t, Field::from_spectrum(grid_, c[0], true), Field::from_spectrum(grid_, c[1], true)};
    };
    // N(u) = rhs(u) - L u in spectral form.
    auto nonlinear = [&](const WaveState& w, const Spec& c) {
      const Tendency td = f(w);
      Spec r{td.eta_t.spectrum(), td.psi_t.spectrum()};
      for (int k = 0; k < n; ++k) {
        r[0][k] -= modes_[k].a * c[1][k];
        r[1][k] += modes_[k].b * c[0][k];
      }
      return r;
    };
    auto combine = [&](auto&& body) {
      Spec out{CVec(n), CVec(n)};
      for (int k = 0; k < n; ++k) {
        const auto v = body(k);
        out[0][k] = v[0];
        out[1][k] = v[1];
      }
      return out;
    };
    auto mat = [&](const detail::MatFn& m, int k, const Spec& c) {
      return detail::apply(m, modes_[k], h, c[0][k], c[1][k]);
    };
    auto scaled = [&](const detail::MatFn& m, int k, const Spec& c) {
      auto v = mat(m, k, c);
      return std::array<cplx, 2>{h * v[0], h * v[1]};
    };

    const Spec u = spec(s);
    const Spec Nu = nonlinear(s, u);
    const Spec a = combine([&](int k) {
      auto e = mat(modes_[k].E2, k, u);
      auto q = scaled(modes_[k].Q, k, Nu);
      return std::array<cplx, 2>{e[0] + q[0], e[1] + q[1]};
    });
    const Spec Na = nonlinear(state(a, s.t + 0.5 * h), a);
    const Spec b = combine([&](int k) {
      auto e = mat(modes_[k].E2, k, u);
      auto q = scaled(modes_[k].Q, k, Na);
      return std::array<cplx, 2>{e[0] + q[0], e[1] + q[1]};
    });
    const Spec Nb = nonlinear(state(b, s.t + 0.5 * h), b);
    Spec mix{CVec(n), CVec(n)};
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < 2; ++i) mix[i][k] = 2.0 * Nb[i][k] - Nu[i][k];
    const Spec c = combine([&](int k) {
      auto e = mat(modes_[k].E2, k, a);
      auto q = scaled(modes_[k].Q, k, mix);
      return std::array<cplx, 2>{e[0] + q[0], e[1] + q[1]};
    });
    const Spec Nc = nonlinear(state(c, s.t + h), c);
    Spec nab{CVec(n), CVec(n)};
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < 2; ++i) nab[i][k] = Na[i][k] + Nb[i][k];
    const Spec out = combine([&](int k) {
      auto e = mat(modes_[k].E, k, u);
      auto t1 = scaled(modes_[k].f1, k, Nu);
      auto t2 = scaled(modes_[k].f2, k, nab);
      auto t3 = scaled(modes_[k].f3, k, Nc);
      return std::array<cplx, 2>{e[0] + t1[0] + 2.0 * t2[0] + t3[0], e[1] + t1[1] + 2.0 * t2[1] + t3[1]};
    });
    return state(out, s.t + h);
  }

 private:
  Grid grid_;
  double dt_;
  std::vector<detail::ModeCoeffs> modes_;
};

template <class Rhs>
WaveState rk4_step(const WaveState& s, double dt, Rhs&& f) {
  auto shift = [](const WaveState& w, const Tendency& d, double h, double t) {
    return WaveState{t, w.eta + h * d.eta_t, w.psi + h * d.psi_t};
  };
  const Tendency k1 = f(s);
  const Tendency k2 = f(shift(s, k1, 0.5 * dt, s.t + 0.5 * dt));
  const Tendency k3 = f(shift(s, k2, 0.5 * dt, s.t + 0.5 * dt));
  const Tendency k4 = f(shift(s, k3, dt, s.t + dt));
  return {s.t + dt, s.eta + (dt / 6.0) * (k1.eta_t + 2.0 * k2.eta_t + 2.0 * k3.eta_t + k4.eta_t),
          s.psi + (dt / 6.0) * (k1.psi_t + 2.0 * k2.psi_t + 2.0 * k3.psi_t + k4.psi_t)};
}

// Largest dt * omega_max accepted by each scheme.
inline double stability_limit(Scheme s) { return s == Scheme::rk4 ? 2.8 : 2.0; }

inline void check_finite(const WaveState& next, const WaveState& prev) {
  for (const Field* f : {&next.eta, &next.psi})
    for (const auto& z : f->values())
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw EvolutionAbort("evolution: non-finite state at t = " + std::to_string(next.t), prev);
}

class Stepper {
 public:
  Stepper(const Grid& g, const Geometry& geo, double dt, EvolutionOptions opt)
      : geo_(geo), opt_(std::move(opt)), dt_(dt) {
    geo.validate();
    if (!(dt > 0.0)) throw ValidationError("step: dt must be positive");
    if (dt * omega_max(g, geo) > stability_limit(opt_.scheme))
      throw ValidationError("step: dt exceeds the stability envelope of the scheme");
    if (opt_.scheme == Scheme::etdrk4) etd_.emplace(g, geo, dt);
  }

  double dt() const { return dt_; }

  WaveState step(const WaveState& s) const {
    auto f = [this](const WaveState& w) { return rhs(w, geo_, opt_); };
    WaveState next;
    try {
      next = opt_.scheme == Scheme::etdrk4 ? etd_->step(s, f) : rk4_step(s, dt_, f);
    } catch (const GeometryError& e) {
      throw EvolutionAbort(std::string("evolution: ") + e.what(), s);
    } catch (const SolverError& e) {
      throw EvolutionAbort(std::string("evolution: ") + e.what(), s);
    }
    check_finite(next, s);
    return next;
  }

 private:
  Geometry geo_;
  EvolutionOptions opt_;
  double dt_;
  std::optional<Etdrk4> etd_;
};

inline WaveState step(const WaveState& s, double dt, const Geometry& geo, const EvolutionOptions& o = {}) {
  return Stepper(s.eta.grid(), geo, dt, o).step(s);
}

// ---------------------------------------------------------------------------
// Energy, diagonal variables, diagnostics.

struct Energy {
  double total = 0.0, quadratic = 0.0;
};

// Total: (1/2) <psi, G psi> + (g/2) |eta|^2 + kappa int (sqrt(1 + eta_x^2) - 1).
inline Energy hamiltonian(const WaveState& s, const Geometry& geo, const EvolutionOptions& o = {}) {
  const Grid& g = s.eta.grid();
  const Field G = dirichlet_neumann(s.eta, s.psi, geo, o.nz, o.dn);
  const Field ex = dx(s.eta);
  double cap = 0.0;
  for (int j = 0; j < g.n(); ++j) {
    const double e = ex[j].real();
    cap += e * e / (std::sqrt(1.0 + e * e) + 1.0);
  }
  Energy E;
  E.total = 0.5 * inner(s.psi, G).real() + 0.5 * geo.g * inner(s.eta, s.eta).real() + geo.kappa * cap * g.dx();
  const CVec ce = s.eta.spectrum(), cp = s.psi.spectrum();
  double q = 0.0;
  for (int k = 0; k < g.n(); ++k) {
    const double xi = g.xi(k);
    q += flat_dn(xi, geo) * std::norm(cp[k]) + restoring(xi, geo) * std::norm(ce[k]);
  }
  E.quadratic = 0.5 * g.length() * q;
  return E;
}

// a_hat = ((mu / w)^{1/4} eta_hat - i (w / mu)^{1/4} psi_hat) / sqrt 2, with
// w = |xi| tanh(|xi| h), mu = g + kappa xi^2; the mean mode is set to 0.
// Under the linear flow each a_hat_k rotates as exp(+i omega_k t).
inline Field diagonalize(const WaveState& s, const Geometry& geo) {
  const Grid& g = s.eta.grid();
  const CVec ce = s.eta.spectrum(), cp = s.psi.spectrum();
  CVec a(g.n(), cplx{});
  for (int k = 0; k < g.n(); ++k) {
    const double xi = g.xi(k);
    const double w = flat_dn(xi, geo), mu = restoring(xi, geo);
    if (w == 0.0 || mu == 0.0) continue;
    a[k] = (std::pow(mu / w, 0.25) * ce[k] - I * std::pow(w / mu, 0.25) * cp[k]) / std::sqrt(2.0);
  }
  return Field::from_spectrum(g, a, false);
}

struct DiagnosticRecord {
  double t = 0.0;
  double eta_norm = 0.0;  // H^{s+1/2}
  double psi_norm = 0.0;  // H^s
  double M = 0.0;         // running sup of the pair norm
  double H_total = 0.0, H0 = 0.0;
  double w = 0.0;  // weighted smoothing integrand
};

struct DiagnosticParams {
  double s = 2.5;
  double delta = 0.1;
};

inline double pair_norm(const WaveState& st, double s) {
  const double a = sobolev_norm(st.eta, s + 0.5), b = sobolev_norm(st.psi, s);
  return std::sqrt(a * a + b * b);
}

inline double smoothing_integrand(const WaveState& st, double s, double delta) {
  const double a = weighted_norm(st.eta, s + 0.75, delta), b = weighted_norm(st.psi, s + 0.25, delta);
  return a * a + b * b;
}

inline DiagnosticRecord diagnose(const WaveState& st, const Geometry& geo, const DiagnosticParams& d,
                                 double M_prev, const EvolutionOptions& o = {}) {
  DiagnosticRecord r;
  r.t = st.t;
  r.eta_norm = sobolev_norm(st.eta, d.s + 0.5);
  r.psi_norm = sobolev_norm(st.psi, d.s);
  r.M = std::max(M_prev, pair_norm(st, d.s));
  const Energy E = hamiltonian(st, geo, o);
  r.H_total = E.total;
  r.H0 = E.quadratic;
  r.w = smoothing_integrand(st, d.s, d.delta);
  return r;
}

struct Trajectory {
  std::vector<WaveState> states;
  std::vector<DiagnosticRecord> records;
};

// Runs for `steps` steps and samples every `stride` steps (the endpoint is always kept).
inline Trajectory simulate(const WaveState& init, const Geometry& geo, double dt, int steps,
                           const EvolutionOptions& o, const DiagnosticParams& d, int stride = 1,
                           bool with_records = true) {
  if (steps < 0 || stride < 1) throw ValidationError("simulate: steps >= 0 and stride >= 1 required");
  const Stepper stepper(init.eta.grid(), geo, dt, o);
  Trajectory tr;
  double M = 0.0;
  auto sample = [&](const WaveState& st) {
    tr.states.push_back(st);
    if (with_records) {
      tr.records.push_back(diagnose(st, geo, d, M, o));
      M = tr.records.back().M;
    }
  };
  WaveState s = init;
  sample(s);
  for (int i = 1; i <= steps; ++i) {
    s = stepper.step(s);
    if (i % stride == 0 || i == steps) sample(s);
  }
  return tr;
}

struct MonitorReport {
  std::vector<double> t, M;
  double intercept = 0.0;  // M(0)
  double slope = 0.0;      // smallest c with M(t) <= M(0) + c t on the samples
  std::vector<int> jumps;  // sample indices where M grew by more than 10%
};

inline MonitorReport monitor(const std::vector<WaveState>& traj, double s) {
  if (traj.empty()) throw ValidationError("monitor: empty trajectory");
  MonitorReport r;
  double M = 0.0;
  for (size_t i = 0; i < traj.size(); ++i) {
    const double prev = M;
    M = std::max(M, pair_norm(traj[i], s));
    r.t.push_back(traj[i].t);
    r.M.push_back(M);
    if (i > 0 && M > 1.1 * prev) r.jumps.push_back(static_cast<int>(i));
  }
  r.intercept = r.M.front();
  for (size_t i = 1; i < r.M.size(); ++i) {
    const double dt = r.t[i] - r.t[0];
    if (dt > 0.0) r.slope = std::max(r.slope, (r.M[i] - r.intercept) / dt);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Symmetrized unknowns and their residuals.

// Directional derivative of a state-dependent field along (eta_t, psi_t).
template <class F>
Field state_derivative(F&& f, const WaveState& s, const Tendency& d, double tau = 1e-4) {
  const WaveState plus{s.t, s.eta + tau * d.eta_t, s.psi + tau * d.psi_t};
  const WaveState minus{s.t, s.eta - tau * d.eta_t, s.psi - tau * d.psi_t};
  return (1.0 / (2.0 * tau)) * (f(plus) - f(minus));
}

struct FrequencyFit {
  int mode = 0;
  double omega = 0.0;     // least-squares slope of the unwrapped phase of a_hat_k
  double expected = 0.0;  // sqrt((g + kappa xi^2) |xi| tanh(|xi| h))
  double rel_error = 0.0;
};

inline FrequencyFit fit_frequency(const std::vector<WaveState>& traj, const Geometry& geo, int mode) {
  if (traj.size() < 3) throw ValidationError("fit_frequency: need at least three samples");
  const Grid& g = traj.front().eta.grid();
  if (mode < 1 || 2 * mode >= g.n()) throw ValidationError("fit_frequency: mode out of range");
  RVec t, ph;
  double prev = 0.0, acc = 0.0;
  for (size_t i = 0; i < traj.size(); ++i) {
    const double a = std::arg(diagonalize(traj[i], geo).spectrum()[g.index(mode)]);
    if (i > 0) {
      double d = a - prev;
      d -= 2.0 * pi * std::round(d / (2.0 * pi));
      acc += d;
    }
    prev = a;
    t.push_back(traj[i].t);
    ph.push_back(acc);
  }
  FrequencyFit f;
  f.mode = mode;
  f.omega = lsq_slope(t, ph);
  f.expected = dispersion(g.xi(g.index(mode)), geo);
  f.rel_error = std::abs(f.omega - f.expected) / f.expected;
  return f;
}

struct SymmetrizedResidual {
  Field Phi1, Phi2, F1, F2;
};

// F1 = d_t Phi1 + T_V Phi1_x - T_gamma Phi2, F2 = d_t Phi2 + T_V Phi2_x + T_gamma Phi1,
// with time derivatives taken along the Zakharov flow.
inline SymmetrizedResidual symmetrized_residual(const WaveState& s, const Geometry& geo,
                                                const EvolutionOptions& o = {}) {
  const Cutoffs& cut = o.cut;
  const Tendency d = zakharov_rhs(s, geo, o);
  const WaveCache c = derive(s, geo, o);
  const Symmetrizer S = symmetrizer(s.eta);
  auto phi1 = [&](const WaveState& w) { return quantize(symmetrizer(w.eta).p, s.eta, cut); };
  auto phi2 = [&](const WaveState& w) {
    const Field G = dirichlet_neumann(w.eta, w.psi, geo, o.nz, o.dn);
    const Field B = compute_B_V(w.eta, w.psi, G).first;
    return quantize(symmetrizer(w.eta).q, s.psi - paraproduct(B, s.eta, cut), cut);
  };
  // Chain rule: symbol variation plus the operator applied to the state variation.
  const Field dPhi1 = state_derivative(phi1, s, d) + quantize(S.p, d.eta_t, cut);
  const Field dU = d.psi_t - paraproduct(c.B, d.eta_t, cut);
  const Field dPhi2 = state_derivative(phi2, s, d) + quantize(S.q, dU, cut);
  SymmetrizedResidual r;
  r.Phi1 = c.Phi1;
  r.Phi2 = c.Phi2;
  r.F1 = dPhi1 + paraproduct(c.V, dx(c.Phi1), cut) - quantize(S.gamma, c.Phi2, cut);
  r.F2 = dPhi2 + paraproduct(c.V, dx(c.Phi2), cut) + quantize(S.gamma, c.Phi1, cut);
  return r;
}

// ---------------------------------------------------------------------------
// Mollifier commutator probe.

struct CommutatorProbe {
  double eps = 0.0;
  RVec norms;  // ||(J T_gamma - T_gamma J) u_j||_{H^mu} per shell
  double sup = 0.0;
  double slope = 0.0;  // growth rate in j (bounded operators: <= 0 up to noise)
};

inline CommutatorProbe mollifier_commutator(const Field& eta, double eps, double mu, int jmin, int jmax,
                                            std::uint64_t seed = 0, const Cutoffs& cut = {}) {
  const Grid& g = eta.grid();
  const Symbol gamma = symmetrizer(eta).gamma;
  const Mollifier m = mollifier_symbol(eta, eps);
  auto J = [&](const Field& u) { return u - quantize_dense(m.complement, u, cut); };
  CommutatorProbe r;
  r.eps = eps;
  RVec xs, ys;
  const double xi_max = (g.n() / 2 - 1) * g.dxi();
  for (int j = jmin; j <= jmax; ++j) {
    if (std::ldexp(1.0, j + 1) * (1.0 + cut.eps2) >= xi_max) continue;
    const Field u = probe_bump(g, j, mu, seed);
    const Field d = J(quantize(gamma, u, cut)) - quantize(gamma, J(u), cut);
    const double v = sobolev_norm(d, mu);
    r.norms.push_back(v);
    r.sup = std::max(r.sup, v);
    if (v > 0.0) {
      xs.push_back(j);
      ys.push_back(std::log2(v));
    }
  }
  if (xs.size() >= 2) r.slope = lsq_slope(xs, ys);
  return r;
}

}  // namespace capwave

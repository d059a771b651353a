#pragma once

#include <boost/math/special_functions/beta.hpp>

#include "evolution.hpp"

namespace capwave {

// Escape function a(x, xi) = (a0/<x>) psi0 + (2 eps + f(|a0|)) (psi+ - psi-),
// a0 = x sgn(xi), f(s) = int_0^s <y>^{-1-delta} dy. It depends on xi through
// sgn(xi) only, so d_xi a = 0 for xi != 0.
class EscapeSymbol {
 public:
  EscapeSymbol(double delta, double eps_doi) : delta_(delta), eps_(eps_doi) {
    if (!(delta > 0.0)) throw ValidationError("escape: delta must be positive");
    if (!(eps_doi > 0.0)) throw ValidationError("escape: eps_doi must be positive");
  }

  double delta() const { return delta_; }
  double eps() const { return eps_; }

  // phi: 0 for y <= 1, 1 for y >= 2.
  static double phi(double y) { return smooth_step(y - 1.0); }
  static double dphi(double y) { return smooth_step_derivative(y - 1.0); }
  double phi_plus(double y) const { return phi(y / eps_); }
  double phi_minus(double y) const { return phi(-y / eps_); }
  double phi_zero(double y) const { return 1.0 - phi_plus(y) - phi_minus(y); }
  double dphi_plus(double y) const { return dphi(y / eps_) / eps_; }
  double dphi_minus(double y) const { return -dphi(-y / eps_) / eps_; }

  // f(s) = f(inf) I_{s^2/(1+s^2)}(1/2, delta/2); the complementary form keeps precision for large s.
  double f(double s) const {
    if (s <= 0.0) return 0.0;
    const double a = 0.5, b = 0.5 * delta_;
    if (s <= 1.0) return f_limit() * boost::math::ibeta(a, b, s * s / (1.0 + s * s));
    return f_limit() * (1.0 - boost::math::ibeta(b, a, 1.0 / (1.0 + s * s)));
  }
  double df(double s) const { return std::pow(1.0 + s * s, -0.5 * (1.0 + delta_)); }
  // f(infinity) = sqrt(pi) Gamma(delta/2) / (2 Gamma((1+delta)/2)).
  double f_limit() const {
    return 0.5 * std::sqrt(pi) * std::tgamma(0.5 * delta_) / std::tgamma(0.5 * (1.0 + delta_));
  }

  // y = a0 / <x> and its x-derivative.
  static double ratio(double x, double sg) { return sg * x / japanese(x); }
  static double dratio(double x, double sg) { return sg / std::pow(japanese(x), 3); }

  double value(double x, double sg) const {
    const double y = ratio(x, sg);
    return y * phi_zero(y) + (2.0 * eps_ + f(std::abs(x))) * (phi_plus(y) - phi_minus(y));
  }

  double dx(double x, double sg) const {
    const double y = ratio(x, sg), yx = dratio(x, sg);
    const double dp = dphi_plus(y), dm = dphi_minus(y);
    const double sx = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
    return yx * phi_zero(y) - y * (dp + dm) * yx + df(std::abs(x)) * sx * (phi_plus(y) - phi_minus(y)) +
           (2.0 * eps_ + f(std::abs(x))) * (dp - dm) * yx;
  }

  // Column function on a grid; x-derivatives are analytic (a is not periodic).
  GeneralSymbol symbol(const Grid& g) const {
    const EscapeSymbol self = *this;
    GeneralSymbol s;
    s.grid = g;
    s.order = 0.0;
    s.value = [self, g](double xi) {
      CVec c(g.n());
      const double sg = xi > 0 ? 1.0 : -1.0;
      for (int j = 0; j < g.n(); ++j) c[j] = self.value(g.x(j), sg);
      return c;
    };
    s.dxi_fn = [g](double) { return CVec(g.n(), cplx{}); };
    s.dx_fn = [self, g](double xi) {
      CVec c(g.n());
      const double sg = xi > 0 ? 1.0 : -1.0;
      for (int j = 0; j < g.n(); ++j) c[j] = self.dx(g.x(j), sg);
      return c;
    };
    s.reality = false;  // odd in sgn(xi)
    return s;
  }

 private:
  double delta_, eps_;
};

inline EscapeSymbol build_escape(double delta, double eps_doi) { return EscapeSymbol(delta, eps_doi); }

// The five bracket pieces of {c |xi|^{3/2}, a} at one phase-space point.
struct BracketTerms {
  double I1 = 0, I2 = 0, I3 = 0, I4 = 0, I5 = 0;
  double sum() const { return I1 + I2 + I3 + I4 + I5; }
};

inline BracketTerms bracket_terms(const EscapeSymbol& e, double x, double xi, double c) {
  const double sg = xi > 0 ? 1.0 : -1.0;
  const double ax = std::abs(x), jx = japanese(x);
  const double y = EscapeSymbol::ratio(x, sg);
  const double r12 = std::sqrt(std::abs(xi));
  // {c|xi|^{3/2}, F(x, sgn xi)} = (3/2) c sgn(xi) |xi|^{1/2} d_x F.
  const double base = 1.5 * c * sg * r12;
  const double ratio_bracket = base * EscapeSymbol::dratio(x, sg);  // {., a0/<x>} >= 0
  BracketTerms t;
  t.I1 = 1.5 * c * r12 / jx * e.phi_zero(y);
  t.I2 = -1.5 * c * sg * r12 * (sg * x) * x / (jx * jx * jx) * e.phi_zero(y);
  t.I3 = -std::abs(y) * ratio_bracket * e.dphi_plus(std::abs(y));
  t.I4 = 1.5 * c * r12 * std::pow(jx, -1.0 - e.delta()) * (e.phi_plus(y) + e.phi_minus(y));
  t.I5 = (2.0 * e.eps() + e.f(ax)) * ratio_bracket * e.dphi_plus(std::abs(y));
  return t;
}

struct BoundReport {
  double K_measured = 0.0;
  double x_min = 0.0, xi_min = 0.0;  // location of the minimum
  double i35_min = 0.0;              // min of I3 + I5
  double lower_ratio = 0.0;          // min of bracket / (c |xi|^{1/2} <x>^{-1-delta})
  double split_error = 0.0;          // max |bracket - (I1 + ... + I5)|
  int samples = 0;
  bool pass = false;
};

// Frequencies for the phase-space sample: log-spaced |xi| in [1/2, xi_top], both signs.
inline RVec phase_frequencies(const Grid& g, int count) {
  const double top = (g.n() / 2 - 1) * g.dxi();
  RVec xs;
  for (int i = 0; i < count; ++i) {
    const double r = 0.5 * std::pow(top / 0.5, double(i) / std::max(1, count - 1));
    xs.push_back(r);
    xs.push_back(-r);
  }
  return xs;
}

// min of {c |xi|^{3/2}, a} <x>^{1+delta} |xi|^{-1/2} with the bracket from poisson_bracket.
inline BoundReport bound_check(const Field& eta, const EscapeSymbol& esc, int xi_count = 20) {
  const Grid& g = eta.grid();
  const Slopes sl = slopes(eta);
  RVec c(g.n());
  for (int j = 0; j < g.n(); ++j) c[j] = std::pow(1.0 + sl.ex[j] * sl.ex[j], -0.75);
  const Symbol flow(g, 1.5, {hom::mul(hom::of_x(c), hom::constant(g.n(), 1.5, 1.0, 1.0))});
  const GeneralSymbol br = poisson_bracket(general(flow), esc.symbol(g));
  BoundReport r;
  r.K_measured = std::numeric_limits<double>::infinity();
  r.i35_min = std::numeric_limits<double>::infinity();
  r.lower_ratio = std::numeric_limits<double>::infinity();
  for (double xi : phase_frequencies(g, xi_count)) {
    const CVec col = br.column(xi);
    for (int j = 0; j < g.n(); ++j) {
      const double x = g.x(j);
      const double b = col[j].real();
      const double k = b * std::pow(japanese(x), 1.0 + esc.delta()) / std::sqrt(std::abs(xi));
      if (k < r.K_measured) {
        r.K_measured = k;
        r.x_min = x;
        r.xi_min = xi;
      }
      const BracketTerms t = bracket_terms(esc, x, xi, c[j]);
      r.i35_min = std::min(r.i35_min, t.I3 + t.I5);
      r.split_error = std::max(r.split_error, std::abs(b - t.sum()) / (1.0 + std::abs(b)));
      r.lower_ratio = std::min(r.lower_ratio, k / c[j]);
      ++r.samples;
    }
  }
  r.pass = r.K_measured > 0.0 && r.i35_min >= 0.0 && r.lower_ratio >= 1.0;
  return r;
}

struct EscapeSelection {
  EscapeSymbol escape;
  BoundReport report;
  int halvings = 0;
};

// Halves eps_doi from eps0 until every surface in the family passes bound_check.
inline EscapeSelection select_escape(const std::vector<Field>& etas, double delta, double eps0 = 0.05,
                                     int max_halvings = 20) {
  if (etas.empty()) throw ValidationError("select_escape: empty family");
  double eps = eps0;
  for (int h = 0; h <= max_halvings; ++h, eps *= 0.5) {
    const EscapeSymbol esc(delta, eps);
    BoundReport worst;
    worst.K_measured = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (const auto& eta : etas) {
      const BoundReport r = bound_check(eta, esc);
      if (r.K_measured < worst.K_measured) worst = r;
      ok = ok && r.pass;
    }
    if (ok) return {esc, worst, h};
    if (h == max_halvings) return {esc, worst, h};
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Scalar reduction.

struct ScalarReduction {
  Field Phi;
  Symbol gamma;
  Field V;
};

inline ScalarReduction scalar_reduce(const WaveState& s, const Geometry& geo, const EvolutionOptions& o = {}) {
  const WaveCache c = derive(s, geo, o);
  return {c.Phi1 + I * c.Phi2, symmetrizer(s.eta).gamma, c.V};
}

// d = 1 closed form c |xi|^{3/2} - (3i/4) xi |xi|^{-1/2} c_x.
inline Symbol gamma_closed_form(const Field& eta) {
  const Grid& g = eta.grid();
  const Slopes sl = slopes(eta);
  RVec c(g.n());
  for (int j = 0; j < g.n(); ++j) c[j] = std::pow(1.0 + sl.ex[j] * sl.ex[j], -0.75);
  const CVec cx = hom::dx_values(g, CVec(c.begin(), c.end()));
  HomPart sub{0.5, CVec(g.n()), CVec(g.n())};
  for (int j = 0; j < g.n(); ++j) {
    sub.plus[j] = -0.75 * I * cx[j];
    sub.minus[j] = 0.75 * I * cx[j];
  }
  return Symbol(g, 1.5, {hom::mul(hom::of_x(c), hom::constant(g.n(), 1.5, 1.0, 1.0)), sub});
}

inline Field scalar_residual(const WaveState& s, const Geometry& geo, const EvolutionOptions& o = {}) {
  const SymmetrizedResidual r = symmetrized_residual(s, geo, o);
  return r.F1 + I * r.F2;
}

// ---------------------------------------------------------------------------
// Kato integral.

struct KatoReport {
  double weighted = 0.0;    // int ||<x>^{-1/2-d} eta||^2_{H^{s+3/4}} + ||<x>^{-1/2-d} psi||^2_{H^{s+1/4}}
  double unweighted = 0.0;  // same without the weight
  double sup_energy = 0.0;  // sup_t ||eta||^2_{H^{s+1/2}} + ||psi||^2_{H^s}
  bool undersampled = false;
};

inline double trapezoid(const RVec& t, const RVec& y) {
  double s = 0.0;
  for (size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

inline KatoReport kato_integral(const std::vector<WaveState>& traj, double s, double delta, const Geometry& geo) {
  KatoReport r;
  if (traj.empty()) return r;
  const double wmax = omega_max(traj.front().eta.grid(), geo);
  RVec t, w, u;
  for (size_t i = 0; i < traj.size(); ++i) {
    const WaveState& st = traj[i];
    t.push_back(st.t);
    w.push_back(smoothing_integrand(st, s, delta));
    const double a = sobolev_norm(st.eta, s + 0.75), b = sobolev_norm(st.psi, s + 0.25);
    u.push_back(a * a + b * b);
    const double p = pair_norm(st, s);
    r.sup_energy = std::max(r.sup_energy, p * p);
    if (i > 0 && (t[i] - t[i - 1]) * wmax > pi) r.undersampled = true;
  }
  r.weighted = trapezoid(t, w);
  r.unweighted = trapezoid(t, u);
  return r;
}

// ---------------------------------------------------------------------------
// Garding-type fit <T_d u, u> >= a ||<x>^{-1/2-delta} u||^2_{H^{1/4}} - A ||u||^2.

inline Symbol garding_symbol(const Grid& g, double delta, double K = 1.0) {
  RVec w(g.n());
  for (int j = 0; j < g.n(); ++j) w[j] = K * std::pow(japanese(g.x(j)), -1.0 - 2.0 * delta);
  return Symbol(g, 0.5, {hom::mul(hom::of_x(w), hom::constant(g.n(), 0.5, 1.0, 1.0))});
}

struct GardingReport {
  double a = 0.0, A = 0.0;
  int witness = -1;  // sample fixing a
  bool feasible = false;
  RVec Q, W, N;
};

// min over sampled (x, xi) of d / (<x>^{-1-2 delta} |xi|^{1/2}).
inline double symbol_lower_constant(const Symbol& d, double delta, int xi_count = 20) {
  const Grid& g = d.grid();
  const GeneralSymbol gd = general(d);
  double k = std::numeric_limits<double>::infinity();
  for (double xi : phase_frequencies(g, xi_count)) {
    for (double s : {-1.0, 1.0}) {
      const CVec c = gd.column(s * xi);
      for (int j = 0; j < g.n(); ++j)
        k = std::min(k, c[j].real() / (std::pow(japanese(g.x(j)), -1.0 - 2.0 * delta) * std::sqrt(xi)));
    }
  }
  return k;
}

// a is the largest value with Q >= a (W - kappa N) on every sample, capped by the
// pointwise constant of d; A is then the smallest value making Q >= a W - A N hold.
inline GardingReport garding_fit(const Symbol& d, double delta, const std::vector<Field>& samples,
                                 double kappa = 2.0, const Cutoffs& cut = {}) {
  GardingReport r;
  for (const auto& u : samples) {
    r.Q.push_back(inner(quantize(d, u, cut), u).real());
    const double w = weighted_norm(u, 0.25, delta);
    r.W.push_back(w * w);
    r.N.push_back(std::pow(l2_norm(u), 2));
  }
  // gap > 0 bounds a from above, gap < 0 from below.
  double hi = symbol_lower_constant(d, delta), lo = 0.0;
  int hi_witness = -1;
  bool ok = true;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double gap = r.W[i] - kappa * r.N[i];
    if (gap > 0.0) {
      if (r.Q[i] / gap < hi) {
        hi = r.Q[i] / gap;
        hi_witness = static_cast<int>(i);
      }
    } else if (gap < 0.0) {
      lo = std::max(lo, r.Q[i] / gap);
    } else if (r.Q[i] < 0.0) {
      ok = false;
    }
  }
  r.a = hi;
  r.witness = hi_witness;
  for (size_t i = 0; i < samples.size(); ++i) {
    if (r.N[i] <= 0.0) continue;
    const double need = (r.a * r.W[i] - r.Q[i]) / r.N[i];
    if (need > r.A) {
      r.A = need;
      if (hi_witness < 0) r.witness = static_cast<int>(i);
    }
  }
  r.feasible = ok && r.a > 0.0 && lo <= r.a;
  return r;
}

// ---------------------------------------------------------------------------
// Commutator balance along a run.

// Escape function multiplied by a smooth window vanishing near x = +-L/2.
inline GeneralSymbol tapered_escape(const EscapeSymbol& e, const Grid& g, double margin = 0.15) {
  GeneralSymbol a = e.symbol(g);
  RVec w(g.n());
  const double half = 0.5 * g.length();
  for (int j = 0; j < g.n(); ++j) {
    const double d = (half - std::abs(g.x(j))) / (margin * g.length());
    w[j] = smooth_step(d);
  }
  auto base = a.value;
  a.value = [base, w](double xi) {
    CVec c = base(xi);
    for (size_t j = 0; j < c.size(); ++j) c[j] *= w[j];
    return c;
  };
  a.dx_fn = nullptr;  // periodic now: spectral x-derivative
  return a;
}

struct BalanceReport {
  double change = 0.0;     // <T_a Phi, Phi>(T) - <T_a Phi, Phi>(0)
  double integral = 0.0;   // int Re(<T_a Phi_t, Phi> + <T_a Phi, Phi_t>) dt
  double coercive = 0.0;   // int Re <[i T_gamma, T_a] Phi, Phi> dt
  double data = 0.0;       // |Phi(0)|^2 + |Phi(T)|^2 + int (|Phi|^2 + |F|^2) dt
  double ratio = 0.0;      // coercive / data
  double mismatch = 0.0;   // |change - integral| / max(|change|, |integral|, tiny)
};

inline BalanceReport commutator_balance(const std::vector<WaveState>& traj, const EscapeSymbol& esc,
                                        const Geometry& geo, const EvolutionOptions& o = {}) {
  if (traj.size() < 2) throw ValidationError("commutator_balance: need at least two samples");
  const Grid& g = traj.front().eta.grid();
  const GeneralSymbol a = tapered_escape(esc, g);
  const Cutoffs& cut = o.cut;
  RVec t, pairing, rate, coer, mass;
  for (const auto& st : traj) {
    const WaveCache c = derive(st, geo, o);
    const SymmetrizedResidual sr = symmetrized_residual(st, geo, o);
    const Field Phi = sr.Phi1 + I * sr.Phi2;
    const Field F = sr.F1 + I * sr.F2;
    const Symbol gamma = symmetrizer(st.eta).gamma;
    const Field TgPhi = quantize(gamma, Phi, cut);
    const Field Phit = F - paraproduct(c.V, dx(Phi), cut) - I * TgPhi;
    const Field TaPhi = quantize_dense(a, Phi, cut);
    t.push_back(st.t);
    pairing.push_back(inner(TaPhi, Phi).real());
    rate.push_back(inner(quantize_dense(a, Phit, cut), Phi).real() + inner(TaPhi, Phit).real());
    const Field C = I * (quantize(gamma, TaPhi, cut) - quantize_dense(a, TgPhi, cut));
    coer.push_back(inner(C, Phi).real());
    mass.push_back(std::pow(l2_norm(Phi), 2) + std::pow(l2_norm(F), 2));
  }
  BalanceReport r;
  r.change = pairing.back() - pairing.front();
  r.integral = trapezoid(t, rate);
  r.coercive = trapezoid(t, coer);
  r.data = trapezoid(t, mass);
  {
    const WaveCache c0 = derive(traj.front(), geo, o), c1 = derive(traj.back(), geo, o);
    r.data += std::pow(l2_norm(c0.Phi1 + I * c0.Phi2), 2) + std::pow(l2_norm(c1.Phi1 + I * c1.Phi2), 2);
  }
  r.ratio = r.data > 0.0 ? r.coercive / r.data : 0.0;
  const double scale = std::max({std::abs(r.change), std::abs(r.integral), 1e-300});
  r.mismatch = std::abs(r.change - r.integral) / scale;
  return r;
}

}  // namespace capwave

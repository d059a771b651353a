#pragma once

#include <random>

#include "symbols.hpp"

namespace capwave {

// chi(theta, eta) = chi~(|theta|/|eta|) and the low-frequency cutoff psi(eta).
struct Cutoffs {
  double eps1 = 0.1;
  double eps2 = 0.2;

  double chi(double theta, double eta) const {
    if (eta == 0.0) return 0.0;
    const double r = std::abs(theta) / std::abs(eta);
    return 1.0 - smooth_step((r - eps1) / (eps2 - eps1));
  }
  double psi(double eta) const { return smooth_step(std::abs(eta) - 1.0); }
};

namespace detail {

// Shared summation: out(k) = sum_m chi(k-m, m) colspec_m(k-m) psi(m) u(m).
template <class ColSpec>
CVec quantize_sum(const Grid& g, const Cutoffs& cut, const CVec& cu, ColSpec&& colspec) {
  const int n = g.n();
  CVec out(n, cplx{});
  const double dxi = g.dxi();
  for (int m = 0; m < n; ++m) {
    if (g.is_nyquist(m) || cu[m] == cplx{}) continue;
    const double xm = g.xi(m);
    const double ps = cut.psi(xm);
    if (ps == 0.0) continue;
    const CVec cs = colspec(m);
    const int wm = g.wavenumber(m);
    const int tmax = static_cast<int>(std::ceil(cut.eps2 * std::abs(xm) / dxi));
    for (int t = -tmax; t <= tmax; ++t) {
      const int k = wm + t;
      if (k >= n / 2 || k <= -n / 2) continue;
      const double c = cut.chi(t * dxi, xm);
      if (c == 0.0) continue;
      out[g.index(k)] += c * cs[g.index(t)] * ps * cu[m];
    }
  }
  return out;
}

template <class ColSpec>
CVec quantize_adjoint_sum(const Grid& g, const Cutoffs& cut, const CVec& cu, ColSpec&& colspec) {
  const int n = g.n();
  CVec out(n, cplx{});
  const double dxi = g.dxi();
  for (int m = 0; m < n; ++m) {
    if (g.is_nyquist(m)) continue;
    const double xm = g.xi(m);
    const double ps = cut.psi(xm);
    if (ps == 0.0) continue;
    const CVec cs = colspec(m);
    const int wm = g.wavenumber(m);
    const int tmax = static_cast<int>(std::ceil(cut.eps2 * std::abs(xm) / dxi));
    cplx acc{};
    for (int t = -tmax; t <= tmax; ++t) {
      const int k = wm + t;
      if (k >= n / 2 || k <= -n / 2) continue;
      const double c = cut.chi(t * dxi, xm);
      if (c == 0.0) continue;
      acc += c * std::conj(cs[g.index(t)]) * cu[g.index(k)];
    }
    out[m] = ps * acc;
  }
  return out;
}

// Per-part ray spectra; column spectrum at xi is sum_p |xi|^{m_p} S_p(sign).
struct RaySpectra {
  std::vector<double> orders;
  std::vector<CVec> plus, minus;

  explicit RaySpectra(const Symbol& a) {
    for (const auto& p : a.parts()) {
      orders.push_back(p.order);
      plus.push_back(fft::coefficients(p.plus));
      minus.push_back(fft::coefficients(p.minus));
    }
  }
  CVec at(double xi, int n) const {
    CVec c(n, cplx{});
    for (size_t p = 0; p < orders.size(); ++p) {
      const double r = std::pow(std::abs(xi), orders[p]);
      const CVec& s = xi > 0 ? plus[p] : minus[p];
      for (int k = 0; k < n; ++k) c[k] += r * s[k];
    }
    return c;
  }
};

inline Field finish(const Grid& g, const CVec& c, bool real) { return Field::from_spectrum(g, c, real); }

}  // namespace detail

// T_a u through the ray factorization of homogeneous symbols.
inline Field quantize(const Symbol& a, const Field& u, const Cutoffs& cut = {}) {
  if (a.grid() != u.grid()) throw ValidationError("quantize: symbol/grid mismatch");
  const Grid& g = u.grid();
  const detail::RaySpectra rs(a);
  const CVec out = detail::quantize_sum(g, cut, u.spectrum(), [&](int m) { return rs.at(g.xi(m), g.n()); });
  return detail::finish(g, out, u.is_real() && a.preserves_reality());
}

// Reference path: transform a(., xi_m) column by column.
inline Field quantize_dense(const GeneralSymbol& a, const Field& u, const Cutoffs& cut = {}) {
  if (a.grid != u.grid()) throw ValidationError("quantize: symbol/grid mismatch");
  const Grid& g = u.grid();
  const CVec out =
      detail::quantize_sum(g, cut, u.spectrum(), [&](int m) { return fft::coefficients(a.column(g.xi(m))); });
  return detail::finish(g, out, u.is_real() && a.reality);
}

inline Field quantize_dense(const Symbol& a, const Field& u, const Cutoffs& cut = {}) {
  return quantize_dense(general(a), u, cut);
}

inline Field quantize(const GeneralSymbol& a, const Field& u, const Cutoffs& cut = {}) {
  return quantize_dense(a, u, cut);
}

// (T_a)^* u with respect to the discrete L2 pairing.
inline Field quantize_adjoint(const Symbol& a, const Field& u, const Cutoffs& cut = {}) {
  if (a.grid() != u.grid()) throw ValidationError("quantize: symbol/grid mismatch");
  const Grid& g = u.grid();
  const detail::RaySpectra rs(a);
  const CVec out =
      detail::quantize_adjoint_sum(g, cut, u.spectrum(), [&](int m) { return rs.at(g.xi(m), g.n()); });
  return detail::finish(g, out, u.is_real() && a.preserves_reality());
}

// Paraproduct T_a u for a function a(x).
inline Field paraproduct(const Field& a, const Field& u, const Cutoffs& cut = {}) {
  return quantize(Symbol::of_x(a), u, cut);
}

// sum_{alpha < rho} (1 / (i^alpha alpha!)) d_xi^alpha a d_x^alpha b, keeping orders above m + m' - rho.
inline Symbol compose(const Symbol& a, const Symbol& b, double rho) {
  if (rho != 0.5 && rho != 1.0 && rho != 1.5) throw ValidationError("compose: rho must be 1/2, 1 or 3/2");
  Symbol r = a * b;
  if (rho > 1.0) r = r + cplx{0.0, -1.0} * (dxi(a) * dx(b));
  return r.with_order(a.order() + b.order()).truncated(a.order() + b.order() - rho);
}

inline Symbol adjoint_symbol(const Symbol& a, double rho) {
  if (rho != 0.5 && rho != 1.0 && rho != 1.5) throw ValidationError("adjoint: rho must be 1/2, 1 or 3/2");
  Symbol c = conj(a);
  Symbol r = c;
  if (rho > 1.0) r = r + cplx{0.0, -1.0} * dxi(dx(c));
  return r.with_order(a.order()).truncated(a.order() - rho);
}

// ---------------------------------------------------------------------------
// Dyadic remainder-order probes.

using Operator = std::function<Field(const Field&)>;

struct ProbeReport {
  double claim = 0.0;
  std::vector<int> shells;  // usable shells
  RVec norms;               // ||(A - B) u_j|| per usable shell
  double slope = 0.0;       // d log2 ||.|| / dj
  double measured = 0.0;    // -slope
  int noise_shells = 0;     // shells with ||(A - B) u_j|| below 1e-12 of ||A u_j||
  bool saturated = false;   // too few usable shells because the difference is at the noise floor
  bool flagged = false;     // fewer than 3 usable shells otherwise
  bool pass = false;
};

// Real field with smooth spectrum on 2^j <= |xi| < 2^{j+1}, unit H^mu norm.
inline Field probe_bump(const Grid& g, int j, double mu, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919u + static_cast<std::uint64_t>(j));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
  CVec c(g.n(), cplx{});
  const double lo = std::ldexp(1.0, j), hi = std::ldexp(1.0, j + 1);
  for (int k = 1; k < g.n() / 2; ++k) {
    const double xi = g.xi(k);
    if (xi <= lo || xi >= hi) {
      (void)phase(rng);
      continue;
    }
    const double w = std::pow(std::sin(pi * (xi - lo) / (hi - lo)), 2);
    const cplx z = w * std::polar(1.0, phase(rng));
    c[k] = z;
    c[g.n() - k] = std::conj(z);
  }
  Field u = Field::from_spectrum(g, c, true);
  const double nrm = sobolev_norm(u, mu);
  if (nrm == 0.0) throw ValidationError("probe_bump: shell contains no grid frequency");
  return u * (1.0 / nrm);
}

inline double lsq_slope(const RVec& x, const RVec& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Decay exponent of ||(A - B) u_j||_{H^{mu - order}} over unit H^mu probes u_j.
inline ProbeReport remainder_order(const Operator& A, const Operator& B, const Grid& g, double mu, double order,
                                   double claimed, int jmin = 3, int jmax = 8, std::uint64_t seed = 0,
                                   const Cutoffs& cut = {}) {
  ProbeReport r;
  r.claim = claimed;
  RVec xs, ys;
  const double xi_max = (g.n() / 2 - 1) * g.dxi();
  for (int j = jmin; j <= jmax; ++j) {
    if (std::ldexp(1.0, j + 1) * (1.0 + cut.eps2) >= xi_max) continue;
    const Field u = probe_bump(g, j, mu, seed);
    const Field a = A(u), b = B(u);
    const double d = sobolev_norm(a - b, mu - order);
    const double ref = std::max(sobolev_norm(a, mu - order), sobolev_norm(b, mu - order));
    if (!std::isfinite(d)) continue;
    if (!(d > 1e-12 * ref)) {
      ++r.noise_shells;
      continue;
    }
    r.shells.push_back(j);
    r.norms.push_back(d);
    xs.push_back(j);
    ys.push_back(std::log2(d));
  }
  if (xs.size() < 3) {
    r.saturated = r.noise_shells > 0 && r.noise_shells + static_cast<int>(xs.size()) >= 3;
    r.flagged = !r.saturated;
    r.pass = r.saturated;
    return r;
  }
  r.slope = lsq_slope(xs, ys);
  r.measured = -r.slope;
  r.pass = r.measured >= claimed - 0.25;
  return r;
}

// ---------------------------------------------------------------------------
// Paralinearization remainders.

inline Field bony_residual(const std::function<double(double)>& F, const std::function<double(double)>& Fprime,
                           const Field& a, const Cutoffs& cut = {}) {
  const double F0 = F(0.0);
  const Field Fa = a.map_real([&](double v) { return F(v) - F0; });
  return Fa - paraproduct(a.map_real(Fprime), a, cut);
}

// ab - T_a b - T_b a with the collocation product.
inline Field paraproduct_remainder(const Field& a, const Field& b, const Cutoffs& cut = {}) {
  CVec ab(a.size());
  for (int j = 0; j < a.size(); ++j) ab[j] = a[j] * b[j];
  const Field prod = Field::from_values(a.grid(), std::move(ab), a.is_real() && b.is_real());
  return prod - paraproduct(a, b, cut) - paraproduct(b, a, cut);
}

// Decay rate of dyadic shell L2 norms: -slope of log2 ||Delta_j u|| over j in [jmin, jmax].
inline double shell_decay(const Field& u, int jmin, int jmax) {
  const Grid& g = u.grid();
  const CVec c = u.spectrum();
  RVec xs, ys;
  for (int j = jmin; j <= jmax; ++j) {
    const double lo = std::ldexp(1.0, j), hi = std::ldexp(1.0, j + 1);
    double e = 0.0;
    for (int k = 0; k < g.n(); ++k) {
      const double xi = std::abs(g.xi(k));
      if (xi >= lo && xi < hi) e += std::norm(c[k]);
    }
    if (e > 0.0) {
      xs.push_back(j);
      ys.push_back(0.5 * std::log2(e));
    }
  }
  if (xs.size() < 2) return 0.0;
  return -lsq_slope(xs, ys);
}

}  // namespace capwave

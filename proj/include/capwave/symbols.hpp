#pragma once

#include <functional>
#include <optional>

#include "dno.hpp"
#include "field.hpp"

namespace capwave {

// a(x, xi) = |xi|^order * (xi > 0 ? plus : minus)(x). In one dimension every
// homogeneous symbol is determined by its two rays.
struct HomPart {
  double order = 0.0;
  CVec plus, minus;

  cplx at(int j, double xi) const {
    if (xi == 0.0) return 0.0;
    return std::pow(std::abs(xi), order) * (xi > 0 ? plus[j] : minus[j]);
  }
  CVec column(double xi) const {
    CVec c(plus.size(), cplx{});
    if (xi == 0.0) return c;
    const double r = std::pow(std::abs(xi), order);
    const CVec& src = xi > 0 ? plus : minus;
    for (size_t j = 0; j < c.size(); ++j) c[j] = r * src[j];
    return c;
  }
};

namespace hom {

inline HomPart constant(int n, double order, cplx cp, cplx cm) {
  return {order, CVec(n, cp), CVec(n, cm)};
}
inline HomPart zero(int n, double order) { return constant(n, order, 0.0, 0.0); }
inline HomPart of_x(const Field& f) { return {0.0, f.values(), f.values()}; }
inline HomPart of_x(const RVec& f) { return {0.0, CVec(f.begin(), f.end()), CVec(f.begin(), f.end())}; }

template <class F>
HomPart zip(const HomPart& a, const HomPart& b, double order, F f) {
  HomPart r{order, CVec(a.plus.size()), CVec(a.plus.size())};
  for (size_t j = 0; j < r.plus.size(); ++j) {
    r.plus[j] = f(a.plus[j], b.plus[j]);
    r.minus[j] = f(a.minus[j], b.minus[j]);
  }
  return r;
}
template <class F>
HomPart map(const HomPart& a, double order, F f) {
  HomPart r{order, CVec(a.plus.size()), CVec(a.plus.size())};
  for (size_t j = 0; j < r.plus.size(); ++j) {
    r.plus[j] = f(a.plus[j]);
    r.minus[j] = f(a.minus[j]);
  }
  return r;
}

inline HomPart mul(const HomPart& a, const HomPart& b) {
  return zip(a, b, a.order + b.order, [](cplx x, cplx y) { return x * y; });
}
inline HomPart div(const HomPart& a, const HomPart& b) {
  return zip(a, b, a.order - b.order, [](cplx x, cplx y) { return x / y; });
}
inline HomPart add(const HomPart& a, const HomPart& b) {
  if (std::abs(a.order - b.order) > 1e-14) throw std::logic_error("hom::add: order mismatch");
  return zip(a, b, a.order, [](cplx x, cplx y) { return x + y; });
}
inline HomPart sub(const HomPart& a, const HomPart& b) { return add(a, map(b, b.order, [](cplx x) { return -x; })); }
inline HomPart scale(const HomPart& a, cplx s) { return map(a, a.order, [s](cplx x) { return s * x; }); }
inline HomPart pow(const HomPart& a, double p) {
  return map(a, a.order * p, [p](cplx x) { return std::pow(x, p); });
}
inline HomPart inv(const HomPart& a) { return map(a, -a.order, [](cplx x) { return 1.0 / x; }); }
inline HomPart conj(const HomPart& a) { return map(a, a.order, [](cplx x) { return std::conj(x); }); }
inline HomPart real(const HomPart& a) { return map(a, a.order, [](cplx x) { return cplx{x.real(), 0.0}; }); }
inline HomPart imag(const HomPart& a) { return map(a, a.order, [](cplx x) { return cplx{x.imag(), 0.0}; }); }

// d/dxi |xi|^m a_pm = m |xi|^{m-1} sgn(xi) a_pm, exactly.
inline HomPart dxi(const HomPart& a) {
  HomPart r{a.order - 1.0, a.plus, a.minus};
  for (size_t j = 0; j < r.plus.size(); ++j) {
    r.plus[j] *= a.order;
    r.minus[j] *= -a.order;
  }
  return r;
}

inline CVec dx_values(const Grid& g, const CVec& v, int order = 1) {
  return dx(Field::from_values(g, v, false), order).values();
}

inline HomPart dx(const Grid& g, const HomPart& a) {
  return {a.order, dx_values(g, a.plus), dx_values(g, a.minus)};
}

inline double max_abs(const HomPart& a) {
  double m = 0.0;
  for (size_t j = 0; j < a.plus.size(); ++j) m = std::max({m, std::abs(a.plus[j]), std::abs(a.minus[j])});
  return m;
}

}  // namespace hom

// Samples f(j, xi) on the rays xi = +-1 and checks homogeneity at xi = +-2.
inline HomPart from_formula(const Grid& g, double order, const std::function<cplx(int, double)>& f,
                            double tol = 1e-10) {
  const int n = g.n();
  HomPart r{order, CVec(n), CVec(n)};
  const double scale2 = std::pow(2.0, order);
  for (int j = 0; j < n; ++j) {
    r.plus[j] = f(j, 1.0);
    r.minus[j] = f(j, -1.0);
    const cplx p2 = f(j, 2.0), m2 = f(j, -2.0);
    if (std::abs(p2 - scale2 * r.plus[j]) > tol * (1.0 + std::abs(p2)) ||
        std::abs(m2 - scale2 * r.minus[j]) > tol * (1.0 + std::abs(m2)))
      throw std::logic_error("symbol formula is not homogeneous of the declared order");
  }
  return r;
}

// Principal part first; lower-order parts follow in decreasing order.
class Symbol {
 public:
  Symbol() = default;
  Symbol(const Grid& g, double order, std::vector<HomPart> parts) : grid_(g), order_(order), parts_(std::move(parts)) {
    normalize();
  }

  static Symbol constant(const Grid& g, cplx c) { return Symbol(g, 0.0, {hom::constant(g.n(), 0.0, c, c)}); }
  static Symbol of_x(const Field& f) { return Symbol(f.grid(), 0.0, {hom::of_x(f)}); }
  // m(xi) = |xi|^order (plus for xi > 0, minus for xi < 0).
  static Symbol power(const Grid& g, double order, cplx plus = 1.0, cplx minus = 1.0) {
    return Symbol(g, order, {hom::constant(g.n(), order, plus, minus)});
  }

  const Grid& grid() const { return grid_; }
  double order() const { return order_; }
  const std::vector<HomPart>& parts() const { return parts_; }

  HomPart part(double ord) const {
    for (const auto& p : parts_)
      if (std::abs(p.order - ord) < 1e-12) return p;
    return hom::zero(grid_.n(), ord);
  }
  HomPart principal() const { return part(order_); }
  HomPart subprincipal() const { return part(order_ - 1.0); }
  bool has_part(double ord) const {
    for (const auto& p : parts_)
      if (std::abs(p.order - ord) < 1e-12) return true;
    return false;
  }

  cplx at(int j, double xi) const {
    cplx s{};
    for (const auto& p : parts_) s += p.at(j, xi);
    return s;
  }
  CVec column(double xi) const {
    CVec c(grid_.n(), cplx{});
    if (xi == 0.0) return c;
    for (const auto& p : parts_) {
      const double r = std::pow(std::abs(xi), p.order);
      const CVec& src = xi > 0 ? p.plus : p.minus;
      for (int j = 0; j < grid_.n(); ++j) c[j] += r * src[j];
    }
    return c;
  }

  // conj a(x, xi) = a(x, -xi): T_a maps real functions to real functions.
  bool preserves_reality(double tol = 1e-12) const {
    for (const auto& p : parts_)
      for (int j = 0; j < grid_.n(); ++j)
        if (std::abs(std::conj(p.plus[j]) - p.minus[j]) > tol * (1.0 + std::abs(p.plus[j]))) return false;
    return true;
  }
  bool real_valued(double tol = 1e-12) const {
    for (const auto& p : parts_)
      for (int j = 0; j < grid_.n(); ++j)
        if (std::abs(p.plus[j].imag()) > tol * (1.0 + std::abs(p.plus[j])) ||
            std::abs(p.minus[j].imag()) > tol * (1.0 + std::abs(p.minus[j])))
          return false;
    return true;
  }

  Symbol truncated(double keep_above) const {
    std::vector<HomPart> keep;
    for (const auto& p : parts_)
      if (p.order > keep_above + 1e-12) keep.push_back(p);
    return Symbol(grid_, order_, std::move(keep));
  }

  Symbol with_order(double m) const { return Symbol(grid_, m, parts_); }

 private:
  void normalize() {
    std::vector<HomPart> merged;
    for (auto& p : parts_) {
      bool done = false;
      for (auto& q : merged)
        if (std::abs(q.order - p.order) < 1e-12) {
          q = hom::add(q, p);
          done = true;
          break;
        }
      if (!done) merged.push_back(p);
    }
    std::sort(merged.begin(), merged.end(), [](const HomPart& a, const HomPart& b) { return a.order > b.order; });
    parts_ = std::move(merged);
  }

  Grid grid_;
  double order_ = 0.0;
  std::vector<HomPart> parts_;
};

inline Symbol operator+(const Symbol& a, const Symbol& b) {
  std::vector<HomPart> parts = a.parts();
  parts.insert(parts.end(), b.parts().begin(), b.parts().end());
  return Symbol(a.grid(), std::max(a.order(), b.order()), std::move(parts));
}
inline Symbol operator*(cplx s, const Symbol& a) {
  std::vector<HomPart> parts;
  for (const auto& p : a.parts()) parts.push_back(hom::scale(p, s));
  return Symbol(a.grid(), a.order(), std::move(parts));
}
inline Symbol operator-(const Symbol& a, const Symbol& b) { return a + cplx{-1.0} * b; }

// Pointwise product in (x, xi).
inline Symbol operator*(const Symbol& a, const Symbol& b) {
  std::vector<HomPart> parts;
  for (const auto& p : a.parts())
    for (const auto& q : b.parts()) parts.push_back(hom::mul(p, q));
  return Symbol(a.grid(), a.order() + b.order(), std::move(parts));
}

inline Symbol dxi(const Symbol& a) {
  std::vector<HomPart> parts;
  for (const auto& p : a.parts()) parts.push_back(hom::dxi(p));
  return Symbol(a.grid(), a.order() - 1.0, std::move(parts));
}
inline Symbol dx(const Symbol& a) {
  std::vector<HomPart> parts;
  for (const auto& p : a.parts()) parts.push_back(hom::dx(a.grid(), p));
  return Symbol(a.grid(), a.order(), std::move(parts));
}
inline Symbol conj(const Symbol& a) {
  std::vector<HomPart> parts;
  for (const auto& p : a.parts()) parts.push_back(hom::conj(p));
  return Symbol(a.grid(), a.order(), std::move(parts));
}

// Symbol without homogeneity structure, given column by column.
struct GeneralSymbol {
  Grid grid;
  double order = 0.0;
  std::function<CVec(double)> value;
  std::function<CVec(double)> dxi_fn;  // optional exact xi-derivative
  std::function<CVec(double)> dx_fn;   // optional exact x-derivative (non-periodic symbols)
  bool reality = true;                 // conj a(x, xi) = a(x, -xi)

  CVec column(double xi) const {
    if (xi == 0.0) return CVec(grid.n(), cplx{});
    return value(xi);
  }

  // Fourth-order centered difference in log|xi| with relative step 1e-3.
  CVec dxi(double xi) const {
    if (dxi_fn) return dxi_fn(xi);
    if (xi == 0.0) return CVec(grid.n(), cplx{});
    const double h = 1e-3;
    const CVec f1 = value(xi * std::exp(h)), f_1 = value(xi * std::exp(-h));
    const CVec f2 = value(xi * std::exp(2 * h)), f_2 = value(xi * std::exp(-2 * h));
    CVec d(grid.n());
    for (int j = 0; j < grid.n(); ++j) d[j] = (-f2[j] + 8.0 * f1[j] - 8.0 * f_1[j] + f_2[j]) / (12.0 * h * xi);
    return d;
  }

  CVec dx(double xi) const {
    if (dx_fn) return dx_fn(xi);
    return hom::dx_values(grid, column(xi));
  }
};

inline GeneralSymbol general(const Symbol& a) {
  GeneralSymbol g;
  g.grid = a.grid();
  g.order = a.order();
  g.value = [a](double xi) { return a.column(xi); };
  const Symbol ax = dx(a), axi = dxi(a);
  g.dxi_fn = [axi](double xi) { return axi.column(xi); };
  g.dx_fn = [ax](double xi) { return ax.column(xi); };
  g.reality = a.preserves_reality();
  return g;
}

// {f, g} = d_xi f d_x g - d_x f d_xi g, exact on homogeneous parts.
inline Symbol poisson_bracket(const Symbol& f, const Symbol& g) {
  return (dxi(f) * dx(g) - dx(f) * dxi(g)).with_order(f.order() + g.order() - 1.0);
}

inline GeneralSymbol poisson_bracket(const GeneralSymbol& f, const GeneralSymbol& g) {
  GeneralSymbol r;
  r.grid = f.grid;
  r.order = f.order + g.order - 1.0;
  r.value = [f, g](double xi) {
    const CVec a = f.dxi(xi), b = g.dx(xi), c = f.dx(xi), d = g.dxi(xi);
    CVec out(a.size());
    for (size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j] - c[j] * d[j];
    return out;
  };
  return r;
}

// ---------------------------------------------------------------------------
// Symbols built from the surface elevation.

struct Slopes {
  Grid grid;
  RVec ex, exx;
};

inline Slopes slopes(const Field& eta) {
  const Field e = eta.real_part();
  return {eta.grid(), dx(e).real_values(), dx(e, 2).real_values()};
}

inline Symbol dn_symbol(const Field& eta) {
  const Slopes s = slopes(eta);
  const Grid& g = s.grid;
  const HomPart l1 = from_formula(g, 1.0, [&](int j, double xi) {
    const double e = s.ex[j];
    return cplx{std::sqrt(std::max(0.0, (1 + e * e) * xi * xi - e * e * xi * xi)), 0.0};
  });
  const HomPart a1 = from_formula(g, 1.0, [&](int j, double xi) {
    const double e = s.ex[j];
    return (l1.at(j, xi) + I * e * xi) / (1 + e * e);
  });
  const HomPart E = hom::of_x(s.ex);
  const HomPart braces = hom::add(hom::dx(g, hom::mul(a1, E)), hom::scale(hom::mul(hom::dxi(l1), hom::dx(g, a1)), I));
  RVec w(g.n());
  for (int j = 0; j < g.n(); ++j) w[j] = 0.5 * (1 + s.ex[j] * s.ex[j]);
  const HomPart l0 = hom::mul(hom::mul(hom::of_x(w), hom::inv(l1)), braces);
  return Symbol(g, 1.0, {l1, l0});
}

inline Symbol curvature_symbol(const Field& eta) {
  const Slopes s = slopes(eta);
  const Grid& g = s.grid;
  const HomPart h2 = from_formula(g, 2.0, [&](int j, double xi) {
    const double e2 = s.ex[j] * s.ex[j];
    return cplx{std::pow(1 + e2, -0.5) * (xi * xi - e2 * xi * xi / (1 + e2)), 0.0};
  });
  const HomPart h1 = hom::scale(hom::dx(g, hom::dxi(h2)), -0.5 * I);
  return Symbol(g, 2.0, {h2, h1});
}

struct Symmetrizer {
  Symbol p, q, gamma;
};

// q0 = (1 + eta_x^2)^{1/4} solves q0 Im(tau) = -{h2 l1, q0}, the compatibility
// condition for T_q T_h T_lambda ~ T_gamma T_gamma T_q. The literal closed form
// (1 + eta_x^2)^{-1/2} is available for comparison.
enum class QChoice { compatible, literal };

inline Symmetrizer symmetrizer(const Field& eta, QChoice choice = QChoice::compatible) {
  const Grid& g = eta.grid();
  const Slopes s = slopes(eta);
  const Symbol lam = dn_symbol(eta), h = curvature_symbol(eta);
  const HomPart l1 = lam.principal(), l0 = lam.subprincipal();
  const HomPart h2 = h.principal(), h1 = h.subprincipal();
  const double qexp = choice == QChoice::compatible ? 0.25 : -0.5;
  RVec qv(g.n());
  for (int j = 0; j < g.n(); ++j) qv[j] = std::pow(1 + s.ex[j] * s.ex[j], qexp);
  const HomPart q0 = hom::of_x(qv);
  const HomPart g32 = hom::pow(hom::mul(h2, l1), 0.5);
  const HomPart g12 = hom::sub(hom::mul(hom::pow(hom::div(h2, l1), 0.5), hom::scale(hom::real(l0), 0.5)),
                               hom::scale(hom::dxi(hom::dx(g, g32)), 0.5 * I));
  const HomPart p12 = hom::mul(q0, hom::pow(hom::div(h2, l1), 0.5));
  const HomPart inner =
      hom::add(hom::sub(hom::mul(q0, h1), hom::mul(g12, p12)), hom::scale(hom::mul(hom::dxi(g32), hom::dx(g, p12)), I));
  const HomPart pm12 = hom::mul(hom::inv(g32), inner);
  return {Symbol(g, 0.5, {p12, pm12}), Symbol(g, 0.0, {q0}), Symbol(g, 1.5, {g32, g12})};
}

// q0 Im(tau) + {h2 l1, q0}, with tau assembled from the constructed symbols.
inline Symbol compatibility_residual(const Field& eta, const Symmetrizer& S) {
  const Grid& g = eta.grid();
  const Symbol lam = dn_symbol(eta), h = curvature_symbol(eta);
  const Symbol l1(g, 1.0, {lam.principal()}), l0(g, 0.0, {lam.subprincipal()});
  const Symbol h2(g, 2.0, {h.principal()}), h1(g, 1.0, {h.subprincipal()});
  const Symbol g32(g, 1.5, {S.gamma.principal()}), g12(g, 0.5, {S.gamma.subprincipal()});
  const Symbol tau = cplx{0.0, -1.0} * (dxi(h2) * dx(l1)) + h1 * l1 + h2 * l0 - cplx{2.0} * (g12 * g32) +
                     I * (dxi(g32) * dx(g32));
  std::vector<HomPart> im;
  for (const auto& p : tau.parts()) im.push_back(hom::imag(p));
  const Symbol imtau(g, 2.0, im);
  return (imtau * S.q + poisson_bracket(h2 * l1, S.q)).with_order(2.0);
}

// Two-term parametrix of p.
inline Symbol parametrix(const Field& eta, const Symbol& p) {
  const Grid& g = eta.grid();
  const HomPart p12 = p.principal(), pm12 = p.subprincipal();
  for (int j = 0; j < g.n(); ++j)
    if (!(p12.plus[j].real() > 0.0) || !(p12.minus[j].real() > 0.0))
      throw ValidationError("parametrix: symbol is not elliptic");
  const HomPart w12 = hom::inv(p12);
  const HomPart corr = hom::add(hom::mul(w12, pm12), hom::scale(hom::mul(hom::dxi(w12), hom::dx(g, p12)), -I));
  const HomPart w32 = hom::scale(hom::mul(w12, corr), -1.0);
  return Symbol(g, -0.5, {w12, w32});
}

struct Factorization {
  Symbol a, A;
  RVec alpha, beta, gamma;  // coefficients of the strip equation
};

// Factorization of alpha d_z^2 + d_x^2 + beta d_x d_z - gamma d_z for the strip
// of thickness geo.depth.
inline Factorization factorization(const Field& eta, const Geometry& geo) {
  geo.validate();
  const Grid& g = eta.grid();
  const Slopes s = slopes(eta);
  const double h = geo.depth;
  Factorization f;
  f.alpha.resize(g.n());
  f.beta.resize(g.n());
  f.gamma.resize(g.n());
  for (int j = 0; j < g.n(); ++j) {
    f.alpha[j] = (1 + s.ex[j] * s.ex[j]) / (h * h);
    f.beta[j] = -2.0 * s.ex[j] / h;
    f.gamma[j] = s.exx[j] / h;
  }
  auto root = [&](int j, double xi, double sign) {
    const double al = f.alpha[j], be = f.beta[j];
    const double disc = std::sqrt(std::max(0.0, 4 * al * xi * xi - be * be * xi * xi));
    return (-I * be * xi + sign * disc) / (2 * al);
  };
  const HomPart a1 = from_formula(g, 1.0, [&](int j, double xi) { return root(j, xi, -1.0); });
  const HomPart A1 = from_formula(g, 1.0, [&](int j, double xi) { return root(j, xi, +1.0); });
  RVec ga(g.n());
  for (int j = 0; j < g.n(); ++j) ga[j] = f.gamma[j] / f.alpha[j];
  const HomPart cross = hom::scale(hom::mul(hom::dxi(a1), hom::dx(g, A1)), I);
  const HomPart a0 = hom::div(hom::sub(cross, hom::mul(hom::of_x(ga), a1)), hom::sub(A1, a1));
  const HomPart A0 = hom::div(hom::sub(cross, hom::mul(hom::of_x(ga), A1)), hom::sub(a1, A1));
  f.a = Symbol(g, 1.0, {a1, a0});
  f.A = Symbol(g, 1.0, {A1, A0});
  return f;
}

// j_eps = exp(-eps G) - (i/2) d_x d_xi exp(-eps G), G = gamma^{(3/2)}.
struct Mollifier {
  GeneralSymbol j;           // both parts
  GeneralSymbol principal;   // exp(-eps G), exact derivatives
  GeneralSymbol complement;  // 1 - j
  double eps = 0.0;
};

inline Mollifier mollifier_symbol(const Field& eta, double eps) {
  if (!(eps >= 0.0)) throw ValidationError("mollifier: eps must be nonnegative");
  const Grid& g = eta.grid();
  const Symbol G = Symbol(g, 1.5, {symmetrizer(eta).gamma.principal()});
  const Symbol Gx = dx(G), Gxi = dxi(G), Gxxi = dx(dxi(G));
  const int n = g.n();
  auto e0 = [G, eps, n](double xi) {
    CVec c = G.column(xi);
    for (int j = 0; j < n; ++j) c[j] = std::exp(-eps * c[j]);
    return c;
  };
  auto e1 = [=](double xi) {
    const CVec e = e0(xi), gx = Gx.column(xi), gxi = Gxi.column(xi), gxxi = Gxxi.column(xi);
    CVec c(n);
    for (int j = 0; j < n; ++j) c[j] = -0.5 * I * e[j] * (eps * eps * gx[j] * gxi[j] - eps * gxxi[j]);
    return c;
  };
  Mollifier m;
  m.eps = eps;
  m.principal.grid = g;
  m.principal.order = 0.0;
  m.principal.value = e0;
  m.principal.dxi_fn = [=](double xi) {
    CVec e = e0(xi);
    const CVec d = Gxi.column(xi);
    for (int j = 0; j < n; ++j) e[j] *= -eps * d[j];
    return e;
  };
  m.principal.dx_fn = [=](double xi) {
    CVec e = e0(xi);
    const CVec d = Gx.column(xi);
    for (int j = 0; j < n; ++j) e[j] *= -eps * d[j];
    return e;
  };
  m.j.grid = g;
  m.j.order = 0.0;
  m.j.value = [=](double xi) {
    CVec a = e0(xi);
    const CVec b = e1(xi);
    for (int j = 0; j < n; ++j) a[j] += b[j];
    return a;
  };
  m.complement.grid = g;
  m.complement.order = 0.0;
  m.complement.value = [=](double xi) {
    CVec a = e0(xi);
    const CVec b = e1(xi);
    for (int j = 0; j < n; ++j) a[j] = 1.0 - a[j] - b[j];
    return a;
  };
  return m;
}

inline Symbol elliptic_weight(const Field& eta, double s) {
  const HomPart g32 = symmetrizer(eta).gamma.principal();
  for (int j = 0; j < eta.grid().n(); ++j)
    if (!(g32.plus[j].real() > 0.0) || !(g32.minus[j].real() > 0.0))
      throw ValidationError("elliptic_weight: gamma^(3/2) must be positive");
  return Symbol(eta.grid(), s, {hom::real(hom::pow(g32, 2.0 * s / 3.0))});
}

// ---------------------------------------------------------------------------
// Seminorm M^m_rho.

struct SeminormReport {
  double value = 0.0;
  bool flagged = false;         // too few frequency samples
  bool holder_approximated = false;
};

namespace detail {

inline double holder_half(const Grid& g, const CVec& f) {
  double best = 0.0;
  const int n = g.n();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int d = std::min(j - i, n - (j - i));
      best = std::max(best, std::abs(f[i] - f[j]) / std::sqrt(d * g.dx()));
    }
  return best;
}

inline double w_norm(const Grid& g, const CVec& f, const std::function<CVec()>& fx, double rho, bool& holder) {
  double v = 0.0;
  for (const auto& z : f) v = std::max(v, std::abs(z));
  if (rho == 0.0) return v;
  if (rho == 0.5) {
    holder = true;
    return v + holder_half(g, f);
  }
  const CVec d = fx();
  double vx = 0.0;
  for (const auto& z : d) vx = std::max(vx, std::abs(z));
  if (rho == 1.0) return v + vx;
  holder = true;
  return v + vx + holder_half(g, d);
}

inline RVec seminorm_samples(const Grid& g) {
  const double top = (g.n() / 2 - 1) * g.dxi();
  RVec xs;
  if (top < 4.0) return xs;
  const int count = 24;
  for (int i = 0; i < count; ++i) {
    const double xi = 0.5 * std::pow(top / 0.5, double(i) / (count - 1));
    xs.push_back(xi);
    xs.push_back(-xi);
  }
  return xs;
}

}  // namespace detail

inline int seminorm_max_alpha(double rho) { return 1 + static_cast<int>(std::ceil(rho)); }

inline SeminormReport seminorm(const Symbol& a, double m, double rho) {
  if (rho != 0.0 && rho != 0.5 && rho != 1.0 && rho != 1.5) throw ValidationError("seminorm: rho not supported");
  SeminormReport r;
  const RVec xs = detail::seminorm_samples(a.grid());
  if (xs.empty()) {
    r.flagged = true;
    return r;
  }
  Symbol d = a;
  for (int alpha = 0; alpha <= seminorm_max_alpha(rho); ++alpha) {
    const Symbol dxd = dx(d);
    for (double xi : xs) {
      const CVec col = d.column(xi);
      const double w = std::pow(1.0 + std::abs(xi), alpha - m);
      r.value = std::max(r.value, w * detail::w_norm(a.grid(), col, [&] { return dxd.column(xi); }, rho,
                                                    r.holder_approximated));
    }
    d = dxi(d);
  }
  return r;
}

inline SeminormReport seminorm(const GeneralSymbol& a, double m, double rho) {
  if (rho != 0.0 && rho != 0.5 && rho != 1.0 && rho != 1.5) throw ValidationError("seminorm: rho not supported");
  SeminormReport r;
  const RVec xs = detail::seminorm_samples(a.grid);
  if (xs.empty()) {
    r.flagged = true;
    return r;
  }
  // Higher xi-derivatives by centered differences of the first derivative.
  std::function<CVec(double, int)> deriv = [&](double xi, int alpha) -> CVec {
    if (alpha == 0) return a.column(xi);
    if (alpha == 1) return a.dxi(xi);
    const double h = 1e-3 * std::abs(xi);
    const CVec p = deriv(xi + h, alpha - 1), q = deriv(xi - h, alpha - 1);
    CVec out(p.size());
    for (size_t j = 0; j < p.size(); ++j) out[j] = (p[j] - q[j]) / (2 * h);
    return out;
  };
  for (int alpha = 0; alpha <= seminorm_max_alpha(rho); ++alpha)
    for (double xi : xs) {
      const CVec col = deriv(xi, alpha);
      const double w = std::pow(1.0 + std::abs(xi), alpha - m);
      r.value = std::max(r.value, w * detail::w_norm(a.grid, col, [&] { return hom::dx_values(a.grid, col); }, rho,
                                                    r.holder_approximated));
    }
  return r;
}

}  // namespace capwave

#pragma once

#include <fftw3.h>

#include <functional>
#include <map>
#include <mutex>
#include <utility>

#include "util.hpp"

namespace capwave {

// Periodic grid on [-L/2, L/2).
class Grid {
 public:
  Grid() = default;
  Grid(int n, double length) : n_(n), length_(length) {
    if (n < 8 || n % 2 != 0) throw ValidationError("grid: n must be even and >= 8");
    if (!(length > 0.0) || !std::isfinite(length)) throw ValidationError("grid: length must be positive");
  }

  int n() const { return n_; }
  double length() const { return length_; }
  double dx() const { return length_ / n_; }
  double x(int j) const { return -0.5 * length_ + j * dx(); }
  // Signed wavenumber of FFT-ordered index; Nyquist maps to -n/2.
  int wavenumber(int idx) const { return idx < n_ / 2 ? idx : idx - n_; }
  int index(int k) const { return k >= 0 ? k : k + n_; }
  double xi(int idx) const { return 2.0 * pi * wavenumber(idx) / length_; }
  double dxi() const { return 2.0 * pi / length_; }
  bool is_nyquist(int idx) const { return idx == n_ / 2; }

  bool operator==(const Grid& o) const { return n_ == o.n_ && length_ == o.length_; }
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  int n_ = 0;
  double length_ = 0.0;
};

namespace fft {

namespace detail {
struct PlanCache {
  std::mutex mutex;
  std::map<std::pair<int, int>, fftw_plan> plans;
  ~PlanCache() {
    for (auto& kv : plans) fftw_destroy_plan(kv.second);
  }
};

inline fftw_plan plan(int n, int sign) {
  static PlanCache cache;
  std::lock_guard<std::mutex> lock(cache.mutex);
  auto key = std::make_pair(n, sign);
  auto it = cache.plans.find(key);
  if (it != cache.plans.end()) return it->second;
  fftw_complex* a = fftw_alloc_complex(n);
  fftw_complex* b = fftw_alloc_complex(n);
  fftw_plan p = fftw_plan_dft_1d(n, a, b, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(a);
  fftw_free(b);
  cache.plans.emplace(key, p);
  return p;
}
}  // namespace detail

// Unnormalized transform, sign -1 forward / +1 backward.
inline void transform(const CVec& in, CVec& out, int sign) {
  const int n = static_cast<int>(in.size());
  out.resize(n);
  fftw_plan p = detail::plan(n, sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

// c_k = (1/n) sum_j u_j exp(-i xi_k x_j) with x_0 = -L/2.
inline CVec coefficients(const CVec& values) {
  const int n = static_cast<int>(values.size());
  CVec out;
  transform(values, out, FFTW_FORWARD);
  for (int k = 0; k < n; ++k) {
    const int w = k < n / 2 ? k : k - n;
    out[k] *= ((w & 1) ? -1.0 : 1.0) / n;
  }
  return out;
}

inline CVec synthesize(const CVec& coeffs) {
  const int n = static_cast<int>(coeffs.size());
  CVec tmp(coeffs);
  for (int k = 0; k < n; ++k) {
    const int w = k < n / 2 ? k : k - n;
    if (w & 1) tmp[k] = -tmp[k];
  }
  CVec out;
  transform(tmp, out, FFTW_BACKWARD);
  return out;
}

}  // namespace fft

class Field {
 public:
  Field() = default;
  explicit Field(const Grid& g) : grid_(g), values_(g.n(), cplx{}), real_(true) {}

  static Field from_values(const Grid& g, CVec v, bool real) {
    if (static_cast<int>(v.size()) != g.n()) throw ValidationError("field: size mismatch");
    Field f;
    f.grid_ = g;
    f.values_ = std::move(v);
    f.real_ = real;
    if (real)
      for (auto& z : f.values_) z = {z.real(), 0.0};
    return f;
  }
  static Field from_real(const Grid& g, const RVec& v) {
    CVec c(v.begin(), v.end());
    return from_values(g, std::move(c), true);
  }
  static Field from_function(const Grid& g, const std::function<double(double)>& f) {
    CVec v(g.n());
    for (int j = 0; j < g.n(); ++j) v[j] = f(g.x(j));
    return from_values(g, std::move(v), true);
  }
  static Field from_complex_function(const Grid& g, const std::function<cplx(double)>& f) {
    CVec v(g.n());
    for (int j = 0; j < g.n(); ++j) v[j] = f(g.x(j));
    return from_values(g, std::move(v), false);
  }
  static Field from_spectrum(const Grid& g, const CVec& c, bool real) {
    if (static_cast<int>(c.size()) != g.n()) throw ValidationError("field: spectrum size mismatch");
    return from_values(g, fft::synthesize(c), real);
  }

  const Grid& grid() const { return grid_; }
  int size() const { return grid_.n(); }
  bool is_real() const { return real_; }
  const CVec& values() const { return values_; }
  cplx operator[](int j) const { return values_[j]; }
  CVec spectrum() const { return fft::coefficients(values_); }

  RVec real_values() const {
    RVec r(values_.size());
    for (size_t j = 0; j < r.size(); ++j) r[j] = values_[j].real();
    return r;
  }
  Field real_part() const { return from_values(grid_, values_, true); }
  Field imag_part() const {
    CVec v(values_.size());
    for (size_t j = 0; j < v.size(); ++j) v[j] = values_[j].imag();
    return from_values(grid_, std::move(v), true);
  }

  // Pointwise map on collocation values (no dealiasing).
  Field map(const std::function<cplx(cplx)>& f, bool keeps_real = true) const {
    CVec v(values_.size());
    for (size_t j = 0; j < v.size(); ++j) v[j] = f(values_[j]);
    return from_values(grid_, std::move(v), real_ && keeps_real);
  }
  Field map_real(const std::function<double(double)>& f) const {
    CVec v(values_.size());
    for (size_t j = 0; j < v.size(); ++j) v[j] = f(values_[j].real());
    return from_values(grid_, std::move(v), true);
  }

  Field& operator+=(const Field& o) {
    check(o);
    for (size_t j = 0; j < values_.size(); ++j) values_[j] += o.values_[j];
    real_ = real_ && o.real_;
    return *this;
  }
  Field& operator-=(const Field& o) {
    check(o);
    for (size_t j = 0; j < values_.size(); ++j) values_[j] -= o.values_[j];
    real_ = real_ && o.real_;
    return *this;
  }
  Field& operator*=(double s) {
    for (auto& z : values_) z *= s;
    return *this;
  }
  Field& operator*=(cplx s) {
    for (auto& z : values_) z *= s;
    if (s.imag() != 0.0) real_ = false;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, double s) { return a *= s; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend Field operator*(cplx s, Field a) { return a *= s; }
  Field operator-() const { return *this * -1.0; }

 private:
  void check(const Field& o) const {
    if (o.grid_ != grid_) throw ValidationError("field: grid mismatch");
  }

  Grid grid_;
  CVec values_;
  bool real_ = true;
};

inline void require_same_grid(const Field& a, const Field& b) {
  if (a.grid() != b.grid()) throw ValidationError("fields live on different grids");
}

// Spectrum of output is m(xi_k) * u_hat(xi_k). Real input stays real when m is
// Hermitian on the paired frequencies; the Nyquist mode then keeps only its real part.
inline Field multiplier(const Field& u, const std::function<cplx(double)>& m) {
  const Grid& g = u.grid();
  const int n = g.n();
  CVec mk(n);
  for (int k = 0; k < n; ++k) {
    mk[k] = m(g.xi(k));
    if (!std::isfinite(mk[k].real()) || !std::isfinite(mk[k].imag()))
      throw ValidationError("multiplier: non-finite value at xi = " + std::to_string(g.xi(k)));
  }
  bool hermitian = u.is_real();
  for (int k = 1; hermitian && k < n / 2; ++k) {
    const cplx a = mk[k], b = std::conj(mk[n - k]);
    if (std::abs(a - b) > 1e-14 * (1.0 + std::abs(a))) hermitian = false;
  }
  if (hermitian && std::abs(mk[0].imag()) > 1e-14 * (1.0 + std::abs(mk[0]))) hermitian = false;
  CVec c = u.spectrum();
  for (int k = 0; k < n; ++k) c[k] *= mk[k];
  return Field::from_spectrum(g, c, hermitian);
}

// Spectral derivative; odd orders drop the Nyquist mode.
inline Field dx(const Field& u, int order = 1) {
  const Grid& g = u.grid();
  const int n = g.n();
  CVec c = u.spectrum();
  for (int k = 0; k < n; ++k) {
    if (g.is_nyquist(k) && (order % 2 == 1)) {
      c[k] = 0.0;
      continue;
    }
    c[k] *= std::pow(I * g.xi(k), order);
  }
  return Field::from_spectrum(g, c, u.is_real());
}

// Projection onto |k| < n/2 with the Nyquist mode removed.
inline Field strip_nyquist(const Field& u) {
  CVec c = u.spectrum();
  c[u.grid().n() / 2] = 0.0;
  return Field::from_spectrum(u.grid(), c, u.is_real());
}

// Dealiased product via 3/2 zero padding.
inline Field product(const Field& u, const Field& v) {
  require_same_grid(u, v);
  const int n = u.grid().n();
  const int m = 3 * n / 2 + ((3 * n / 2) % 2);
  CVec cu = u.spectrum(), cv = v.spectrum();
  CVec pu(m, cplx{}), pv(m, cplx{});
  for (int idx = 0; idx < n; ++idx) {
    if (idx == n / 2) continue;
    const int w = idx < n / 2 ? idx : idx - n;
    const int pidx = w >= 0 ? w : w + m;
    pu[pidx] = cu[idx];
    pv[pidx] = cv[idx];
  }
  CVec xu = fft::synthesize(pu), xv = fft::synthesize(pv);
  for (int j = 0; j < m; ++j) xu[j] *= xv[j];
  CVec pw = fft::coefficients(xu);
  CVec cw(n, cplx{});
  for (int idx = 0; idx < n; ++idx) {
    if (idx == n / 2) continue;
    const int w = idx < n / 2 ? idx : idx - n;
    cw[idx] = pw[w >= 0 ? w : w + m];
  }
  return Field::from_spectrum(u.grid(), cw, u.is_real() && v.is_real());
}

// <u, v> = (L/n) sum u_j conj(v_j).
inline cplx inner(const Field& u, const Field& v) {
  require_same_grid(u, v);
  cplx s{};
  for (int j = 0; j < u.size(); ++j) s += u[j] * std::conj(v[j]);
  return s * u.grid().dx();
}

inline double max_abs(const Field& u) {
  double m = 0.0;
  for (const auto& z : u.values()) m = std::max(m, std::abs(z));
  return m;
}

inline double l2_norm(const Field& u) { return std::sqrt(std::max(0.0, inner(u, u).real())); }

// ( L sum_k (1 + xi_k^2)^s |c_k|^2 )^{1/2}; equals the quadrature L2 norm at s = 0.
inline double sobolev_norm_from_coefficients(const Grid& g, const CVec& c, double s) {
  double acc = 0.0;
  for (int k = 0; k < g.n(); ++k) {
    const double xi = g.xi(k);
    acc += std::pow(1.0 + xi * xi, s) * std::norm(c[k]);
  }
  return std::sqrt(g.length() * acc);
}

inline double sobolev_norm(const Field& u, double s) {
  return sobolev_norm_from_coefficients(u.grid(), u.spectrum(), s);
}

inline Field weight(const Field& u, double delta) {
  const Grid& g = u.grid();
  CVec v(u.values());
  for (int j = 0; j < g.n(); ++j) v[j] *= std::pow(japanese(g.x(j)), -0.5 - delta);
  return Field::from_values(g, std::move(v), u.is_real());
}

inline double weighted_norm(const Field& u, double s, double delta) {
  if (!(delta > 0.0)) throw ValidationError("weighted_norm: delta must be positive");
  return sobolev_norm(weight(u, delta), s);
}

// Relative L2 mass carried by |k| > n/3.
inline double band_tail(const Field& u) {
  const Grid& g = u.grid();
  CVec c = u.spectrum();
  double tail = 0.0, total = 0.0;
  for (int k = 0; k < g.n(); ++k) {
    const double e = std::norm(c[k]);
    total += e;
    if (3 * std::abs(g.wavenumber(k)) > g.n()) tail += e;
  }
  return total > 0.0 ? std::sqrt(tail / total) : 0.0;
}

inline bool dealiasing_ok(const Field& u, double tol = 1e-10) { return band_tail(u) <= tol; }

}  // namespace capwave

#pragma once

#include <list>
#include <memory>
#include <mutex>
#include <ostream>
#include <tuple>

#include "field.hpp"
#include "linalg.hpp"

namespace capwave {

struct Geometry {
  enum class Kind { flat_bottom, parallel_strip };
  Kind kind = Kind::flat_bottom;
  double depth = 1.0;  // h0 for flat_bottom, h for parallel_strip
  double g = 1.0;
  double kappa = 1.0;

  static Geometry flat(double h0, double g = 1.0, double kappa = 1.0) {
    return {Kind::flat_bottom, h0, g, kappa};
  }
  static Geometry strip(double h, double g = 1.0, double kappa = 1.0) {
    return {Kind::parallel_strip, h, g, kappa};
  }
  void validate() const {
    if (!(depth > 0.0)) throw ValidationError("geometry: depth must be positive");
    if (!(g >= 0.0)) throw ValidationError("geometry: gravity must be nonnegative");
    if (!std::isfinite(kappa)) throw ValidationError("geometry: kappa must be finite");
  }
};

struct DnOptions {
  double tol = 1e-13;
  int max_iter = 600;
  int restart = 60;
};

// rho(x,z) and the coefficients of the flattened Laplacian
//   v_xx + czz v_zz + cxz v_xz + cz v_z
// on Chebyshev levels z_l (l = 0 is the surface, l = nz-1 the bottom).
struct CoordinateMap {
  Grid grid;
  int nz = 0;
  RVec z;
  RVec eta, eta_x, eta_xx;
  RVec rho, rho_z, czz, cxz, cz;  // level-major, index l*n + j

  double top_factor(int j) const {  // (1 + eta_x^2) / rho_z at z = 0
    return (1.0 + eta_x[j] * eta_x[j]) / rho_z[j];
  }
};

inline CoordinateMap build_map(const Field& eta, const Geometry& geo, int nz) {
  geo.validate();
  if (nz < 8) throw ValidationError("dno: nz must be >= 8");
  const Grid& grid = eta.grid();
  const int n = grid.n();
  CoordinateMap m;
  m.grid = grid;
  m.nz = nz;
  m.eta = eta.real_values();
  m.eta_x = dx(eta.real_part()).real_values();
  m.eta_xx = dx(eta.real_part(), 2).real_values();
  Chebyshev ch(nz - 1);
  m.z.resize(nz);
  for (int l = 0; l < nz; ++l) m.z[l] = 0.5 * (ch.t[l] - 1.0);
  const size_t N = static_cast<size_t>(n) * nz;
  m.rho.resize(N);
  m.rho_z.resize(N);
  m.czz.resize(N);
  m.cxz.resize(N);
  m.cz.resize(N);
  const double h = geo.depth;
  for (int l = 0; l < nz; ++l) {
    const double z = m.z[l];
    for (int j = 0; j < n; ++j) {
      const double e = m.eta[j], ex = m.eta_x[j], exx = m.eta_xx[j];
      double rho, rz, a, ax, az;
      if (geo.kind == Geometry::Kind::flat_bottom) {
        rho = (1.0 + z) * e + z * h;
        rz = e + h;
        if (!(rz > 0.0)) throw GeometryError("dno: fluid layer degenerates (eta <= -h0)");
        a = (1.0 + z) * ex / rz;
        az = ex / rz;
        ax = (1.0 + z) * (exx / rz - ex * ex / (rz * rz));
      } else {
        rho = h * z + e;
        rz = h;
        a = ex / h;
        az = 0.0;
        ax = exx / h;
      }
      const size_t id = static_cast<size_t>(l) * n + j;
      m.rho[id] = rho;
      m.rho_z[id] = rz;
      m.czz[id] = a * a + 1.0 / (rz * rz);
      m.cxz[id] = -2.0 * a;
      m.cz[id] = -ax + a * az;  // b b_z vanishes: rho_z is z-independent in both maps
    }
  }
  return m;
}

namespace detail {

// Flat-layer preconditioner: per |k| inverse of czz0 D^2 - k^2 with the same boundary rows.
struct FlatPreconditioner {
  int n, nz;
  double length, depth;
  std::vector<Eigen::MatrixXd> inv;  // index |k| = 0..n/2
};

inline std::shared_ptr<const FlatPreconditioner> flat_preconditioner(const Grid& g, int nz,
                                                                     double depth) {
  static std::mutex mutex;
  static std::list<std::shared_ptr<const FlatPreconditioner>> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    for (auto it = cache.begin(); it != cache.end(); ++it) {
      const auto& p = *it;
      if (p->n == g.n() && p->nz == nz && p->length == g.length() && p->depth == depth) {
        auto keep = p;
        cache.erase(it);
        cache.push_front(keep);
        return keep;
      }
    }
  }
  auto p = std::make_shared<FlatPreconditioner>();
  p->n = g.n();
  p->nz = nz;
  p->length = g.length();
  p->depth = depth;
  Chebyshev ch(nz - 1);
  const Eigen::MatrixXd Dz = 2.0 * ch.D;
  const Eigen::MatrixXd Dzz = Dz * Dz;
  const int N = nz - 1;
  p->inv.resize(g.n() / 2 + 1);
  for (int k = 0; k <= g.n() / 2; ++k) {
    const double xi = 2.0 * pi * k / g.length();
    Eigen::MatrixXd P = Dzz / (depth * depth);
    P.diagonal().array() -= xi * xi;
    P.row(0).setZero();
    P(0, 0) = 1.0;
    P.row(N) = Dz.row(N);
    p->inv[k] = P.partialPivLu().inverse();
  }
  std::lock_guard<std::mutex> lock(mutex);
  cache.push_front(p);
  if (cache.size() > 8) cache.pop_back();
  return p;
}

}  // namespace detail

struct StripSolution {
  CoordinateMap map;
  CVec v;  // level-major
  double residual = 0.0;      // preconditioned, relative
  double raw_residual = 0.0;  // ||b - A v|| / ||b||
  int iterations = 0;

  Field level(int l) const {
    CVec c(v.begin() + static_cast<long>(l) * map.grid.n(),
           v.begin() + static_cast<long>(l + 1) * map.grid.n());
    return Field::from_values(map.grid, std::move(c), false);
  }
};

// Matrix-free discrete operator of the strip problem.
class StripOperator {
 public:
  StripOperator(CoordinateMap map, const Geometry& geo)
      : map_(std::move(map)), geo_(geo), n_(map_.grid.n()), nz_(map_.nz) {
    Chebyshev ch(nz_ - 1);
    Dz_ = 2.0 * ch.D;
    Dzz_ = Dz_ * Dz_;
    DzT_ = Dz_.transpose().cast<cplx>();
    DzzT_ = Dzz_.transpose().cast<cplx>();
    double mean = 0.0;
    for (double e : map_.eta) mean += e;
    mean /= n_;
    const double H = geo.kind == Geometry::Kind::flat_bottom ? geo.depth + mean : geo.depth;
    pre_ = detail::flat_preconditioner(map_.grid, nz_, H);
    xi_.resize(n_);
    for (int k = 0; k < n_; ++k) xi_[k] = map_.grid.xi(k);
  }

  const CoordinateMap& map() const { return map_; }
  int size() const { return n_ * nz_; }

  void apply(const CVec& v, CVec& out) const {
    out.assign(v.size(), cplx{});
    Eigen::MatrixXcd V(n_, nz_), Vx(n_, nz_), Vxx(n_, nz_);
    CVec col(n_), spec(n_), tmp(n_), back(n_);
    for (int l = 0; l < nz_; ++l) {
      for (int j = 0; j < n_; ++j) {
        col[j] = v[static_cast<size_t>(l) * n_ + j];
        V(j, l) = col[j];
      }
      fft::transform(col, spec, FFTW_FORWARD);
      for (int k = 0; k < n_; ++k) tmp[k] = (k == n_ / 2) ? cplx{} : spec[k] * I * xi_[k] / double(n_);
      fft::transform(tmp, back, FFTW_BACKWARD);
      for (int j = 0; j < n_; ++j) Vx(j, l) = back[j];
      for (int k = 0; k < n_; ++k) tmp[k] = -spec[k] * xi_[k] * xi_[k] / double(n_);
      fft::transform(tmp, back, FFTW_BACKWARD);
      for (int j = 0; j < n_; ++j) Vxx(j, l) = back[j];
    }
    const Eigen::MatrixXcd Vz = V * DzT_;
    const Eigen::MatrixXcd Vzz = V * DzzT_;
    const Eigen::MatrixXcd Vxz = Vx * DzT_;
    const int N = nz_ - 1;
    for (int j = 0; j < n_; ++j) out[j] = V(j, 0);
    for (int l = 1; l < N; ++l) {
      for (int j = 0; j < n_; ++j) {
        const size_t id = static_cast<size_t>(l) * n_ + j;
        out[id] = Vxx(j, l) + map_.czz[id] * Vzz(j, l) + map_.cxz[id] * Vxz(j, l) + map_.cz[id] * Vz(j, l);
      }
    }
    for (int j = 0; j < n_; ++j) {
      const size_t id = static_cast<size_t>(N) * n_ + j;
      if (geo_.kind == Geometry::Kind::flat_bottom) {
        out[id] = Vz(j, N);
      } else {
        const double ex = map_.eta_x[j];
        out[id] = (1.0 + ex * ex) * Vz(j, N) - geo_.depth * ex * Vx(j, N);
      }
    }
  }

  void precondition(const CVec& r, CVec& out) const {
    out.assign(r.size(), cplx{});
    Eigen::MatrixXcd R(n_, nz_);
    CVec col(n_), spec(n_);
    for (int l = 0; l < nz_; ++l) {
      for (int j = 0; j < n_; ++j) col[j] = r[static_cast<size_t>(l) * n_ + j];
      fft::transform(col, spec, FFTW_FORWARD);
      for (int k = 0; k < n_; ++k) R(k, l) = spec[k] / double(n_);
    }
    Eigen::MatrixXcd S(n_, nz_);
    for (int k = 0; k < n_; ++k) {
      const int ak = std::abs(map_.grid.wavenumber(k));
      S.row(k) = (pre_->inv[ak] * R.row(k).transpose()).transpose();
    }
    for (int l = 0; l < nz_; ++l) {
      for (int k = 0; k < n_; ++k) col[k] = S(k, l);
      fft::transform(col, spec, FFTW_BACKWARD);
      for (int j = 0; j < n_; ++j) out[static_cast<size_t>(l) * n_ + j] = spec[j];
    }
  }

  // z-derivative at the surface through the first Chebyshev row.
  CVec surface_dz(const CVec& v) const {
    CVec d(n_, cplx{});
    for (int m = 0; m < nz_; ++m)
      for (int j = 0; j < n_; ++j) d[j] += Dz_(0, m) * v[static_cast<size_t>(m) * n_ + j];
    return d;
  }

  const Eigen::MatrixXd& Dz() const { return Dz_; }

 private:
  CoordinateMap map_;
  Geometry geo_;
  int n_, nz_;
  Eigen::MatrixXd Dz_, Dzz_;
  Eigen::MatrixXcd DzT_, DzzT_;
  RVec xi_;
  std::shared_ptr<const detail::FlatPreconditioner> pre_;
};

inline StripSolution solve_strip(const Field& eta, const Field& psi, const Geometry& geo, int nz,
                                 const DnOptions& opt = {}) {
  require_same_grid(eta, psi);
  StripOperator op(build_map(eta, geo, nz), geo);
  const int n = eta.grid().n();
  CVec b(static_cast<size_t>(op.size()), cplx{});
  for (int j = 0; j < n; ++j) b[j] = psi[j];
  CVec v;
  op.precondition(b, v);
  auto A = [&op](const CVec& in, CVec& out) { op.apply(in, out); };
  auto M = [&op](const CVec& in, CVec& out) { op.precondition(in, out); };
  KrylovResult kr = gmres(A, M, b, v, opt.tol, opt.max_iter, opt.restart);
  if (!kr.converged)
    throw SolverError("dno: GMRES did not converge, residual " + std::to_string(kr.residual), kr.residual);
  StripSolution sol;
  CVec r;
  op.apply(v, r);
  for (size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  sol.raw_residual = norm2(r) / norm2(b);
  sol.residual = kr.residual;
  sol.iterations = kr.iterations;
  if (eta.is_real() && psi.is_real())
    for (auto& z : v) z = {z.real(), 0.0};
  sol.v = std::move(v);
  sol.map = op.map();
  return sol;
}

// Surface trace (1 + eta_x^2)/rho_z v_z - eta_x psi_x of a solved strip problem.
inline Field dn_trace(const StripSolution& sol, const Field& psi) {
  const CoordinateMap& m = sol.map;
  const int n = m.grid.n(), nz = m.nz;
  Chebyshev ch(nz - 1);
  const Field px = dx(psi);
  CVec G(n, cplx{});
  for (int j = 0; j < n; ++j) {
    cplx vz{};
    for (int l = 0; l < nz; ++l) vz += 2.0 * ch.D(0, l) * sol.v[static_cast<size_t>(l) * n + j];
    G[j] = m.top_factor(j) * vz - m.eta_x[j] * px[j];
  }
  return Field::from_values(m.grid, std::move(G), psi.is_real());
}

inline Field dirichlet_neumann(const Field& eta, const Field& psi, const Geometry& geo, int nz,
                               const DnOptions& opt = {}) {
  return dn_trace(solve_strip(eta, psi, geo, nz, opt), psi);
}

// B = (eta_x psi_x + G psi) / (1 + eta_x^2), V = psi_x - B eta_x.
inline std::pair<Field, Field> compute_B_V(const Field& eta, const Field& psi, const Field& Gpsi) {
  require_same_grid(eta, psi);
  require_same_grid(eta, Gpsi);
  const Field ex = dx(eta), px = dx(psi);
  const Field inv = product(ex, ex).map([](cplx w) { return 1.0 / (1.0 + w); });
  const Field B = product(product(ex, px) + Gpsi, inv);
  const Field V = px - product(B, ex);
  return {B, V};
}

// -G(eta)(B h) - d_x(V h); fixed bottom only.
inline Field shape_derivative(const Field& eta, const Field& psi, const Field& htilde, const Geometry& geo,
                              int nz, const DnOptions& opt = {}) {
  if (geo.kind != Geometry::Kind::flat_bottom)
    throw ValidationError("shape_derivative: requires a fixed (flat) bottom");
  const Field G = dirichlet_neumann(eta, psi, geo, nz, opt);
  auto [B, V] = compute_B_V(eta, psi, G);
  return -(dirichlet_neumann(eta, product(B, htilde), geo, nz, opt) + dx(product(V, htilde)));
}

struct CancellationReport {
  double residual = 0.0;  // ||G(eta)B + d_x V||_{L2}
  double reference = 0.0;  // ||d_x V||_{L2}
};

inline CancellationReport cancellation(const Field& eta, const Field& psi, const Geometry& geo, int nz,
                                       const DnOptions& opt = {}) {
  if (geo.kind != Geometry::Kind::flat_bottom)
    throw ValidationError("cancellation_residual: requires a flat bottom");
  const Field G = dirichlet_neumann(eta, psi, geo, nz, opt);
  auto [B, V] = compute_B_V(eta, psi, G);
  const Field Vx = dx(V);
  return {l2_norm(dirichlet_neumann(eta, B, geo, nz, opt) + Vx), l2_norm(Vx)};
}

inline double cancellation_residual(const Field& eta, const Field& psi, const Geometry& geo, int nz,
                                    const DnOptions& opt = {}) {
  return cancellation(eta, psi, geo, nz, opt).residual;
}

// CSV grid dump: x, z, re(v), im(v).
inline void write_strip_csv(const StripSolution& sol, std::ostream& os) {
  const CoordinateMap& m = sol.map;
  os << "x,z,re,im\n";
  os.precision(17);
  for (int l = 0; l < m.nz; ++l)
    for (int j = 0; j < m.grid.n(); ++j) {
      const cplx v = sol.v[static_cast<size_t>(l) * m.grid.n() + j];
      os << m.grid.x(j) << ',' << m.z[l] << ',' << v.real() << ',' << v.imag() << '\n';
    }
}

}  // namespace capwave

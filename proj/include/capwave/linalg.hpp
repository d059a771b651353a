#pragma once

#include <Eigen/Dense>

#include <functional>

#include "util.hpp"

namespace capwave {

// Gauss-Lobatto nodes t_l = cos(pi l / N) and the collocation derivative matrix.
struct Chebyshev {
  RVec t;
  Eigen::MatrixXd D;

  explicit Chebyshev(int N) : t(N + 1), D(N + 1, N + 1) {
    if (N < 1) throw ValidationError("chebyshev: need at least two nodes");
    for (int l = 0; l <= N; ++l) t[l] = std::cos(pi * l / N);
    auto c = [N](int l) { return (l == 0 || l == N) ? 2.0 : 1.0; };
    for (int i = 0; i <= N; ++i) {
      double row = 0.0;
      for (int j = 0; j <= N; ++j) {
        if (i == j) continue;
        const double sgn = ((i + j) % 2 == 0) ? 1.0 : -1.0;
        D(i, j) = c(i) / c(j) * sgn / (t[i] - t[j]);
        row += D(i, j);
      }
      D(i, i) = -row;
    }
  }
};

using CVecOp = std::function<void(const CVec&, CVec&)>;

struct KrylovResult {
  double residual = 0.0;  // relative, in the preconditioned norm
  int iterations = 0;
  bool converged = false;
};

inline double norm2(const CVec& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

// Restarted GMRES on M^{-1} A x = M^{-1} b; x holds the initial guess.
inline KrylovResult gmres(const CVecOp& A, const CVecOp& Minv, const CVec& b, CVec& x, double tol,
                          int max_iter, int restart) {
  const size_t n = b.size();
  KrylovResult res;
  CVec tmp(n), r(n), w(n);
  Minv(b, r);
  const double bnorm = norm2(r);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), cplx{});
    res.converged = true;
    return res;
  }
  std::vector<CVec> V;
  Eigen::MatrixXcd H;
  CVec cs, sn, g;
  while (res.iterations < max_iter) {
    A(x, tmp);
    for (size_t i = 0; i < n; ++i) tmp[i] = b[i] - tmp[i];
    Minv(tmp, r);
    double beta = norm2(r);
    res.residual = beta / bnorm;
    if (res.residual <= tol) {
      res.converged = true;
      return res;
    }
    const int m = restart;
    V.assign(m + 1, CVec(n));
    H = Eigen::MatrixXcd::Zero(m + 1, m);
    cs.assign(m, cplx{});
    sn.assign(m, cplx{});
    g.assign(m + 1, cplx{});
    for (size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    g[0] = beta;
    int k = 0;
    for (; k < m && res.iterations < max_iter; ++k) {
      ++res.iterations;
      A(V[k], tmp);
      Minv(tmp, w);
      for (int i = 0; i <= k; ++i) {
        cplx h{};
        for (size_t q = 0; q < n; ++q) h += std::conj(V[i][q]) * w[q];
        H(i, k) = h;
        for (size_t q = 0; q < n; ++q) w[q] -= h * V[i][q];
      }
      const double hn = norm2(w);
      H(k + 1, k) = hn;
      if (hn > 0.0)
        for (size_t q = 0; q < n; ++q) V[k + 1][q] = w[q] / hn;
      for (int i = 0; i < k; ++i) {
        const cplx a = H(i, k), bb = H(i + 1, k);
        H(i, k) = std::conj(cs[i]) * a + std::conj(sn[i]) * bb;
        H(i + 1, k) = -sn[i] * a + cs[i] * bb;
      }
      const cplx a = H(k, k), bb = H(k + 1, k);
      const double den = std::sqrt(std::norm(a) + std::norm(bb));
      if (den == 0.0) {
        cs[k] = 1.0;
        sn[k] = 0.0;
      } else {
        cs[k] = a / den;
        sn[k] = bb / den;
      }
      H(k, k) = std::conj(cs[k]) * a + std::conj(sn[k]) * bb;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = std::conj(cs[k]) * g[k];
      if (std::abs(g[k + 1]) / bnorm <= tol || hn == 0.0) {
        ++k;
        break;
      }
    }
    Eigen::VectorXcd y(k);
    for (int i = k - 1; i >= 0; --i) {
      cplx s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y(j);
      y(i) = s / H(i, i);
    }
    for (int i = 0; i < k; ++i)
      for (size_t q = 0; q < n; ++q) x[q] += y(i) * V[i][q];
  }
  A(x, tmp);
  for (size_t i = 0; i < n; ++i) tmp[i] = b[i] - tmp[i];
  Minv(tmp, r);
  res.residual = norm2(r) / bnorm;
  res.converged = res.residual <= tol;
  return res;
}

}  // namespace capwave

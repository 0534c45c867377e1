#pragma once

// Restarted GMRES with right preconditioning, generic over any vector type
// that offers copy, `axpy(s, x)`, `*= s` and an ADL-visible `inner(x, y)`.

#include <cmath>
#include <cstddef>
#include <vector>

namespace bf::krylov {

struct GmresResult {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Solves op(x) = b starting from x (typically zero). `precond(v)` returns an
/// approximation of op^{-1} v.
template <class V, class Op, class Prec>
GmresResult gmres(const Op& op, const Prec& precond, const V& b, V& x, double rel_tol, std::size_t restart,
                  std::size_t max_iterations) {
  GmresResult res;
  const double bnorm = std::sqrt(inner(b, b));
  if (bnorm == 0.0) {
    x *= 0.0;
    res.converged = true;
    return res;
  }
  while (res.iterations < max_iterations) {
    V r = b;
    r.axpy(-1.0, op(x));
    const double beta = std::sqrt(inner(r, r));
    res.relative_residual = beta / bnorm;
    if (res.relative_residual <= rel_tol) {
      res.converged = true;
      return res;
    }
    std::vector<V> basis;
    std::vector<V> zs;
    basis.reserve(restart + 1);
    zs.reserve(restart);
    r *= 1.0 / beta;
    basis.push_back(std::move(r));
    std::vector<std::vector<double>> h(restart + 1, std::vector<double>(restart, 0.0));
    std::vector<double> cs(restart, 0.0), sn(restart, 0.0), gvec(restart + 1, 0.0);
    gvec[0] = beta;
    std::size_t j = 0;
    for (; j < restart && res.iterations < max_iterations; ++j, ++res.iterations) {
      zs.push_back(precond(basis[j]));
      V w = op(zs[j]);
      for (std::size_t i = 0; i <= j; ++i) {
        h[i][j] = inner(w, basis[i]);
        w.axpy(-h[i][j], basis[i]);
      }
      h[j + 1][j] = std::sqrt(inner(w, w));
      for (std::size_t i = 0; i < j; ++i) {
        const double t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
        h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
        h[i][j] = t;
      }
      const double denom = std::hypot(h[j][j], h[j + 1][j]);
      cs[j] = denom == 0.0 ? 1.0 : h[j][j] / denom;
      sn[j] = denom == 0.0 ? 0.0 : h[j + 1][j] / denom;
      h[j][j] = denom;
      h[j + 1][j] = 0.0;
      gvec[j + 1] = -sn[j] * gvec[j];
      gvec[j] = cs[j] * gvec[j];
      const double hnext = std::sqrt(inner(w, w));
      res.relative_residual = std::abs(gvec[j + 1]) / bnorm;
      if (res.relative_residual <= rel_tol || hnext == 0.0) {
        ++j;
        ++res.iterations;
        break;
      }
      w *= 1.0 / hnext;
      basis.push_back(std::move(w));
    }
    // Back substitution for the least-squares coefficients.
    std::vector<double> y(j, 0.0);
    for (std::size_t ii = j; ii-- > 0;) {
      double s = gvec[ii];
      for (std::size_t k = ii + 1; k < j; ++k) s -= h[ii][k] * y[k];
      y[ii] = h[ii][ii] == 0.0 ? 0.0 : s / h[ii][ii];
    }
    for (std::size_t i = 0; i < j; ++i) x.axpy(y[i], zs[i]);
    if (res.relative_residual <= rel_tol) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

}  // namespace bf::krylov

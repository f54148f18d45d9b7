#pragma once

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ksatom/errors.hpp"
#include "ksatom/radial/operators.hpp"

namespace ksatom::radial {

struct Eigenpair {
  double value = 0.0;
  std::vector<double> u;  // grid length, M-orthonormal, zero at the Dirichlet node
};

namespace detail {

// Number of eigenvalues of the pencil (A, M) below sigma: negative pivots of the
// LDL^T factorization of A - sigma M (Sylvester inertia).
inline std::size_t count_below(const ChannelOperator& op, double sigma) {
  std::size_t count = 0;
  double d = 1.0;
  for (std::size_t i = 0; i < op.dimension(); ++i) {
    d = op.diag[i] - sigma * op.mass[i] - (i > 0 ? op.off[i - 1] * op.off[i - 1] / d : 0.0);
    if (d == 0.0) d = -1e-300;
    if (d < 0.0) ++count;
  }
  return count;
}

// Brackets the (j+1)-th eigenvalue around `guess` and bisects to machine precision.
inline double bisect_eigenvalue(const ChannelOperator& op, std::size_t j, double guess) {
  double width = 1e-8 * std::max(1.0, std::abs(guess));
  double lo = guess - width, hi = guess + width;
  while (count_below(op, lo) > j) lo -= (width *= 2.0);
  width = 1e-8 * std::max(1.0, std::abs(guess));
  while (count_below(op, hi) <= j) hi += (width *= 2.0);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (count_below(op, mid) > j ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// The k smallest eigenpairs of A u = eps M u for a ChannelOperator.
///
/// The operators here are strongly graded (entries near r_min are ~1e16 times
/// those in the bulk), so the symmetric form M^{-1/2} A M^{-1/2} is handed to
/// LAPACK's MRRR driver, which keeps relative accuracy on such matrices.
/// `grid_size` is the length of the returned vectors (dimension + 1 for grid
/// operators); pass 0 to get vectors of the operator dimension.
inline std::vector<Eigenpair> lowest_eigenpairs(const ChannelOperator& op, int k, std::size_t grid_size = 0) {
  const auto m = static_cast<lapack_int>(op.dimension());
  if (k < 1) throw ContractError("lowest_eigenpairs needs k >= 1");
  if (grid_size == 0) grid_size = op.dimension();
  if (static_cast<std::size_t>(k) > op.dimension() / 4 + (op.dimension() < 8 ? 1 : 0))
    throw ContractError("lowest_eigenpairs needs k <= n/4");

  std::vector<double> scale(op.dimension());
  for (std::size_t i = 0; i < op.dimension(); ++i) {
    if (!(op.mass[i] > 0.0)) throw ContractError("mass weights must be positive");
    scale[i] = 1.0 / std::sqrt(op.mass[i]);
  }
  std::vector<double> d(op.dimension()), e(op.dimension(), 0.0);
  for (std::size_t i = 0; i < op.dimension(); ++i) d[i] = op.diag[i] * scale[i] * scale[i];
  for (std::size_t i = 0; i + 1 < op.dimension(); ++i) e[i] = op.off[i] * scale[i] * scale[i + 1];

  // dstemr mishandles the il == iu index range, so at least two pairs are requested.
  const lapack_int want = std::min<lapack_int>(std::max(k, 2), m);
  lapack_int found = 0;
  std::vector<double> w(op.dimension());
  std::vector<double> z(op.dimension() * static_cast<std::size_t>(want));
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(want));
  lapack_logical tryrac = 1;
  const lapack_int info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', m, d.data(), e.data(), 0.0, 0.0, 1, want,
                                         &found, w.data(), z.data(), m, want, support.data(), &tryrac);
  if (info != 0 || found != want)
    throw ConvergenceError("tridiagonal eigensolver failed: info = " + std::to_string(info) +
                           ", found " + std::to_string(found) + " of " + std::to_string(k));

  // MRRR loses accuracy on the upper part of such graded spectra, so its values
  // only seed an inertia-count bisection; vectors then come from inverse
  // iteration on A - sigma M, M-orthogonalized against the pairs below.
  const std::size_t n = op.dimension();
  std::vector<std::vector<double>> vecs;
  std::vector<double> values;
  for (lapack_int j = 0; j < k; ++j) {
    std::vector<double> x(n);
    const double* col = z.data() + static_cast<std::size_t>(j) * n;
    for (std::size_t i = 0; i < n; ++i) x[i] = col[i] * scale[i];
    const double sigma = detail::bisect_eigenvalue(op, static_cast<std::size_t>(j), w[static_cast<std::size_t>(j)]);
    std::vector<double> dl(op.off.begin(), op.off.begin() + static_cast<std::ptrdiff_t>(n - 1));
    std::vector<double> du(dl), du2(n), dd(n);
    std::vector<lapack_int> ipiv(n);
    for (std::size_t i = 0; i < n; ++i) dd[i] = op.diag[i] - sigma * op.mass[i];
    const bool factored =
        n > 1 && LAPACKE_dgttrf(m, dl.data(), dd.data(), du.data(), du2.data(), ipiv.data()) == 0;
    double rq = sigma;
    for (int it = 0; it < 3 && factored; ++it) {
      std::vector<double> b(n);
      for (std::size_t i = 0; i < n; ++i) b[i] = op.mass[i] * x[i];
      if (LAPACKE_dgttrs(LAPACK_COL_MAJOR, 'N', m, 1, dl.data(), dd.data(), du.data(), du2.data(), ipiv.data(),
                         b.data(), m) != 0)
        break;
      x = std::move(b);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : vecs) {
          const double c = op.inner(q, x);
          for (std::size_t i = 0; i < n; ++i) x[i] -= c * q[i];
        }
      const double norm = std::sqrt(op.inner(x, x));
      for (double& xi : x) xi /= norm;
      const double prev = rq;
      rq = op.form(x, x);
      if (std::abs(rq - prev) <= 1e-15 * std::max(1.0, std::abs(rq))) break;
    }
    if (!factored) {
      const double norm = std::sqrt(op.inner(x, x));
      for (double& xi : x) xi /= norm;
      rq = op.form(x, x);
    }
    values.push_back(rq);
    vecs.push_back(std::move(x));
  }

  std::vector<Eigenpair> out(static_cast<std::size_t>(k));
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j].value = values[j];
    out[j].u.assign(grid_size, 0.0);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      out[j].u[i] = vecs[j][i];
      peak = std::max(peak, std::abs(out[j].u[i]));
    }
    // Sign convention: first appreciable entry (closest to the origin) positive.
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(out[j].u[i]) > 1e-8 * peak) {
        if (out[j].u[i] < 0.0)
          for (double& x : out[j].u) x = -x;
        break;
      }
    }
  }
  return out;
}

/// Convenience: eigenpairs of a grid operator plus a local potential.
inline std::vector<Eigenpair> lowest_eigenpairs(const ChannelOperator& op, std::span<const double> potential,
                                                int k) {
  return lowest_eigenpairs(op.with_potential(potential), k, potential.size());
}

}  // namespace ksatom::radial

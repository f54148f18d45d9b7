#pragma once

#include <span>
#include <string>
#include <vector>

#include "ksatom/errors.hpp"
#include "ksatom/radial/grid.hpp"

namespace ksatom::radial {

/// Symmetric tridiagonal operator acting on a reduced radial function
/// u = r phi, in generalized form: (diag, off) is the stiffness matrix and
/// `mass` the diagonal quadrature weights, so the eigenproblem reads
/// A u = eps M u. The last grid node carries the Dirichlet condition
/// u(R_max) = 0 and is not an unknown; u(0) = 0 enters through the first row.
struct ChannelOperator {
  std::vector<double> diag;
  std::vector<double> off;
  std::vector<double> mass;
  int l = 0;

  std::size_t dimension() const noexcept { return diag.size(); }

  /// Operator plus a local potential V: A + M diag(V). `potential` has one
  /// entry per grid node; the Dirichlet node is ignored.
  ChannelOperator with_potential(std::span<const double> potential) const {
    if (potential.size() < dimension()) throw ContractError("potential shorter than operator");
    ChannelOperator out = *this;
    for (std::size_t i = 0; i < dimension(); ++i) out.diag[i] += mass[i] * potential[i];
    return out;
  }

  /// (M^{-1} A u) on the unknowns, padded to grid length with a zero at the Dirichlet node.
  std::vector<double> apply(std::span<const double> u) const {
    const std::size_t m = dimension();
    if (u.size() < m) throw ContractError("function shorter than operator");
    std::vector<double> out(u.size(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      double s = diag[i] * u[i];
      if (i > 0) s += off[i - 1] * u[i - 1];
      if (i + 1 < m) s += off[i] * u[i + 1];
      out[i] = s / mass[i];
    }
    return out;
  }

  /// u^T A v.
  double form(std::span<const double> u, std::span<const double> v) const {
    const std::size_t m = dimension();
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double av = diag[i] * v[i];
      if (i > 0) av += off[i - 1] * v[i - 1];
      if (i + 1 < m) av += off[i] * v[i + 1];
      s += u[i] * av;
    }
    return s;
  }

  /// u^T M v.
  double inner(std::span<const double> u, std::span<const double> v) const {
    double s = 0.0;
    for (std::size_t i = 0; i < dimension(); ++i) s += mass[i] * u[i] * v[i];
    return s;
  }
};

namespace detail {

// Fills the stiffness of -1/2 (a u')' with flux coefficients a_{i+1/2} / (dr/dt)_{i+1/2}.
inline ChannelOperator flux_stiffness(const RadialGrid& grid, std::span<const double> a_mid,
                                      double a_origin, int l) {
  const std::size_t n = grid.size();
  const std::size_t m = n - 1;
  ChannelOperator op;
  op.l = l;
  op.diag.assign(m, 0.0);
  op.off.assign(m - 1, 0.0);
  op.mass.assign(grid.dr_weights().begin(), grid.dr_weights().begin() + static_cast<std::ptrdiff_t>(m));
  const auto jac_mid = grid.jacobian_mid();
  // Segment [0, r_0] with u(0) = 0.
  op.diag[0] += 0.5 * a_origin / grid.r(0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double c = 0.5 * a_mid[i] / jac_mid[i];
    op.diag[i] += c;
    if (i + 1 < m) {
      op.diag[i + 1] += c;
      op.off[i] -= c;
    }
  }
  return op;
}

}  // namespace detail

/// -1/2 u'' + l(l+1)/(2 r^2) u: the radial reduction of -Delta/2.
inline ChannelOperator kinetic_operator(const RadialGrid& grid, int l) {
  if (l < 0) throw ContractError("angular momentum must be >= 0");
  const std::vector<double> ones(grid.size() - 1, 1.0);
  ChannelOperator op = detail::flux_stiffness(grid, ones, 1.0, l);
  const double ll = 0.5 * l * (l + 1);
  for (std::size_t i = 0; i < op.dimension(); ++i) op.diag[i] += op.mass[i] * ll / (grid.r(i) * grid.r(i));
  return op;
}

/// -1/(2 r^2) (r^2 a phi')' + a l(l+1)/(2 r^2) phi written on u = r phi:
///   -1/2 (a u')' + a'/(2 r) u + a l(l+1)/(2 r^2) u.
/// Reduces to kinetic_operator entrywise when a == 1.
inline ChannelOperator divergence_form_operator(const RadialGrid& grid, std::span<const double> a, int l,
                                                double a_min = 1e-6) {
  if (l < 0) throw ContractError("angular momentum must be >= 0");
  const std::size_t n = grid.size();
  if (a.size() != n) throw ContractError("coefficient size does not match grid");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(a[i] >= a_min))
      throw ContractError("ellipticity violated: a(r) = " + std::to_string(a[i]) + " < a_min at r = " +
                          std::to_string(grid.r(i)));
  }
  std::vector<double> a_mid(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) a_mid[i] = 0.5 * (a[i] + a[i + 1]);
  ChannelOperator op = detail::flux_stiffness(grid, a_mid, a[0], l);
  const double ll = 0.5 * l * (l + 1);
  for (std::size_t i = 0; i < op.dimension(); ++i) {
    const double r = grid.r(i);
    const double da = i == 0 ? (a[1] - a[0]) / (grid.r(1) - grid.r(0))
                             : (a[i + 1] - a[i - 1]) / (grid.r(i + 1) - grid.r(i - 1));
    op.diag[i] += op.mass[i] * (0.5 * da / r + a[i] * ll / (r * r));
  }
  return op;
}

}  // namespace ksatom::radial

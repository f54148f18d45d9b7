#pragma once

#include <span>
#include <vector>

#include "ksatom/radial/grid.hpp"

namespace ksatom::radial {

/// df/dr on the nodes: second-order centered differences in t divided by dr/dt,
/// one-sided three-point stencils at both ends.
inline std::vector<double> derivative(const RadialGrid& grid, std::span<const double> f) {
  const std::size_t n = grid.size();
  if (f.size() != n) throw ContractError("function size does not match grid");
  const auto jac = grid.jacobian();
  std::vector<double> d(n);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * jac[0]);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * jac[i]);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * jac[n - 1]);
  return d;
}

/// phi = u / r.
inline std::vector<double> orbital_from_reduced(const RadialGrid& grid, std::span<const double> u) {
  std::vector<double> phi(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) phi[i] = u[i] / grid.r(i);
  return phi;
}

/// d(u/r)/dr. Differentiates phi = u/r itself: the equivalent (u' r - u) / r^2
/// cancels catastrophically near the origin.
inline std::vector<double> orbital_gradient(const RadialGrid& grid, std::span<const double> u) {
  return derivative(grid, orbital_from_reduced(grid, u));
}

}  // namespace ksatom::radial

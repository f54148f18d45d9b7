#pragma once

#include <span>
#include <vector>

#include "ksatom/radial/grid.hpp"

namespace ksatom::radial {

/// v_H(r) = (1/r) \int_0^r rho 4 pi s^2 ds + \int_r^R rho 4 pi s ds.
///
/// With cumulative trapezoid sums this is exactly the quadrature of the
/// kernel 1/max(r, r'), which is positive semidefinite, so J >= 0 holds for
/// every nonnegative discrete density.
inline std::vector<double> hartree_potential(const RadialGrid& grid, std::span<const double> rho) {
  const std::size_t n = grid.size();
  if (rho.size() != n) throw ContractError("density size does not match grid");
  const auto w = grid.weights();
  std::vector<double> v(n);
  double inner = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    inner += w[i] * rho[i];
    v[i] = inner / grid.r(i);
  }
  double outer = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    v[i] += outer;
    outer += w[i] * rho[i] / grid.r(i);
  }
  return v;
}

/// J(rho) = 1/2 \int rho v_H.
inline double hartree_energy(const RadialGrid& grid, std::span<const double> rho, std::span<const double> v_h) {
  double s = 0.0;
  const auto w = grid.weights();
  for (std::size_t i = 0; i < rho.size(); ++i) s += w[i] * rho[i] * v_h[i];
  return 0.5 * s;
}

inline double hartree_energy(const RadialGrid& grid, std::span<const double> rho) {
  const auto v = hartree_potential(grid, rho);
  return hartree_energy(grid, rho, v);
}

}  // namespace ksatom::radial

#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "ksatom/errors.hpp"
#include "ksatom/radial/calculus.hpp"
#include "ksatom/radial/grid.hpp"
#include "ksatom/radial/hartree.hpp"
#include "ksatom/radial/operators.hpp"
#include "ksatom/scf/state.hpp"
#include "ksatom/xc/exc_integral.hpp"
#include "ksatom/xc/functionals.hpp"

namespace ksatom::scf {

/// rho = 2 sum f (2l+1)/(4 pi) (u/r)^2 and its radial derivative.
inline DensityField density_from_state(const radial::RadialGrid& grid, const DensityOperatorState& state) {
  DensityField d;
  d.rho.assign(grid.size(), 0.0);
  for (const auto& ch : state.channels)
    for (const auto& s : ch) {
      if (s.occupation == 0.0) continue;
      if (s.u.size() != grid.size()) throw ContractError("orbital length does not match grid");
      const double c = 2.0 * s.occupation * (2 * s.l + 1) / (4.0 * std::numbers::pi);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double phi = s.u[i] / grid.r(i);
        d.rho[i] += c * phi * phi;
      }
    }
  d.grad = radial::derivative(grid, d.rho);
  return d;
}

/// -Z/r (when include_nuclear) + v_H + g'(rho). Negative density values
/// (possible after extrapolating mixers) are evaluated as zero.
inline std::vector<double> mean_field_potential(const radial::RadialGrid& grid, std::span<const double> rho,
                                                const xc::Functional& functional, double z, bool include_nuclear) {
  const auto* lda = std::get_if<xc::LdaFunctional>(&functional);
  if (!lda) throw ContractError("mean_field_potential takes an LDA functional; GGA runs go through the pair solver");
  std::vector<double> clipped(rho.begin(), rho.end());
  for (double& x : clipped) x = std::max(x, 0.0);
  auto v = radial::hartree_potential(grid, clipped);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] += lda->g_prime(clipped[i]);
    if (include_nuclear) v[i] -= z / grid.r(i);
  }
  return v;
}

/// Tr(-Delta gamma) = sum 2 f (2l+1) <u, K_l u>, K_l the one-half kinetic form.
inline double kinetic_trace(const std::vector<radial::ChannelOperator>& kinetic, const DensityOperatorState& state) {
  double t = 0.0;
  for (const auto& ch : state.channels)
    for (const auto& s : ch)
      if (s.occupation != 0.0)
        t += 2.0 * s.occupation * (2 * s.l + 1) * kinetic.at(static_cast<std::size_t>(s.l)).form(s.u, s.u);
  return t;
}

inline std::vector<radial::ChannelOperator> kinetic_operators(const radial::RadialGrid& grid, int l_max) {
  std::vector<radial::ChannelOperator> k;
  for (int l = 0; l <= l_max; ++l) k.push_back(radial::kinetic_operator(grid, l));
  return k;
}

/// All components of the extended Kohn-Sham energy for a state and its density.
inline Energies compute_energies(const radial::RadialGrid& grid, const std::vector<radial::ChannelOperator>& kinetic,
                                 const DensityOperatorState& state, std::span<const double> rho,
                                 const xc::Functional& functional, double z, bool include_nuclear) {
  Energies e;
  e.kinetic = kinetic_trace(kinetic, state);
  if (include_nuclear) {
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = -z * rho[i] / grid.r(i);
    e.nuclear = grid.integrate(f);
  }
  e.hartree = radial::hartree_energy(grid, rho);
  e.exc = xc::exc_integral(functional, grid, rho);
  e.sum();
  return e;
}

}  // namespace ksatom::scf

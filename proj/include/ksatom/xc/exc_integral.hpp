#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "ksatom/errors.hpp"
#include "ksatom/radial/grid.hpp"
#include "ksatom/xc/functionals.hpp"
#include "ksatom/xc/variables.hpp"

namespace ksatom::xc {

inline double exc_integral(const LdaFunctional& f, const radial::RadialGrid& grid, std::span<const double> rho) {
  if (rho.size() != grid.size()) throw ContractError("density size does not match grid");
  std::vector<double> g(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) g[i] = f.g(rho[i]);
  return grid.integrate(g);
}

/// GGA energy with kappa = |grad rho|^2 / (8 rho) built from the radial derivative of rho.
inline double exc_integral(const GgaFunctional& f, const radial::RadialGrid& grid, std::span<const double> rho,
                           std::optional<std::span<const double>> grad_rho) {
  if (rho.size() != grid.size()) throw ContractError("density size does not match grid");
  if (f.kind != GgaKind::LdaAsGga && !grad_rho)
    throw ContractError("GGA exchange-correlation energy needs the density gradient");
  std::vector<double> h(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double d = grad_rho ? (*grad_rho)[i] : 0.0;
    h[i] = f.h(rho[i], kappa_from_gradient(rho[i], d * d).kappa);
  }
  return grid.integrate(h);
}

inline double exc_integral(const Functional& f, const radial::RadialGrid& grid, std::span<const double> rho,
                           std::optional<std::span<const double>> grad_rho = std::nullopt) {
  if (const auto* l = std::get_if<LdaFunctional>(&f)) return exc_integral(*l, grid, rho);
  return exc_integral(std::get<GgaFunctional>(f), grid, rho, grad_rho);
}

}  // namespace ksatom::xc

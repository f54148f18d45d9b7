#pragma once

#include <cmath>
#include <numbers>

#include "ksatom/errors.hpp"
#include "ksatom/xc/functionals.hpp"

namespace ksatom::xc {

struct KappaResult {
  double kappa = 0.0;
  bool cusp = false;  // density vanished under a nonzero gradient; value used rho_floor
};

/// kappa = |grad rho|^2 / (8 rho) = |grad sqrt(rho)|^2 / 2.
inline KappaResult kappa_from_gradient(double rho, double grad_rho_sq) {
  if (!(rho >= 0.0) || !(grad_rho_sq >= 0.0))
    throw DomainError("kappa_from_gradient needs rho >= 0 and |grad rho|^2 >= 0");
  if (rho <= kRhoFloor) {
    if (grad_rho_sq <= kGradFloor) return {0.0, false};
    return {grad_rho_sq / (8.0 * kRhoFloor), true};
  }
  return {grad_rho_sq / (8.0 * rho), false};
}

struct ReducedVariables {
  double s = 0.0;    // reduced density gradient
  double t = 0.0;    // correlation gradient
  double r_s = 0.0;  // Wigner-Seitz radius
};

inline ReducedVariables reduced_variables(double rho, double grad_rho_norm) {
  if (!(rho > 0.0)) throw DomainError("reduced_variables needs rho > 0");
  if (!(grad_rho_norm >= 0.0)) throw DomainError("reduced_variables needs |grad rho| >= 0");
  constexpr double pi = std::numbers::pi;
  ReducedVariables out;
  out.s = grad_rho_norm / (2.0 * std::cbrt(3.0 * pi * pi) * std::pow(rho, 4.0 / 3.0));
  out.t = grad_rho_norm / (4.0 * std::pow(3.0 / pi, 1.0 / 6.0) * std::pow(rho, 7.0 / 6.0));
  out.r_s = std::cbrt(3.0 / (4.0 * pi * rho));
  return out;
}

}  // namespace ksatom::xc

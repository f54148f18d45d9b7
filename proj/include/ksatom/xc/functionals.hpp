#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "ksatom/errors.hpp"
#include "ksatom/xc/jet.hpp"

namespace ksatom::xc {

// Division guards for s, t and kappa. Below these the functionals return their rho -> 0 limits.
inline constexpr double kRhoFloor = 1e-30;
inline constexpr double kGradFloor = 1e-30;

namespace detail {

inline constexpr double kPi = std::numbers::pi;

// g_x(rho) = -kDiracCx rho^{4/3};  eps_x(rho) = -kDiracCx rho^{1/3}
inline const double kDiracCx = 0.75 * std::cbrt(3.0 / kPi);

template <class T>
T dirac_exchange(const T& rho) {
  using std::pow;
  return -kDiracCx * pow(rho, 4.0 / 3.0);
}

template <class T>
T wigner_seitz_radius(const T& rho) {
  using std::pow;
  return std::cbrt(3.0 / (4.0 * kPi)) * pow(rho, -1.0 / 3.0);
}

// Perdew-Zunger 1981 unpolarized correlation energy per electron.
template <class T>
T pz81_epsilon(const T& rs) {
  using std::log;
  using std::sqrt;
  constexpr double gamma = -0.1423, beta1 = 1.0529, beta2 = 0.3334;
  constexpr double a = 0.0311, b = -0.048, c = 0.0020, d = -0.0116;
  if (value_of(rs) >= 1.0) return gamma / (1.0 + beta1 * sqrt(rs) + beta2 * rs);
  const T lnrs = log(rs);
  return a * lnrs + b + c * rs * lnrs + d * rs;
}

}  // namespace detail

enum class LdaKind { None, DiracExchange, PZ81Correlation, DiracPlusPZ81 };

struct LdaValue {
  double g = 0.0;
  double g_prime = 0.0;
};

/// Local density functional E_xc = \int g(rho). The declared exponents are
/// the growth constants the functional claims; the hypothesis checker measures them.
struct LdaFunctional {
  LdaKind kind = LdaKind::DiracPlusPZ81;
  double declared_alpha = 4.0 / 3.0;
  double declared_beta_minus = 1.0 / 3.0;
  double declared_beta_plus = 1.0 / 3.0;

  /// Energy density g(rho) for rho above the floor; T is double or Jet.
  template <class T>
  T energy_density(const T& rho) const {
    switch (kind) {
      case LdaKind::None:
        return T(0.0);
      case LdaKind::DiracExchange:
        return detail::dirac_exchange(rho);
      case LdaKind::PZ81Correlation:
        return rho * detail::pz81_epsilon(detail::wigner_seitz_radius(rho));
      case LdaKind::DiracPlusPZ81:
        return detail::dirac_exchange(rho) + rho * detail::pz81_epsilon(detail::wigner_seitz_radius(rho));
    }
    return T(0.0);
  }

  LdaValue evaluate(double rho) const {
    if (!(rho >= 0.0)) throw DomainError("LDA evaluated at negative density " + std::to_string(rho));
    if (rho <= kRhoFloor) return {};
    const Jet j = energy_density(Jet::rho(rho));
    return {j.v, j.d_rho};
  }

  double g(double rho) const { return evaluate(rho).g; }
  double g_prime(double rho) const { return evaluate(rho).g_prime; }

  std::string id() const {
    switch (kind) {
      case LdaKind::None: return "none";
      case LdaKind::DiracExchange: return "lda-x";
      case LdaKind::PZ81Correlation: return "pz81";
      case LdaKind::DiracPlusPZ81: return "lda-x+pz81";
    }
    return "?";
  }
};

/// PBE constants. theta and upsilon follow from mu.
struct PbeParameters {
  double mu = 0.21951;
  double nu = 0.804;
  double theta = (1.0 - std::numbers::ln2) / (std::numbers::pi * std::numbers::pi);
  double upsilon = 3.0 * 0.21951 / (std::numbers::pi * std::numbers::pi);
};

/// Point in the (rho, kappa) plane, kappa = |grad sqrt(rho)|^2 / 2.
struct DensityPoint {
  double rho = 0.0;
  double kappa = 0.0;
};

struct GgaValue {
  double h = 0.0;
  double dh_drho = 0.0;
  double dh_dkappa = 0.0;
  double d2h_dkappa2 = 0.0;
};

enum class GgaKind { PbeExchange, PbeCorrelation, PbeFull, LdaAsGga };

/// Gradient-corrected functional E_xc = \int h(rho, kappa). h is the full
/// exchange-correlation energy density (no LDA baseline subtracted).
struct GgaFunctional {
  GgaKind kind = GgaKind::PbeFull;
  PbeParameters pbe{};
  LdaFunctional lda{};  // only used for LdaAsGga
  // Ellipticity bounds a <= 1 + dh/dkappa <= b the functional declares, when known.
  std::optional<std::array<double, 2>> declared_ellipticity{};

  template <class T>
  T exchange_density(const T& rho, const T& kappa) const {
    using std::pow;
    // s^2 = 2 kappa / ((3 pi^2)^{2/3} rho^{5/3})
    const double c_s = 2.0 / std::pow(3.0 * detail::kPi * detail::kPi, 2.0 / 3.0);
    const T s2 = c_s * kappa * pow(rho, -5.0 / 3.0);
    const T fx = 1.0 + pbe.mu * s2 / (1.0 + (pbe.mu / pbe.nu) * s2);
    return detail::dirac_exchange(rho) * fx;
  }

  template <class T>
  T correlation_density(const T& rho, const T& kappa) const {
    using std::expm1;
    using std::log1p;
    using std::pow;
    const T eps_c = detail::pz81_epsilon(detail::wigner_seitz_radius(rho));
    // t^2 = kappa / (2 (3/pi)^{1/3} rho^{4/3})
    const double c_t = 1.0 / (2.0 * std::cbrt(3.0 / detail::kPi));
    const T t2 = c_t * kappa * pow(rho, -4.0 / 3.0);
    const double ratio = pbe.upsilon / pbe.theta;
    // With E = expm1(-eps_c/theta), A = ratio/E and y = A t^2, the gradient
    // correction H satisfies eps_c + H = theta log1p(expm1(eps_c/theta) / (1 + y + y^2)),
    // which avoids the cancellation between eps_c and H at large t.
    const T e = expm1(-eps_c / pbe.theta);
    if (value_of(e) == 0.0) return T(0.0) * rho;
    const T y = ratio * t2 / e;
    T inv_d(1.0);
    if (value_of(y) <= 1.0) {
      inv_d = 1.0 / (1.0 + y + y * y);
    } else {
      const T q = 1.0 / y;
      inv_d = q * q / (1.0 + q + q * q);
    }
    return rho * pbe.theta * log1p(expm1(eps_c / pbe.theta) * inv_d);
  }

  template <class T>
  T energy_density(const T& rho, const T& kappa) const {
    switch (kind) {
      case GgaKind::PbeExchange: return exchange_density(rho, kappa);
      case GgaKind::PbeCorrelation: return correlation_density(rho, kappa);
      case GgaKind::PbeFull: return exchange_density(rho, kappa) + correlation_density(rho, kappa);
      case GgaKind::LdaAsGga: return lda.energy_density(rho);
    }
    return T(0.0);
  }

  GgaValue evaluate(const DensityPoint& p) const {
    if (!(p.rho >= 0.0) || !(p.kappa >= 0.0))
      throw DomainError("GGA evaluated outside rho >= 0, kappa >= 0");
    if (p.rho <= kRhoFloor) return {};
    const Jet j = energy_density(Jet::rho(p.rho), Jet::kappa(p.kappa));
    return {j.v, j.d_rho, j.d_kappa, j.d_kappa2};
  }

  double h(double rho, double kappa) const { return evaluate({rho, kappa}).h; }

  std::string id() const {
    switch (kind) {
      case GgaKind::PbeExchange: return "pbe-x";
      case GgaKind::PbeCorrelation: return "pbe-c";
      case GgaKind::PbeFull: return "pbe";
      case GgaKind::LdaAsGga: return "gga:" + lda.id();
    }
    return "?";
  }
};

using Functional = std::variant<LdaFunctional, GgaFunctional>;

inline GgaFunctional lda_as_gga(const LdaFunctional& f) {
  GgaFunctional g;
  g.kind = GgaKind::LdaAsGga;
  g.lda = f;
  g.declared_ellipticity = std::array<double, 2>{1.0, 1.0};
  return g;
}

inline constexpr std::array<std::string_view, 7> kRegisteredIds = {
    "none", "lda-x", "pz81", "lda-x+pz81", "pbe-x", "pbe-c", "pbe"};

/// Registry lookup. "gga:<lda-id>" wraps an LDA as a GGA with dh/dkappa = 0.
inline Functional make_functional(std::string_view id) {
  if (id.starts_with("gga:")) {
    const Functional inner = make_functional(id.substr(4));
    if (const auto* l = std::get_if<LdaFunctional>(&inner)) return lda_as_gga(*l);
    throw ContractError("gga: prefix needs an LDA id, got '" + std::string(id) + "'");
  }
  if (id == "none") return LdaFunctional{LdaKind::None};
  if (id == "lda-x") return LdaFunctional{LdaKind::DiracExchange};
  if (id == "pz81") return LdaFunctional{LdaKind::PZ81Correlation};
  if (id == "lda-x+pz81" || id == "lda") return LdaFunctional{LdaKind::DiracPlusPZ81};
  if (id == "pbe-x") return GgaFunctional{GgaKind::PbeExchange};
  if (id == "pbe-c") return GgaFunctional{GgaKind::PbeCorrelation};
  if (id == "pbe") return GgaFunctional{GgaKind::PbeFull};
  throw ContractError("unknown functional id '" + std::string(id) + "'");
}

inline std::string functional_id(const Functional& f) {
  return std::visit([](const auto& x) { return x.id(); }, f);
}

inline bool is_lda(const Functional& f) { return std::holds_alternative<LdaFunctional>(f); }

/// Every functional viewed as a GGA.
inline GgaFunctional as_gga(const Functional& f) {
  if (const auto* l = std::get_if<LdaFunctional>(&f)) return lda_as_gga(*l);
  return std::get<GgaFunctional>(f);
}

/// PBE exchange enhancement factor F_x(s).
inline double pbe_enhancement(double s, const PbeParameters& p = {}) {
  const double s2 = s * s;
  return 1.0 + p.mu * s2 / (1.0 + (p.mu / p.nu) * s2);
}

}  // namespace ksatom::xc

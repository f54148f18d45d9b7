#pragma once

#include <cmath>

namespace ksatom::xc {

/// Truncated Taylor jet in (rho, kappa): carries the value, the first
/// derivative in rho, and first and second derivatives in kappa.
/// Functionals are written once as templates and evaluated on either
/// double (value only) or Jet (value plus exact partials).
struct Jet {
  double v = 0.0;
  double d_rho = 0.0;
  double d_kappa = 0.0;
  double d_kappa2 = 0.0;

  constexpr Jet() = default;
  constexpr Jet(double value) : v(value) {}  // NOLINT: constants promote implicitly
  constexpr Jet(double value, double dr, double dk, double dkk)
      : v(value), d_rho(dr), d_kappa(dk), d_kappa2(dkk) {}

  static constexpr Jet rho(double value) { return {value, 1.0, 0.0, 0.0}; }
  static constexpr Jet kappa(double value) { return {value, 0.0, 1.0, 0.0}; }
};

// Chain rule for a scalar function with value f, derivative f1, second derivative f2.
constexpr Jet chain(const Jet& x, double f, double f1, double f2) {
  return {f, f1 * x.d_rho, f1 * x.d_kappa, f2 * x.d_kappa * x.d_kappa + f1 * x.d_kappa2};
}

constexpr Jet operator+(const Jet& a, const Jet& b) {
  return {a.v + b.v, a.d_rho + b.d_rho, a.d_kappa + b.d_kappa, a.d_kappa2 + b.d_kappa2};
}
constexpr Jet operator-(const Jet& a, const Jet& b) {
  return {a.v - b.v, a.d_rho - b.d_rho, a.d_kappa - b.d_kappa, a.d_kappa2 - b.d_kappa2};
}
constexpr Jet operator-(const Jet& a) { return {-a.v, -a.d_rho, -a.d_kappa, -a.d_kappa2}; }
constexpr Jet operator*(const Jet& a, const Jet& b) {
  return {a.v * b.v, a.d_rho * b.v + a.v * b.d_rho, a.d_kappa * b.v + a.v * b.d_kappa,
          a.d_kappa2 * b.v + 2.0 * a.d_kappa * b.d_kappa + a.v * b.d_kappa2};
}
constexpr Jet reciprocal(const Jet& x) {
  const double inv = 1.0 / x.v;
  return chain(x, inv, -inv * inv, 2.0 * inv * inv * inv);
}
constexpr Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

constexpr Jet operator+(const Jet& a, double b) { return {a.v + b, a.d_rho, a.d_kappa, a.d_kappa2}; }
constexpr Jet operator+(double a, const Jet& b) { return b + a; }
constexpr Jet operator-(const Jet& a, double b) { return {a.v - b, a.d_rho, a.d_kappa, a.d_kappa2}; }
constexpr Jet operator-(double a, const Jet& b) { return -b + a; }
constexpr Jet operator*(const Jet& a, double b) {
  return {a.v * b, a.d_rho * b, a.d_kappa * b, a.d_kappa2 * b};
}
constexpr Jet operator*(double a, const Jet& b) { return b * a; }
constexpr Jet operator/(const Jet& a, double b) { return a * (1.0 / b); }
constexpr Jet operator/(double a, const Jet& b) { return a * reciprocal(b); }

inline Jet exp(const Jet& x) {
  const double e = std::exp(x.v);
  return chain(x, e, e, e);
}
inline Jet expm1(const Jet& x) {
  const double e = std::exp(x.v);
  return chain(x, std::expm1(x.v), e, e);
}
inline Jet log(const Jet& x) { return chain(x, std::log(x.v), 1.0 / x.v, -1.0 / (x.v * x.v)); }
inline Jet log1p(const Jet& x) {
  const double d = 1.0 / (1.0 + x.v);
  return chain(x, std::log1p(x.v), d, -d * d);
}
inline Jet sqrt(const Jet& x) {
  const double s = std::sqrt(x.v);
  return chain(x, s, 0.5 / s, -0.25 / (s * x.v));
}
inline Jet pow(const Jet& x, double p) {
  const double f = std::pow(x.v, p);
  return chain(x, f, p * f / x.v, p * (p - 1.0) * f / (x.v * x.v));
}

inline double value_of(double x) { return x; }
inline long double value_of(long double x) { return x; }
inline double value_of(const Jet& x) { return x.v; }

}  // namespace ksatom::xc

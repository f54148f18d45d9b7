#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ksatom/errors.hpp"

namespace ksatom::radial {

enum class Spacing { Log, Linear };

inline std::string to_string(Spacing s) { return s == Spacing::Log ? "log" : "linear"; }

struct GridSpec {
  double r_min = 1e-6;
  double r_max = 40.0;
  int n = 4000;
  Spacing spacing = Spacing::Log;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Nodes r_i = r(t_i) on the uniform index variable t_i = i. Every field of
/// the solver lives on these nodes. Integrals are taken in t with the
/// Jacobian dr/dt, which makes the plain trapezoid rule spectrally accurate
/// for integrands that decay at both ends.
class RadialGrid {
 public:
  static RadialGrid build(const GridSpec& spec) {
    if (!(spec.r_min > 0.0) || !(spec.r_max > spec.r_min))
      throw ContractError("build_grid needs 0 < r_min < R_max");
    if (spec.n < 64) throw ContractError("build_grid needs n >= 64");

    RadialGrid g;
    g.spec_ = spec;
    const auto n = static_cast<std::size_t>(spec.n);
    g.r_.resize(n);
    g.jac_.resize(n);
    g.jac_mid_.resize(n - 1);
    if (spec.spacing == Spacing::Log) {
      g.step_ = std::log(spec.r_max / spec.r_min) / static_cast<double>(n - 1);
      for (std::size_t i = 0; i < n; ++i) {
        g.r_[i] = spec.r_min * std::exp(g.step_ * static_cast<double>(i));
        g.jac_[i] = g.step_ * g.r_[i];
      }
      g.r_.back() = spec.r_max;
      for (std::size_t i = 0; i + 1 < n; ++i)
        g.jac_mid_[i] = g.step_ * spec.r_min * std::exp(g.step_ * (static_cast<double>(i) + 0.5));
    } else {
      g.step_ = (spec.r_max - spec.r_min) / static_cast<double>(n - 1);
      for (std::size_t i = 0; i < n; ++i) {
        g.r_[i] = spec.r_min + g.step_ * static_cast<double>(i);
        g.jac_[i] = g.step_;
      }
      g.r_.back() = spec.r_max;
      std::fill(g.jac_mid_.begin(), g.jac_mid_.end(), g.step_);
    }

    // Fourth-order end-corrected trapezoid in t.
    constexpr std::array<double, 3> end = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
    g.dr_w_.assign(n, 1.0);
    for (std::size_t k = 0; k < end.size(); ++k) {
      g.dr_w_[k] = end[k];
      g.dr_w_[n - 1 - k] = end[k];
    }
    g.w_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      g.dr_w_[i] *= g.jac_[i];
      g.w_[i] = 4.0 * std::numbers::pi * g.r_[i] * g.r_[i] * g.dr_w_[i];
    }
    return g;
  }

  static RadialGrid build(double r_min, double r_max, int n, Spacing spacing) {
    return build(GridSpec{r_min, r_max, n, spacing});
  }

  std::size_t size() const noexcept { return r_.size(); }
  const GridSpec& spec() const noexcept { return spec_; }
  double step() const noexcept { return step_; }

  std::span<const double> r() const noexcept { return r_; }
  double r(std::size_t i) const noexcept { return r_[i]; }
  /// Volume weights: sum_i w_i f_i ~ \int f(r) 4 pi r^2 dr.
  std::span<const double> weights() const noexcept { return w_; }
  /// Line weights: sum_i dr_w_i f_i ~ \int f(r) dr.
  std::span<const double> dr_weights() const noexcept { return dr_w_; }
  /// dr/dt at the nodes and at the half-integer points t_i + 1/2.
  std::span<const double> jacobian() const noexcept { return jac_; }
  std::span<const double> jacobian_mid() const noexcept { return jac_mid_; }

  /// \int f d^3r over the grid for a spherically symmetric f.
  double integrate(std::span<const double> f) const {
    check_size(f);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += w_[i] * f[i];
    return s;
  }

  /// \int f(r) dr.
  double integrate_dr(std::span<const double> f) const {
    check_size(f);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += dr_w_[i] * f[i];
    return s;
  }

  /// \int_{r_min <= |x| <= radius} f d^3x. f is interpolated by a cubic in t;
  /// the volume factor 4 pi r^2 dr/dt is evaluated exactly, so the upper limit
  /// need not be a node and coarse log grids stay accurate.
  double integrate_ball(std::span<const double> f, double radius) const {
    check_size(f);
    if (!(radius >= r_.front()) || radius > r_.back() * (1.0 + 1e-12))
      throw ContractError("integrate_ball radius outside [r_min, R_max]");
    radius = std::min(radius, r_.back());
    const double t_end = t_of(radius);
    double s = 0.0;
    const auto last = static_cast<std::size_t>(std::floor(t_end));
    for (std::size_t i = 0; i < last && i + 1 < f.size(); ++i) s += ball_interval(f, i, 0.0, 1.0);
    const double frac = t_end - static_cast<double>(last);
    if (frac > 0.0 && last + 1 < f.size()) s += ball_interval(f, last, 0.0, frac);
    return s;
  }

  /// Index coordinate of radius r (inverse of the node map).
  double t_of(double radius) const {
    if (spec_.spacing == Spacing::Log) return std::log(radius / spec_.r_min) / step_;
    return (radius - spec_.r_min) / step_;
  }

 private:
  void check_size(std::span<const double> f) const {
    if (f.size() != r_.size()) throw ContractError("radial function size does not match grid");
  }

  double r_at(double t) const {
    return spec_.spacing == Spacing::Log ? spec_.r_min * std::exp(step_ * t) : spec_.r_min + step_ * t;
  }
  double jac_at(double t) const { return spec_.spacing == Spacing::Log ? step_ * r_at(t) : step_; }

  // Integral over t in [i + a, i + b] of cubic(f) * 4 pi r^2 dr/dt, with the
  // cubic through nodes i-1..i+2 (clamped at the ends), by 5-point Gauss-Legendre.
  double ball_interval(std::span<const double> y, std::size_t i, double a, double b) const {
    static constexpr double kX[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                     0.9061798459386640};
    static constexpr double kW[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                     0.4786286704993665, 0.2369268850561891};
    const auto n = static_cast<std::ptrdiff_t>(y.size());
    const std::ptrdiff_t first = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) - 1, 0, n - 4);
    const double x0 = static_cast<double>(first);
    auto interp = [&](double x) {
      double s = 0.0;
      for (int j = 0; j < 4; ++j) {
        double lj = 1.0;
        for (int m = 0; m < 4; ++m)
          if (m != j) lj *= (x - (x0 + m)) / static_cast<double>(j - m);
        s += lj * y[static_cast<std::size_t>(first + j)];
      }
      return s;
    };
    const double mid = static_cast<double>(i) + 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (int q = 0; q < 5; ++q) {
      const double t = mid + half * kX[q];
      const double r = r_at(t);
      s += kW[q] * interp(t) * 4.0 * std::numbers::pi * r * r * jac_at(t);
    }
    return half * s;
  }

  GridSpec spec_{};
  double step_ = 0.0;
  std::vector<double> r_, w_, dr_w_, jac_, jac_mid_;
};

}  // namespace ksatom::radial

#pragma once

#include <cmath>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "ksatom/errors.hpp"

namespace ksatom::scf {

enum class MixingKind { Simple, Anderson };

inline const char* to_string(MixingKind k) { return k == MixingKind::Simple ? "simple" : "anderson"; }

struct MixingSpec {
  MixingKind kind = MixingKind::Simple;
  double beta = 0.3;
  int depth = 5;  // Anderson history length

  void validate() const {
    if (!(beta > 0.0 && beta <= 1.0)) throw ContractError("mixing beta must lie in (0, 1]");
    if (kind == MixingKind::Anderson && depth < 1) throw ContractError("Anderson depth must be >= 1");
  }
};

/// Density mixer: x_in, F = x_out - x_in -> next x_in. Inner products use the
/// supplied quadrature weights.
class DensityMixer {
 public:
  DensityMixer(MixingSpec spec, std::span<const double> weights) : spec_(spec), w_(weights.begin(), weights.end()) {}

  std::vector<double> next(std::span<const double> x, std::span<const double> f) {
    const std::size_t n = x.size();
    std::vector<double> out(n);
    if (spec_.kind == MixingKind::Simple) {
      for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + spec_.beta * f[i];
      return out;
    }
    if (!prev_x_.empty()) {
      dx_.emplace_back(n);
      df_.emplace_back(n);
      for (std::size_t i = 0; i < n; ++i) {
        dx_.back()[i] = x[i] - prev_x_[i];
        df_.back()[i] = f[i] - prev_f_[i];
      }
      if (static_cast<int>(dx_.size()) > spec_.depth) {
        dx_.pop_front();
        df_.pop_front();
      }
    }
    prev_x_.assign(x.begin(), x.end());
    prev_f_.assign(f.begin(), f.end());

    const std::size_t m = df_.size();
    std::vector<double> gamma(m, 0.0);
    if (m > 0) {
      // Normal equations (dF^T W dF) gamma = dF^T W f with a relative ridge.
      std::vector<double> a(m * m), b(m);
      for (std::size_t p = 0; p < m; ++p) {
        b[p] = dot(df_[p], f);
        for (std::size_t q = 0; q <= p; ++q) a[p * m + q] = a[q * m + p] = dot(df_[p], df_[q]);
      }
      double tr = 0.0;
      for (std::size_t p = 0; p < m; ++p) tr += a[p * m + p];
      for (std::size_t p = 0; p < m; ++p) a[p * m + p] += 1e-12 * tr / static_cast<double>(m);
      gamma = solve(a, b, m);
    }
    for (std::size_t i = 0; i < n; ++i) {
      double xb = x[i], fb = f[i];
      for (std::size_t p = 0; p < m; ++p) {
        xb -= gamma[p] * dx_[p][i];
        fb -= gamma[p] * df_[p][i];
      }
      out[i] = xb + spec_.beta * fb;
    }
    return out;
  }

 private:
  double dot(std::span<const double> u, std::span<const double> v) const {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += w_[i] * u[i] * v[i];
    return s;
  }

  // Gaussian elimination with partial pivoting on a small dense system.
  static std::vector<double> solve(std::vector<double> a, std::vector<double> b, std::size_t m) {
    for (std::size_t c = 0; c < m; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < m; ++r)
        if (std::abs(a[r * m + c]) > std::abs(a[piv * m + c])) piv = r;
      if (a[piv * m + c] == 0.0) return std::vector<double>(m, 0.0);
      if (piv != c) {
        for (std::size_t k = 0; k < m; ++k) std::swap(a[c * m + k], a[piv * m + k]);
        std::swap(b[c], b[piv]);
      }
      for (std::size_t r = c + 1; r < m; ++r) {
        const double s = a[r * m + c] / a[c * m + c];
        for (std::size_t k = c; k < m; ++k) a[r * m + k] -= s * a[c * m + k];
        b[r] -= s * b[c];
      }
    }
    std::vector<double> x(m);
    for (std::size_t c = m; c-- > 0;) {
      double s = b[c];
      for (std::size_t k = c + 1; k < m; ++k) s -= a[c * m + k] * x[k];
      x[c] = s / a[c * m + c];
    }
    return x;
  }

  MixingSpec spec_;
  std::vector<double> w_;
  std::vector<double> prev_x_, prev_f_;
  std::deque<std::vector<double>> dx_, df_;
};

}  // namespace ksatom::scf

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ksatom/errors.hpp"
#include "ksatom/xc/functionals.hpp"

namespace ksatom::checker {

struct SampleSpec {
  double rho_min = 1e-10;
  double rho_max = 1e4;
  int n_rho = 256;
  double kappa_min = 1e-10;  // smallest nonzero kappa; kappa = 0 is always sampled
  double kappa_max = 1e4;
  int n_kappa = 129;         // including kappa = 0
  double delta_neg = 1e-6;
  double ratio_cap = 1e6;
  double sign_tol = 1e-12;

  void validate() const {
    if (!(rho_min > 0.0) || !(rho_max > rho_min)) throw ContractError("sample spec needs 0 < rho_min < rho_max");
    if (!(kappa_min > 0.0) || !(kappa_max > kappa_min))
      throw ContractError("sample spec needs 0 < kappa_min < kappa_max");
    if (n_rho < 64 || n_kappa < 64) throw ContractError("sample spec needs at least 64 points per axis");
    if (!(delta_neg > 0.0) || !(ratio_cap > 0.0)) throw ContractError("sample spec thresholds must be positive");
  }

  std::vector<double> rho_samples() const { return geometric(rho_min, rho_max, n_rho); }

  std::vector<double> kappa_samples() const {
    std::vector<double> k{0.0};
    const auto rest = geometric(kappa_min, kappa_max, n_kappa - 1);
    k.insert(k.end(), rest.begin(), rest.end());
    return k;
  }

  static std::vector<double> geometric(double lo, double hi, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    const double step = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
    x.back() = hi;
    return x;
  }
};

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct Witness {
  double rho = 0.0;
  double kappa = 0.0;
  double value = 0.0;  // the offending quantity at (rho, kappa)
};

struct ConditionResult {
  std::string id;
  Verdict verdict = Verdict::Inconclusive;
  std::optional<Witness> witness;
  std::string detail;
};

struct ExponentFit {
  double exponent = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  double lo = 0.0, hi = 0.0;  // rho range of the tail used
  bool conclusive = false;
};

struct TailFits {
  ExponentFit low;
  ExponentFit high;
};

enum class FitMode { DerivativeGrowth, SmallRhoLimit };

struct ConditionReport {
  std::string functional;
  std::vector<ConditionResult> conditions;
  std::vector<ConditionResult> relaxed;  // weaker sign condition, reported alongside
  std::optional<ExponentFit> alpha, beta_minus, beta_plus;
  std::optional<double> fitted_a, fitted_b;
  std::optional<double> limsup_estimate;

  const ConditionResult* find(std::string_view id) const {
    for (const auto& c : conditions)
      if (c.id == id) return &c;
    for (const auto& c : relaxed)
      if (c.id == id) return &c;
    return nullptr;
  }
  bool all_pass() const {
    return std::all_of(conditions.begin(), conditions.end(),
                       [](const ConditionResult& c) { return c.verdict == Verdict::Pass; });
  }
};

namespace detail {

inline ExponentFit regress(std::span<const std::pair<double, double>> pts) {
  ExponentFit f;
  f.samples = pts.size();
  if (pts.size() < 3) return f;
  double sx = 0, sy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
  }
  const double n = static_cast<double>(pts.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  f.exponent = sxy / sxx;
  double ssr = 0;
  for (const auto& [x, y] : pts) {
    const double e = y - my - f.exponent * (x - mx);
    ssr += e * e;
  }
  f.std_error = std::sqrt(ssr / (n - 2) / sxx);
  f.lo = std::exp(pts.front().first);
  f.hi = std::exp(pts.back().first);
  return f;
}

}  // namespace detail

/// Log-log regression slopes of |value| on the low-rho and high-rho tails of
/// `samples` (each tail is a quarter of the points, at least 16). In
/// SmallRhoLimit mode only the low tail is meaningful. Tails that cannot be
/// fitted (fewer than 16 usable points or under 4 decades overall) come back
/// with conclusive = false.
inline TailFits fit_exponents(std::span<const std::pair<double, double>> samples, FitMode mode) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [rho, v] : samples)
    if (rho > 0.0 && std::abs(v) > 0.0 && std::isfinite(v)) pts.emplace_back(std::log(rho), std::log(std::abs(v)));
  std::sort(pts.begin(), pts.end());
  TailFits out;
  if (pts.size() < 16 || pts.back().first - pts.front().first < 4.0 * std::log(10.0)) {
    out.low.samples = out.high.samples = pts.size();
    return out;
  }
  const std::size_t tail = std::min(pts.size(), std::max<std::size_t>(16, pts.size() / 4));
  out.low = detail::regress(std::span(pts).first(tail));
  out.low.conclusive = true;
  if (mode == FitMode::DerivativeGrowth) {
    out.high = detail::regress(std::span(pts).last(tail));
    out.high.conclusive = true;
  }
  return out;
}

namespace detail {

// Shared logic for the growth bound sup |d| / (rho^b- + rho^b+) < inf. `mags`
// holds (rho, sup over kappa of |d|) pairs; zero magnitudes mean the ratio is 0.
inline ConditionResult growth_condition(std::string id, const std::vector<std::pair<double, double>>& mags,
                                        const SampleSpec& spec, double lower_bound, ConditionReport* report) {
  ConditionResult c{std::move(id), Verdict::Pass, std::nullopt, ""};
  double peak = 0.0;
  for (const auto& m : mags) peak = std::max(peak, m.second);
  if (peak == 0.0) {
    c.detail = "identically zero on the sample box";
    return c;
  }
  const auto fits = fit_exponents(mags, FitMode::DerivativeGrowth);
  if (report) {
    report->beta_minus = fits.low;
    report->beta_plus = fits.high;
  }
  if (!fits.low.conclusive || !fits.high.conclusive) {
    c.verdict = Verdict::Inconclusive;
    c.detail = "too few nonzero samples to fit tail exponents";
    return c;
  }
  const double b_lo = fits.low.exponent, b_hi = fits.high.exponent;
  // Admissible exponents exist iff lower_bound <= b_lo (b_lo > 0) and b_hi < 2/3: take
  // beta- <= b_lo and beta+ >= max(b_hi, beta-). The ratio is formed with the clamped
  // choice, so an out-of-window tail shows up as growth at the matching end of the box.
  const double e_lo = std::clamp(b_lo, lower_bound, 2.0 / 3.0);
  const double e_hi = std::clamp(b_hi, e_lo, 2.0 / 3.0);
  double worst = 0.0;
  Witness w;
  for (const auto& [rho, m] : mags) {
    const double ratio = m / (std::pow(rho, e_lo) + std::pow(rho, e_hi));
    if (ratio > worst) {
      worst = ratio;
      w = {rho, 0.0, ratio};
    }
  }
  const double tol = 3.0 * std::max(fits.low.std_error, fits.high.std_error) + 1e-9;
  const bool in_window = b_lo > lower_bound - tol && b_lo > 0.0 && b_hi < 2.0 / 3.0 - tol;
  c.detail = "tail exponents " + std::to_string(b_lo) + ", " + std::to_string(b_hi) + "; max ratio " +
             std::to_string(worst);
  if (worst >= spec.ratio_cap || !in_window) {
    c.verdict = Verdict::Fail;
    if (!in_window) {
      // Witness at the end of the box whose tail left the window.
      const bool high_end = !(b_hi < 2.0 / 3.0 - tol);
      const auto& end = high_end ? mags.back() : mags.front();
      w = {end.first, 0.0, high_end ? b_hi : b_lo};
      c.detail += high_end ? "; high-density tail exponent not below 2/3" : "; low-density tail exponent outside window";
    }
    c.witness = w;
  }
  return c;
}

// limsup < 0 certified as: ratio <= -delta on the smallest 16 sampled rho.
template <class Ratio>
ConditionResult negativity_condition(std::string id, const std::vector<double>& rho, const SampleSpec& spec,
                                     Ratio&& ratio_at, double* limsup) {
  ConditionResult c{std::move(id), Verdict::Pass, std::nullopt, ""};
  const std::size_t count = std::min<std::size_t>(16, rho.size());
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    const auto [r, kappa, value] = ratio_at(rho[i]);
    if (!(value <= -spec.delta_neg) && !c.witness) c.witness = Witness{r, kappa, value};
    worst = std::max(worst, value);
  }
  if (limsup) *limsup = worst;
  c.detail = "largest ratio over the smallest densities " + std::to_string(worst);
  if (c.witness) c.verdict = Verdict::Fail;
  return c;
}

}  // namespace detail

namespace detail {

// Golden-section maximization of f on [lo, hi].
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-12 * (1.0 + std::abs(lo)); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

// Polishes a grid maximum of f(log rho, log kappa) by coordinate-wise golden
// sections within one grid cell of the start; kappa = 0 starts stay on that edge.
template <class F>
double polish_max(F&& f, const std::vector<double>& rho, const std::vector<double>& kappa, std::size_t i,
                  std::size_t j, double start) {
  const auto bracket = [](const std::vector<double>& x, std::size_t k, std::size_t first) {
    const std::size_t lo = k > first ? k - 1 : k, hi = k + 1 < x.size() ? k + 1 : k;
    return std::pair{std::log(x[lo]), std::log(x[hi])};
  };
  double lr = std::log(rho[i]);
  const bool on_zero_edge = kappa[j] == 0.0;
  double lk = on_zero_edge ? 0.0 : std::log(kappa[j]);
  double best = start;
  const auto [r0, r1] = bracket(rho, i, 0);
  const auto [k0, k1] = on_zero_edge ? std::pair{0.0, 0.0} : bracket(kappa, j, 1);
  for (int sweep = 0; sweep < 4; ++sweep) {
    const auto kv = [&](double l) { return on_zero_edge ? 0.0 : std::exp(l); };
    auto [xr, vr] = golden_max([&](double x) { return f(std::exp(x), kv(lk)); }, r0, r1);
    if (vr > best) {
      best = vr;
      lr = xr;
    }
    if (on_zero_edge) continue;
    auto [xk, vk] = golden_max([&](double x) { return f(std::exp(lr), std::exp(x)); }, k0, k1);
    if (vk > best) {
      best = vk;
      lk = xk;
    }
  }
  return best;
}

}  // namespace detail

/// Samples an LDA-like functional (anything with evaluate(rho) -> {g, g_prime})
/// on spec's density grid and certifies the four conditions on g.
template <class Lda>
ConditionReport check_lda(const Lda& f, const SampleSpec& spec, std::string name = "") {
  spec.validate();
  ConditionReport rep;
  rep.functional = std::move(name);
  const auto rho = spec.rho_samples();
  std::vector<double> g(rho.size()), gp(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const auto v = f.evaluate(rho[i]);
    g[i] = v.g;
    gp[i] = v.g_prime;
  }

  {
    const double g0 = f.evaluate(0.0).g;
    ConditionResult c{"g_zero_at_origin", g0 == 0.0 ? Verdict::Pass : Verdict::Fail, std::nullopt, ""};
    if (g0 != 0.0) c.witness = Witness{0.0, 0.0, g0};
    rep.conditions.push_back(c);
  }
  {
    ConditionResult c{"g_prime_nonpositive", Verdict::Pass, std::nullopt, ""};
    for (std::size_t i = 0; i < rho.size() && !c.witness; ++i)
      if (gp[i] > spec.sign_tol) c.witness = Witness{rho[i], 0.0, gp[i]};
    if (c.witness) c.verdict = Verdict::Fail;
    rep.conditions.push_back(c);
  }
  {
    std::vector<std::pair<double, double>> mags(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) mags[i] = {rho[i], std::abs(gp[i])};
    rep.conditions.push_back(detail::growth_condition("g_prime_growth", mags, spec, 0.0, &rep));
  }
  {
    std::vector<std::pair<double, double>> vals(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) vals[i] = {rho[i], g[i]};
    const auto fit = fit_exponents(vals, FitMode::SmallRhoLimit).low;
    rep.alpha = fit;
    if (!fit.conclusive) {
      rep.conditions.push_back({"g_negative_near_zero", Verdict::Fail, Witness{rho.front(), 0.0, g.front()},
                                "g vanishes on the low-density tail"});
    } else {
      const double alpha = fit.exponent;
      double limsup = 0.0;
      auto c = detail::negativity_condition(
          "g_negative_near_zero", rho, spec,
          [&](double r) { return std::tuple{r, 0.0, f.evaluate(r).g / std::pow(r, alpha)}; }, &limsup);
      rep.limsup_estimate = limsup;
      if (!(alpha >= 1.0 - 3.0 * fit.std_error - 1e-9 && alpha < 1.5)) {
        c.verdict = Verdict::Fail;
        c.witness = Witness{rho.front(), 0.0, alpha};
        c.detail += "; fitted exponent outside [1, 3/2)";
      }
      rep.conditions.push_back(c);
    }
  }
  {
    std::vector<std::pair<double, double>> pos(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) pos[i] = {rho[i], std::max(0.0, gp[i])};
    rep.relaxed.push_back(detail::growth_condition("g_prime_positive_part_growth", pos, spec, 1.0 / 3.0, nullptr));
  }
  return rep;
}

/// As check_lda for a GGA-like functional (evaluate({rho, kappa}) -> GgaValue)
/// on the rho x kappa sample box, certifying the six conditions on h.
template <class Gga>
ConditionReport check_gga(const Gga& f, const SampleSpec& spec, std::string name = "") {
  spec.validate();
  ConditionReport rep;
  rep.functional = std::move(name);
  const auto rho = spec.rho_samples();
  const auto kappa = spec.kappa_samples();

  {
    ConditionResult c{"h_zero_at_origin", Verdict::Pass, std::nullopt, ""};
    for (double k : kappa) {
      const double h = f.evaluate({0.0, k}).h;
      if (h != 0.0 && !c.witness) c.witness = Witness{0.0, k, h};
    }
    if (c.witness) c.verdict = Verdict::Fail;
    rep.conditions.push_back(c);
  }

  ConditionResult sign{"h_rho_nonpositive", Verdict::Pass, std::nullopt, ""};
  ConditionResult ell{"h_kappa_ellipticity", Verdict::Pass, std::nullopt, ""};
  ConditionResult sci{"h_kappa_convexity", Verdict::Pass, std::nullopt, ""};
  std::vector<std::pair<double, double>> mags(rho.size()), pos(rho.size());
  double a = std::numeric_limits<double>::infinity(), b = -a;
  Witness a_at;
  std::size_t ai = 0, aj = 0, bi = 0, bj = 0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    double m = 0.0, p = 0.0;
    for (std::size_t j = 0; j < kappa.size(); ++j) {
      const double k = kappa[j];
      const auto v = f.evaluate({rho[i], k});
      m = std::max(m, std::abs(v.dh_drho));
      p = std::max(p, std::max(0.0, v.dh_drho));
      if (v.dh_drho > spec.sign_tol && !sign.witness) sign.witness = Witness{rho[i], k, v.dh_drho};
      const double e = 1.0 + v.dh_dkappa;
      if (e < a) {
        a = e;
        a_at = {rho[i], k, e};
        ai = i;
        aj = j;
      }
      if (e > b) {
        b = e;
        bi = i;
        bj = j;
      }
      const double s = e + 2.0 * k * v.d2h_dkappa2;
      if (s < -spec.sign_tol && !sci.witness) sci.witness = Witness{rho[i], k, s};
    }
    mags[i] = {rho[i], m};
    pos[i] = {rho[i], p};
  }
  if (sign.witness) sign.verdict = Verdict::Fail;
  if (sci.witness) sci.verdict = Verdict::Fail;
  // The ellipticity bounds are extrema over the box, not just over the grid nodes.
  const auto e_at = [&](double r, double k) { return 1.0 + f.evaluate({r, k}).dh_dkappa; };
  if (std::isfinite(a)) a = -detail::polish_max([&](double r, double k) { return -e_at(r, k); }, rho, kappa, ai, aj, -a);
  if (std::isfinite(b)) b = detail::polish_max(e_at, rho, kappa, bi, bj, b);
  rep.fitted_a = a;
  rep.fitted_b = b;
  ell.detail = "1 + dh/dkappa in [" + std::to_string(a) + ", " + std::to_string(b) + "]";
  if (!(a > 0.0) || !std::isfinite(b)) {
    ell.verdict = Verdict::Fail;
    ell.witness = a_at;
  }

  rep.conditions.push_back(sign);
  rep.conditions.push_back(detail::growth_condition("h_rho_growth", mags, spec, 0.0, &rep));
  {
    std::vector<std::pair<double, double>> vals(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) vals[i] = {rho[i], f.evaluate({rho[i], 0.0}).h};
    const auto fit = fit_exponents(vals, FitMode::SmallRhoLimit).low;
    rep.alpha = fit;
    if (!fit.conclusive) {
      rep.conditions.push_back({"h_negative_near_zero", Verdict::Fail, Witness{rho.front(), 0.0, vals.front().second},
                                "h(rho, 0) vanishes on the low-density tail"});
    } else {
      const double alpha = fit.exponent;
      // Joint limit (rho, kappa) -> 0: worst ratio over kappa = 0 and the 16 smallest kappa.
      const std::size_t nk = std::min<std::size_t>(17, kappa.size());
      double limsup = 0.0;
      auto c = detail::negativity_condition(
          "h_negative_near_zero", rho, spec,
          [&](double r) {
            std::tuple<double, double, double> worst{r, 0.0, -std::numeric_limits<double>::infinity()};
            for (std::size_t j = 0; j < nk; ++j) {
              const double q = f.evaluate({r, kappa[j]}).h / std::pow(r, alpha);
              if (q > std::get<2>(worst)) worst = {r, kappa[j], q};
            }
            return worst;
          },
          &limsup);
      rep.limsup_estimate = limsup;
      if (!(alpha >= 1.0 - 3.0 * fit.std_error - 1e-9 && alpha < 1.5)) {
        c.verdict = Verdict::Fail;
        c.witness = Witness{rho.front(), 0.0, alpha};
        c.detail += "; fitted exponent outside [1, 3/2)";
      }
      rep.conditions.push_back(c);
    }
  }
  rep.conditions.push_back(ell);
  rep.conditions.push_back(sci);
  rep.relaxed.push_back(detail::growth_condition("h_rho_positive_part_growth", pos, spec, 1.0 / 3.0, nullptr));
  return rep;
}

/// Dispatches on the functional variant.
inline ConditionReport check_functional(const xc::Functional& f, const SampleSpec& spec) {
  if (const auto* l = std::get_if<xc::LdaFunctional>(&f)) return check_lda(*l, spec, l->id());
  const auto& g = std::get<xc::GgaFunctional>(f);
  return check_gga(g, spec, g.id());
}

}  // namespace ksatom::checker

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ksatom/errors.hpp"
#include "ksatom/pair/pair.hpp"
#include "ksatom/radial/grid.hpp"
#include "ksatom/radial/operators.hpp"
#include "ksatom/scf/scf.hpp"

namespace ksatom::diagnostics {

struct InequalityCheck {
  std::string id;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool pass = false;
};

struct EstimateReport {
  std::vector<InequalityCheck> checks;
  double z = 0.0;
  double trace = 0.0;    // Tr gamma
  double kinetic = 0.0;  // Tr(-Delta gamma)
  bool rank_one = false;

  const InequalityCheck& find(const std::string& id) const {
    for (const auto& c : checks)
      if (c.id == id) return c;
    throw ContractError("no estimate '" + id + "'");
  }
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  }
};

inline constexpr double kTolIneq = 1e-8;
inline constexpr double kTolRankOne = 1e-10;

/// 1/2 ||grad sqrt(rho)||^2 from the density alone: q = r sqrt(rho) is the
/// reduced function of sqrt(rho), so the value is 4 pi <q, K_0 q>.
inline double weizsacker_energy(const radial::RadialGrid& grid, std::span<const double> rho) {
  std::vector<double> q(grid.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = grid.r(i) * std::sqrt(std::max(rho[i], 0.0));
  return 4.0 * std::numbers::pi * radial::kinetic_operator(grid, 0).form(q, q);
}

/// The von Weizsacker bound, the nuclear-attraction bound with constant 4Z,
/// J >= 0 and E_xc <= 0 on one state.
inline EstimateReport verify_estimates(const radial::RadialGrid& grid, std::span<const double> rho,
                                       const scf::Energies& e, double z, double trace, bool rank_one) {
  EstimateReport rep;
  rep.z = z;
  rep.trace = trace;
  rep.kinetic = e.kinetic;
  rep.rank_one = rank_one;
  auto add = [&](std::string id, double lhs, double rhs, bool pass) {
    rep.checks.push_back({std::move(id), lhs, rhs, rhs - lhs, pass});
  };

  const double tvw = weizsacker_energy(grid, rho);
  if (rank_one)
    add("weizsacker", tvw, e.kinetic, std::abs(tvw - e.kinetic) <= kTolRankOne * std::max(std::abs(e.kinetic), 1e-300) ||
                                          (tvw == 0.0 && e.kinetic == 0.0));
  else
    add("weizsacker", tvw, e.kinetic, tvw <= e.kinetic + kTolIneq);

  const double lower = -4.0 * z * std::sqrt(std::max(trace, 0.0)) * std::sqrt(std::max(e.kinetic, 0.0));
  add("nuclear_lower", lower, e.nuclear, lower <= e.nuclear + kTolIneq);
  add("nuclear_upper", e.nuclear, 0.0, e.nuclear <= kTolIneq);
  add("hartree_nonnegative", 0.0, e.hartree, e.hartree >= -kTolIneq);
  add("exc_nonpositive", e.exc, 0.0, e.exc <= kTolIneq);
  return rep;
}

inline EstimateReport verify_estimates(const scf::ScfResult& res) {
  const auto grid = radial::RadialGrid::build(res.config.grid);
  const auto occ = res.state.occupied();
  const bool rank_one = occ.size() == 1 && occ.front()->l == 0 && occ.front()->occupation == 1.0;
  return verify_estimates(grid, res.density.rho, res.energies, res.config.include_nuclear ? res.config.z : 0.0,
                          res.state.trace(), rank_one);
}

inline EstimateReport verify_estimates(const pair::PairResult& res) {
  const auto grid = radial::RadialGrid::build(res.config.grid);
  return verify_estimates(grid, pair::pair_density(grid, res.state.u), res.state.energies, res.config.z, 1.0, true);
}

// ---------------------------------------------------------------------------

struct LambdaPoint {
  double lambda = 0.0;
  double atom = 0.0;      // I_lambda
  double infinity = 0.0;  // I^inf_lambda
  bool converged = true;
};

struct LambdaViolation {
  std::string check;
  double mu = 0.0;      // second lambda of the witness pair (0 if single point)
  double lambda = 0.0;
  double amount = 0.0;  // by how much the inequality fails
};

struct LambdaReport {
  bool decreasing_atom = true;
  bool decreasing_infinity = true;
  bool binding = true;             // I < I^inf
  bool negative_infinity = true;   // I^inf < 0
  bool subadditive = true;
  bool vanishing_limit = true;     // I_lambda -> 0 as lambda -> 0
  bool bounded_differences = true;
  double lipschitz = 0.0;          // L used for the bounded-difference test
  double trend_exponent = 0.0;     // p in |I_lambda| ~ c lambda^p
  std::vector<LambdaViolation> violations;
  std::vector<std::string> warnings;
  std::vector<LambdaPoint> used;

  bool all_pass() const {
    return decreasing_atom && decreasing_infinity && binding && negative_infinity && subadditive && vanishing_limit &&
           bounded_differences;
  }
};

inline constexpr double kTolMono = 1e-6;
inline constexpr double kTolSub = 1e-6;

inline std::vector<LambdaPoint> lambda_points(const scf::LambdaTable& table) {
  std::vector<LambdaPoint> pts;
  for (const auto& row : table.rows)
    pts.push_back({row.lambda, row.atom.energies.total, row.infinity.energies.total,
                   row.atom.converged && row.infinity.converged});
  return pts;
}

/// Monotonicity, strict binding, sign of I^inf, the splitting inequality
/// I_l <= I_m + I^inf_{l-m} on every in-table pair, the lambda -> 0 trend and
/// a bounded-difference surrogate for continuity.
inline LambdaReport check_lambda_table(std::vector<LambdaPoint> points) {
  LambdaReport rep;
  for (const auto& p : points) {
    if (p.converged)
      rep.used.push_back(p);
    else
      rep.warnings.push_back("skipped unconverged point lambda = " + std::to_string(p.lambda));
  }
  auto& pts = rep.used;
  if (pts.size() < 4) throw ContractError("check_lambda_table needs at least 4 converged points");
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  auto flag = [&](bool& ok, std::string check, double mu, double lambda, double amount) {
    ok = false;
    rep.violations.push_back({std::move(check), mu, lambda, amount});
  };

  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto &a = pts[i], &b = pts[i + 1];
    // Strictly decreasing: the step must go down by more than the noise floor.
    if (!(b.atom < a.atom - kTolMono)) flag(rep.decreasing_atom, "decreasing_atom", a.lambda, b.lambda, b.atom - a.atom);
    if (!(b.infinity < a.infinity - kTolMono))
      flag(rep.decreasing_infinity, "decreasing_infinity", a.lambda, b.lambda, b.infinity - a.infinity);
  }
  for (const auto& p : pts) {
    if (!(p.atom < p.infinity)) flag(rep.binding, "binding", 0.0, p.lambda, p.atom - p.infinity);
    if (!(p.infinity < 0.0)) flag(rep.negative_infinity, "negative_infinity", 0.0, p.lambda, p.infinity);
  }
  // Splitting inequality on pairs whose difference is also in the table.
  const double match = 1e-9;
  for (const auto& l : pts)
    for (const auto& m : pts) {
      if (!(m.lambda < l.lambda)) continue;
      const auto it = std::find_if(pts.begin(), pts.end(),
                                   [&](const auto& q) { return std::abs(q.lambda - (l.lambda - m.lambda)) < match; });
      if (it == pts.end()) continue;
      const double excess = l.atom - (m.atom + it->infinity);
      if (excess > kTolSub) flag(rep.subadditive, "subadditivity", m.lambda, l.lambda, excess);
    }

  // lambda -> 0: log-log fit of |I| on the lower half (without the smallest
  // point), then the smallest point must sit under twice the extrapolated trend.
  const std::size_t half = std::max<std::size_t>(3, pts.size() / 2);
  std::vector<double> x, y;
  for (std::size_t i = 1; i < half && i < pts.size(); ++i) {
    if (pts[i].atom == 0.0) continue;
    x.push_back(std::log(pts[i].lambda));
    y.push_back(std::log(std::abs(pts[i].atom)));
  }
  if (x.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    rep.trend_exponent = sxx > 0 ? sxy / sxx : 0.0;
    const double pred = std::exp(my + rep.trend_exponent * (std::log(pts[0].lambda) - mx));
    if (!(rep.trend_exponent > 0.0) || std::abs(pts[0].atom) > 2.0 * pred)
      flag(rep.vanishing_limit, "vanishing_limit", 0.0, pts[0].lambda, std::abs(pts[0].atom) - 2.0 * pred);
  } else {
    rep.vanishing_limit = false;
    rep.warnings.push_back("too few points for the lambda -> 0 trend");
  }

  // Bounded differences: L = 4 x median slope, every step within L dlambda.
  std::vector<double> slopes;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    slopes.push_back(std::abs(pts[i + 1].atom - pts[i].atom) / (pts[i + 1].lambda - pts[i].lambda));
  auto sorted = slopes;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  rep.lipschitz = 4.0 * sorted[sorted.size() / 2];
  for (std::size_t i = 0; i < slopes.size(); ++i)
    if (slopes[i] > rep.lipschitz)
      flag(rep.bounded_differences, "bounded_differences", pts[i].lambda, pts[i + 1].lambda,
           slopes[i] - rep.lipschitz);
  return rep;
}

inline LambdaReport check_lambda_table(const scf::LambdaTable& table) { return check_lambda_table(lambda_points(table)); }

// ---------------------------------------------------------------------------

struct DecayFit {
  double gamma = 0.0;
  double r_lo = 0.0, r_hi = 0.0;  // window actually used
  double r2 = 0.0;
  std::size_t samples = 0;
};

struct DecayOptions {
  double lo_fraction = 0.4;  // of R_max
  double hi_fraction = 0.8;
  double density_floor = 1e-20;
  bool is_density = false;  // otherwise an orbital phi with rho = 2 phi^2
};

/// Regression of log|f| on r over [lo, hi] R_max, restricted to nodes whose
/// density exceeds the floor. gamma is minus the slope.
inline DecayFit fit_decay(const radial::RadialGrid& grid, std::span<const double> f, const DecayOptions& opt = {}) {
  if (f.size() != grid.size()) throw ContractError("function size does not match grid");
  if (!(opt.lo_fraction >= 0.0 && opt.lo_fraction < opt.hi_fraction && opt.hi_fraction <= 1.0))
    throw ContractError("decay window fractions need 0 <= lo < hi <= 1");
  const double rmax = grid.r(grid.size() - 1);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.r(i);
    if (r < opt.lo_fraction * rmax || r > opt.hi_fraction * rmax) continue;
    const double rho = opt.is_density ? f[i] : 2.0 * f[i] * f[i];
    if (!(rho > opt.density_floor) || f[i] == 0.0) continue;
    x.push_back(r);
    y.push_back(std::log(std::abs(f[i])));
  }
  if (x.size() < 3) throw ContractError("decay fit window is empty (density below the floor or window too narrow)");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  DecayFit out;
  out.gamma = -sxy / sxx;
  out.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  out.r_lo = x.front();
  out.r_hi = x.back();
  out.samples = x.size();
  return out;
}

// ---------------------------------------------------------------------------

struct RegimeFlags {
  bool inside_theorem_regime = false;  // Z >= N = 2 lambda
  bool anion_warning = false;
};

inline RegimeFlags regime_flags(double z, double lambda) {
  RegimeFlags f;
  f.inside_theorem_regime = z >= 2.0 * lambda;
  f.anion_warning = !f.inside_theorem_regime;
  return f;
}

/// Fraction of the electron count beyond 0.8 R_max: how much the box edge matters.
inline double box_edge_fraction(const radial::RadialGrid& grid, std::span<const double> rho) {
  const double total = grid.integrate(rho);
  if (!(total > 0.0)) return 0.0;
  const double rmax = grid.r(grid.size() - 1);
  return std::max(0.0, total - grid.integrate_ball(rho, 0.8 * rmax)) / total;
}

}  // namespace ksatom::diagnostics

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ksatom/errors.hpp"
#include "ksatom/radial/calculus.hpp"
#include "ksatom/radial/eigensolver.hpp"
#include "ksatom/radial/grid.hpp"
#include "ksatom/radial/hartree.hpp"
#include "ksatom/radial/operators.hpp"
#include "ksatom/scf/mixing.hpp"
#include "ksatom/scf/scf.hpp"
#include "ksatom/scf/state.hpp"
#include "ksatom/xc/functionals.hpp"

namespace ksatom::pair {

/// One spatial orbital phi = u / (sqrt(4 pi) r) carrying both electrons, rho = 2 phi^2.
struct PairState {
  std::vector<double> u;        // int u^2 dr = 1
  double epsilon = 0.0;         // Rayleigh quotient of the frozen operator
  scf::Energies energies;
  std::vector<double> a_coeff;  // 1 + dh/dkappa on the nodes
  double residual = std::numeric_limits<double>::infinity();
};

struct PairConfig {
  std::string functional = "pbe";
  double z = 2.0;
  // Orbital mixing. The a'(r)/(2r) term of the l = 0 operator feeds back hard on
  // the nodes next to r_min, where beta = 0.3 no longer contracts.
  scf::MixingSpec mixing{scf::MixingKind::Simple, 0.1, 5};
  double tol_residual = 2e-7;  // roundoff floor of the residual on the default grid is ~5e-8
  double tol_energy = 1e-10;
  int max_iter = 500;
  radial::GridSpec grid{};
  // Admissible range of 1 + dh/dkappa. Unset: the functional's declared bounds,
  // or only positivity if it declares none.
  std::optional<std::array<double, 2>> ellipticity;

  void validate() const {
    mixing.validate();
    if (!(z > 0.0)) throw ContractError("Z must be > 0");
    if (!(tol_residual > 0.0) || !(tol_energy > 0.0)) throw ContractError("tolerances must be positive");
    if (max_iter < 1) throw ContractError("max_iter must be >= 1");
    if (ellipticity && !((*ellipticity)[0] > 0.0 && (*ellipticity)[0] <= (*ellipticity)[1]))
      throw ContractError("ellipticity bounds need 0 < a <= b");
    xc::make_functional(functional);
  }
};

struct PairIteration {
  int iteration = 0;
  double residual = 0.0;
  double energy = 0.0;
  double epsilon = 0.0;
};

struct PairResult {
  PairConfig config;
  PairState state;
  int iterations = 0;
  bool converged = false;
  std::vector<PairIteration> history;
  std::vector<std::string> notes;
};

/// Local fields entering the Euler equation.
struct PairFields {
  std::vector<double> rho, kappa, v_hartree, dh_drho, a;
};

inline PairFields pair_fields(const radial::RadialGrid& grid, std::span<const double> u,
                              const xc::GgaFunctional& f) {
  const std::size_t n = grid.size();
  PairFields out;
  out.rho.resize(n);
  out.kappa.resize(n);
  out.dh_drho.resize(n);
  out.a.resize(n);
  const auto dphi = radial::orbital_gradient(grid, u);
  const double c = 1.0 / (4.0 * std::numbers::pi);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = grid.r(i);
    out.rho[i] = 2.0 * c * u[i] * u[i] / (r * r);
    out.kappa[i] = c * dphi[i] * dphi[i];  // |grad phi|^2 = |grad sqrt(rho)|^2 / 2
    const auto g = f.evaluate({out.rho[i], out.kappa[i]});
    out.dh_drho[i] = g.dh_drho;
    out.a[i] = 1.0 + g.dh_dkappa;
  }
  out.v_hartree = radial::hartree_potential(grid, out.rho);
  return out;
}

namespace detail {

inline double norm(const radial::RadialGrid& grid, std::span<const double> u) {
  std::vector<double> w(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) w[i] = u[i] * u[i];
  return std::sqrt(grid.integrate_dr(w));
}

inline void check_normalized(const radial::RadialGrid& grid, std::span<const double> u) {
  if (u.size() != grid.size()) throw ContractError("orbital length does not match grid");
  const double nrm = norm(grid, u);
  if (std::abs(nrm - 1.0) > 1e-8)
    throw ContractError("pair orbital must be normalized, got ||phi|| = " + std::to_string(nrm));
}

inline std::array<double, 2> ellipticity_bounds(const PairConfig& cfg, const xc::GgaFunctional& f) {
  if (cfg.ellipticity) return *cfg.ellipticity;
  if (f.declared_ellipticity) return *f.declared_ellipticity;
  return {1e-6, std::numeric_limits<double>::infinity()};
}

struct FrozenOperator {
  radial::ChannelOperator op;
  std::vector<double> w;
};

inline FrozenOperator frozen_operator(const radial::RadialGrid& grid, const PairFields& fl, double z,
                                      std::array<double, 2> bounds) {
  const double slack = 1e-12;
  for (std::size_t i = 0; i < fl.a.size(); ++i)
    if (!(fl.a[i] >= bounds[0] - slack && fl.a[i] <= bounds[1] + slack))
      throw ContractError("ellipticity violated: 1 + dh/dkappa = " + std::to_string(fl.a[i]) + " outside [" +
                          std::to_string(bounds[0]) + ", " + std::to_string(bounds[1]) +
                          "] at r = " + std::to_string(grid.r(i)));
  FrozenOperator out{radial::divergence_form_operator(grid, fl.a, 0, std::min(bounds[0], 1.0) * 0.5), {}};
  out.w.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out.w[i] = -z / grid.r(i) + fl.v_hartree[i] + fl.dh_drho[i];
  out.op = out.op.with_potential(out.w);
  return out;
}

// ||(H - eps) u||_M with eps the Rayleigh quotient. Accumulated in long double:
// near r_min the stiffness entries exceed the result by ~1e16.
inline std::pair<double, double> residual(const radial::ChannelOperator& h, std::span<const double> u) {
  const std::size_t m = h.dimension();
  std::vector<long double> au(m);
  long double num = 0.0L, den = 0.0L;
  for (std::size_t i = 0; i < m; ++i) {
    long double s = static_cast<long double>(h.diag[i]) * u[i];
    if (i > 0) s += static_cast<long double>(h.off[i - 1]) * u[i - 1];
    if (i + 1 < m) s += static_cast<long double>(h.off[i]) * u[i + 1];
    au[i] = s;
    num += s * u[i];
    den += static_cast<long double>(h.mass[i]) * u[i] * u[i];
  }
  const long double eps = num / den;
  long double acc = 0.0L;
  for (std::size_t i = 0; i < m; ++i) {
    const long double d = au[i] / h.mass[i] - eps * u[i];
    acc += h.mass[i] * d * d;
  }
  return {static_cast<double>(std::sqrt(acc)), static_cast<double>(eps)};
}

}  // namespace detail

/// E(phi) = int |grad phi|^2 + int rho V + J(rho) + int h(rho, |grad phi|^2).
inline scf::Energies pair_energy(const radial::RadialGrid& grid, std::span<const double> u,
                                 const xc::GgaFunctional& f, double z, bool hartree = true) {
  detail::check_normalized(grid, u);
  const auto kin = radial::kinetic_operator(grid, 0);
  const auto fl = pair_fields(grid, u, f);
  scf::Energies e;
  e.kinetic = 2.0 * kin.form(u, u);
  std::vector<double> nuc(grid.size()), h(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    nuc[i] = -z * fl.rho[i] / grid.r(i);
    h[i] = f.h(fl.rho[i], fl.kappa[i]);
  }
  e.nuclear = grid.integrate(nuc);
  e.hartree = hartree ? radial::hartree_energy(grid, fl.rho, fl.v_hartree) : 0.0;
  e.exc = grid.integrate(h);
  e.sum();
  return e;
}

struct EulerCheck {
  double norm = 0.0;
  double epsilon = 0.0;
};

/// L2 norm of -1/2 div(a grad phi) + W phi - eps phi for the operator frozen at
/// phi, eps its Rayleigh quotient. `hartree = false` drops v_H from W.
inline EulerCheck euler_check(const radial::RadialGrid& grid, std::span<const double> u, const xc::GgaFunctional& f,
                              double z, bool hartree = true) {
  detail::check_normalized(grid, u);
  auto fl = pair_fields(grid, u, f);
  if (!hartree) std::fill(fl.v_hartree.begin(), fl.v_hartree.end(), 0.0);
  const auto fr = detail::frozen_operator(grid, fl, z, {1e-6, std::numeric_limits<double>::infinity()});
  const auto [norm, eps] = detail::residual(fr.op, u);
  return {norm, eps};
}

inline double euler_residual(const radial::RadialGrid& grid, std::span<const double> u, const xc::GgaFunctional& f,
                             double z) {
  return euler_check(grid, u, f, z).norm;
}

inline std::vector<double> hydrogenic_seed(const radial::RadialGrid& grid, double z) {
  std::vector<double> u(grid.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = grid.r(i) * std::exp(-z * grid.r(i));
  u.back() = 0.0;
  const double nrm = detail::norm(grid, u);
  for (double& x : u) x /= nrm;
  return u;
}

/// Frozen-coefficient fixed point: at phi_k build a_k and W_k, take the lowest
/// eigenpair of -1/2 div(a_k grad .) + W_k, set phi = |u|, mix and renormalize.
inline PairResult solve_pair(const PairConfig& cfg) {
  cfg.validate();
  const auto grid = radial::RadialGrid::build(cfg.grid);
  const auto f = xc::as_gga(xc::make_functional(cfg.functional));
  const auto bounds = detail::ellipticity_bounds(cfg, f);

  PairResult res;
  res.config = cfg;
  auto u = hydrogenic_seed(grid, cfg.z);
  scf::DensityMixer mixer(cfg.mixing, grid.dr_weights());
  double e_prev = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const auto fl = pair_fields(grid, u, f);
    const auto fr = detail::frozen_operator(grid, fl, cfg.z, bounds);
    const auto [resid, eps] = detail::residual(fr.op, u);
    res.state = {u, eps, pair_energy(grid, u, f, cfg.z), fl.a, resid};
    res.history.push_back({it, resid, res.state.energies.total, eps});
    res.iterations = it;
    if (resid < cfg.tol_residual && std::abs(res.state.energies.total - e_prev) < cfg.tol_energy) {
      res.converged = true;
      break;
    }
    e_prev = res.state.energies.total;

    auto pairs = radial::lowest_eigenpairs(fr.op, 1, grid.size());
    auto& next = pairs.front().u;
    for (double& x : next) x = std::abs(x);
    std::vector<double> diff(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) diff[i] = next[i] - u[i];
    u = mixer.next(u, diff);
    for (double& x : u) x = std::max(x, 0.0);
    const double nrm = detail::norm(grid, u);
    for (double& x : u) x /= nrm;
  }
  if (!res.converged) res.notes.push_back("max_iter reached before the Euler residual tolerance was met");
  if (cfg.z < 2.0) res.notes.push_back("two electrons with Z < 2: outside the neutral/cationic regime");
  return res;
}

/// phi = u / (sqrt(4 pi) r) on the nodes.
inline std::vector<double> orbital(const radial::RadialGrid& grid, std::span<const double> u) {
  auto phi = radial::orbital_from_reduced(grid, u);
  for (double& x : phi) x /= std::sqrt(4.0 * std::numbers::pi);
  return phi;
}

inline std::vector<double> pair_density(const radial::RadialGrid& grid, std::span<const double> u) {
  auto phi = orbital(grid, u);
  for (double& x : phi) x = 2.0 * x * x;
  return phi;
}

struct RankOneReport {
  double energy_gap = 0.0;   // E_eks - E_pair
  double density_gap = 0.0;  // ||rho_eks - rho_pair||_L1
  int occupied_shells = 0;
  bool integer_occupation = false;
  bool pass = false;
};

/// Compares the two-electron minimizer with an extended Kohn-Sham state at lambda = 1.
inline RankOneReport rank_one_check(const PairResult& pair, const scf::ScfResult& eks, double tol = 1e-6) {
  const auto grid = radial::RadialGrid::build(eks.config.grid);
  const auto rho_pair = pair_density(grid, pair.state.u);
  if (rho_pair.size() != eks.density.rho.size()) throw ContractError("pair and eks states use different grids");
  std::vector<double> d(grid.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::abs(rho_pair[i] - eks.density.rho[i]);
  RankOneReport r;
  r.energy_gap = eks.energies.total - pair.state.energies.total;
  r.density_gap = grid.integrate(d);
  const auto occ = eks.state.occupied();
  r.occupied_shells = static_cast<int>(occ.size());
  r.integer_occupation = occ.size() == 1 && occ.front()->occupation == 1.0 && occ.front()->l == 0;
  r.pass = r.integer_occupation && std::abs(r.energy_gap) < tol && r.density_gap < tol;
  return r;
}

}  // namespace ksatom::pair

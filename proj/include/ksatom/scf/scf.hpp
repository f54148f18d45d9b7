#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ksatom/errors.hpp"
#include "ksatom/radial/eigensolver.hpp"
#include "ksatom/radial/grid.hpp"
#include "ksatom/scf/aufbau.hpp"
#include "ksatom/scf/mean_field.hpp"
#include "ksatom/scf/mixing.hpp"
#include "ksatom/scf/state.hpp"
#include "ksatom/xc/functionals.hpp"

namespace ksatom::scf {

struct ScfConfig {
  std::string functional = "lda-x+pz81";
  double z = 2.0;
  double lambda = 1.0;
  int l_max = 2;
  int shells_per_channel = 5;
  MixingSpec mixing{};
  double tol_density = 1e-8;  // L1 norm of rho_out - rho_in
  double tol_energy = 1e-10;
  int max_iter = 500;
  bool include_nuclear = true;
  double tol_deg = 1e-6;
  radial::GridSpec grid{};
  // Exponent of the 2 lambda (zeta^3/pi) exp(-2 zeta r) starting density. Unset:
  // empty start (bare nucleus) with a nucleus, zeta = 1 without one.
  std::optional<double> seed_zeta;

  void validate() const {
    mixing.validate();
    if (!(lambda >= 0.0)) throw ContractError("lambda must be >= 0");
    if (!(z >= 0.0)) throw ContractError("Z must be >= 0");
    if (l_max < 0 || shells_per_channel < 1) throw ContractError("need l_max >= 0 and shells_per_channel >= 1");
    if (!(tol_density > 0.0) || !(tol_energy > 0.0) || !(tol_deg >= 0.0)) throw ContractError("tolerances must be positive");
    if (max_iter < 1) throw ContractError("max_iter must be >= 1");
    if (seed_zeta && !(*seed_zeta > 0.0)) throw ContractError("seed_zeta must be positive");
    if (!xc::is_lda(xc::make_functional(functional)))
      throw ContractError("extended Kohn-Sham runs take an LDA functional, got '" + functional + "'");
  }
};

struct IterationRecord {
  int iteration = 0;
  double residual = 0.0;  // ||rho_out - rho_in||_L1
  double energy = 0.0;
  double fermi_level = 0.0;
};

struct ScfResult {
  ScfConfig config;
  DensityOperatorState state;
  DensityField density;
  Energies energies;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
  std::vector<std::string> notes;

  double final_residual() const { return history.empty() ? std::numeric_limits<double>::infinity() : history.back().residual; }
};

namespace detail {

inline DensityOperatorState diagonalize(const std::vector<radial::ChannelOperator>& kinetic,
                                        std::span<const double> potential, const ScfConfig& cfg) {
  DensityOperatorState st;
  st.lambda = cfg.lambda;
  std::vector<std::vector<double>> eps(kinetic.size());
  for (std::size_t l = 0; l < kinetic.size(); ++l) {
    auto pairs = radial::lowest_eigenpairs(kinetic[l], potential, cfg.shells_per_channel);
    std::vector<Shell> ch;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      eps[l].push_back(pairs[k].value);
      ch.push_back({static_cast<int>(l), static_cast<int>(k), pairs[k].value, 0.0, std::move(pairs[k].u)});
    }
    st.channels.push_back(std::move(ch));
  }
  const auto fill = aufbau_fill(eps, cfg.lambda, cfg.tol_deg);
  for (std::size_t l = 0; l < st.channels.size(); ++l)
    for (std::size_t k = 0; k < st.channels[l].size(); ++k) st.channels[l][k].occupation = fill.occupations[l][k];
  st.fermi_level = fill.fermi_level;
  return st;
}

inline std::vector<double> seed_density(const radial::RadialGrid& grid, double lambda, double zeta) {
  std::vector<double> rho(grid.size());
  const double c = 2.0 * lambda * zeta * zeta * zeta / std::numbers::pi;
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = c * std::exp(-2.0 * zeta * grid.r(i));
  return rho;
}

inline double l1_distance(const radial::RadialGrid& grid, std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::abs(a[i] - b[i]);
  return grid.integrate(d);
}

}  // namespace detail

/// Fixed-point iteration rho -> mean field -> eigenpairs per channel -> Aufbau
/// -> rho, with mixing, until ||rho_out - rho_in||_L1 < tol_density and the
/// energy change is below tol_energy. The returned state, density and energies
/// belong to the last diagonalization.
inline ScfResult run_scf(const ScfConfig& cfg) {
  cfg.validate();
  const auto grid = radial::RadialGrid::build(cfg.grid);
  const auto functional = xc::make_functional(cfg.functional);
  const auto kinetic = kinetic_operators(grid, cfg.l_max);

  ScfResult res;
  res.config = cfg;
  std::vector<double> rho_in;
  if (cfg.seed_zeta || !cfg.include_nuclear)
    rho_in = detail::seed_density(grid, cfg.lambda, cfg.seed_zeta.value_or(1.0));
  else
    rho_in.assign(grid.size(), 0.0);

  DensityMixer mixer(cfg.mixing, grid.weights());
  double e_prev = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const auto v = mean_field_potential(grid, rho_in, functional, cfg.z, cfg.include_nuclear);
    res.state = detail::diagonalize(kinetic, v, cfg);
    res.density = density_from_state(grid, res.state);
    res.energies = compute_energies(grid, kinetic, res.state, res.density.rho, functional, cfg.z, cfg.include_nuclear);
    const double residual = detail::l1_distance(grid, res.density.rho, rho_in);
    res.history.push_back({it, residual, res.energies.total, res.state.fermi_level});
    res.iterations = it;
    if (residual < cfg.tol_density && std::abs(res.energies.total - e_prev) < cfg.tol_energy) {
      res.converged = true;
      break;
    }
    e_prev = res.energies.total;
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = res.density.rho[i] - rho_in[i];
    rho_in = mixer.next(rho_in, f);
  }
  if (!res.converged) res.notes.push_back("max_iter reached before the density and energy tolerances were met");
  if (cfg.include_nuclear && 2.0 * cfg.lambda > cfg.z)
    res.notes.push_back("electron count 2*lambda exceeds Z: outside the neutral/cationic regime");
  return res;
}

/// The same minimization without the nuclear attraction (problem at infinity).
inline ScfResult solve_at_infinity(ScfConfig cfg) {
  cfg.include_nuclear = false;
  auto res = run_scf(cfg);
  if (cfg.functional == "none")
    res.notes.push_back("no binding without exchange-correlation: kinetic and Hartree terms are nonnegative");
  return res;
}

struct LambdaRow {
  double lambda = 0.0;
  ScfResult atom;      // I_lambda
  ScfResult infinity;  // I^inf_lambda
};

struct LambdaTable {
  ScfConfig base;
  std::vector<LambdaRow> rows;
};

/// Runs run_scf and solve_at_infinity at every lambda; `jobs` worker threads
/// share the 2 x |lambdas| solves. Row order follows `lambdas`.
inline LambdaTable scan_lambda(const ScfConfig& base, const std::vector<double>& lambdas, int jobs = 1) {
  base.validate();
  for (double l : lambdas)
    if (!(l > 0.0)) throw ContractError("scan_lambda needs positive lambda values");
  LambdaTable table;
  table.base = base;
  table.rows.resize(lambdas.size());
  const std::size_t tasks = 2 * lambdas.size();
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks;) {
      try {
        const std::size_t row = t / 2;
        ScfConfig cfg = base;
        cfg.lambda = lambdas[row];
        table.rows[row].lambda = lambdas[row];
        if (t % 2 == 0)
          table.rows[row].atom = run_scf(cfg);
        else
          table.rows[row].infinity = solve_at_infinity(cfg);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(tasks)));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return table;
}

}  // namespace ksatom::scf

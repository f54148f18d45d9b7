#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ksatom/radial/eigensolver.hpp"
#include "ksatom/scf/aufbau.hpp"
#include "ksatom/scf/mean_field.hpp"
#include "ksatom/scf/scf.hpp"
#include "oracle/numerov_atom.hpp"

using namespace ksatom;
using namespace ksatom::scf;

namespace {

radial::RadialGrid default_grid() { return radial::RadialGrid::build(radial::GridSpec{}); }

std::vector<double> hydrogenic_u(const radial::RadialGrid& g, double z, int n) {
  std::vector<double> u(g.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = g.r(i);
    u[i] = n == 1 ? 2.0 * std::pow(z, 1.5) * r * std::exp(-z * r)
                  : std::pow(z / 2.0, 1.5) * r * (2.0 - z * r) * std::exp(-z * r / 2.0);
  }
  return u;
}

const ScfResult& helium_lda() {
  static const ScfResult r = [] {
    ScfConfig cfg;
    cfg.mixing.kind = MixingKind::Anderson;
    return run_scf(cfg);
  }();
  return r;
}

}  // namespace

TEST(AufbauFill, FractionalShellAcrossChannels) {
  const auto out = aufbau_fill({{-2.0, -0.5}, {-0.8}}, 2.5);
  EXPECT_EQ(out.occupations[0][0], 1.0);
  EXPECT_EQ(out.occupations[1][0], 0.5);
  EXPECT_EQ(out.occupations[0][1], 0.0);
  EXPECT_EQ(out.fermi_level, -0.8);
}

TEST(AufbauFill, ExactCapacityFillsEverything) {
  const auto out = aufbau_fill({{-2.0, -0.5}, {-0.8}}, 5.0);
  EXPECT_EQ(out.occupations[0][0], 1.0);
  EXPECT_EQ(out.occupations[0][1], 1.0);
  EXPECT_EQ(out.occupations[1][0], 1.0);
  EXPECT_EQ(out.fermi_level, -0.5);
}

TEST(AufbauFill, DegenerateFrontierSharesRemainder) {
  // 1s full, then 2s and 2p within tol_deg hold the remaining 1.0 over weight 4.
  const auto out = aufbau_fill({{-2.0, -0.5}, {-0.5 + 1e-9}}, 2.0);
  EXPECT_EQ(out.occupations[0][0], 1.0);
  EXPECT_EQ(out.occupations[0][1], 0.25);
  EXPECT_EQ(out.occupations[1][0], 0.25);
  EXPECT_EQ(out.fermi_level, -0.5);
}

TEST(AufbauFill, SplitBeyondToleranceIsNotShared) {
  const auto out = aufbau_fill({{-2.0, -0.5}, {-0.5 + 1e-4}}, 2.0);
  EXPECT_EQ(out.occupations[0][1], 1.0);
  EXPECT_EQ(out.occupations[1][0], 0.0);
}

TEST(AufbauFill, ZeroTraceAndCapacityError) {
  const auto empty = aufbau_fill({{-1.0}}, 0.0);
  EXPECT_EQ(empty.occupations[0][0], 0.0);
  try {
    aufbau_fill({{-1.0}, {-0.5}}, 4.5);
    FAIL() << "expected ContractError";
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("l_max"), std::string::npos);
  }
  EXPECT_THROW(aufbau_fill({{-1.0}}, -1.0), ContractError);
}

TEST(DensityFromState, SpinFactorAndTrace) {
  const auto g = default_grid();
  DensityOperatorState st;
  st.channels = {{Shell{0, 0, -2.0, 1.0, hydrogenic_u(g, 1.0, 1)}}};
  EXPECT_NEAR(g.integrate(density_from_state(g, st).rho), 2.0, 1e-8);

  st.channels[0].push_back(Shell{0, 1, -0.5, 0.5, hydrogenic_u(g, 1.0, 2)});
  EXPECT_NEAR(g.integrate(density_from_state(g, st).rho), 3.0, 1e-6);

  const auto zero = density_from_state(g, DensityOperatorState{});
  for (double x : zero.rho) ASSERT_EQ(x, 0.0);
}

TEST(MeanFieldPotential, BareNucleusAndDiracValue) {
  const auto g = default_grid();
  const auto dirac = xc::make_functional("lda-x");
  const std::vector<double> zero(g.size(), 0.0);
  const auto v = mean_field_potential(g, zero, dirac, 2.0, true);
  for (std::size_t i = 0; i < g.size(); i += 97) ASSERT_DOUBLE_EQ(v[i], -2.0 / g.r(i));

  // Uniform rho = 1 inside the box: v = v_H + g'(1); remove v_H to isolate g'.
  const std::vector<double> one(g.size(), 1.0);
  const auto v1 = mean_field_potential(g, one, dirac, 0.0, false);
  const auto vh = radial::hartree_potential(g, one);
  EXPECT_NEAR(v1[100] - vh[100], -0.984745, 1e-6);

  EXPECT_THROW(mean_field_potential(g, zero, xc::make_functional("pbe"), 2.0, true), ContractError);
}

TEST(MeanFieldPotential, NoNuclearTermAtInfinity) {
  const auto g = default_grid();
  std::vector<double> rho(g.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::exp(-2.0 * g.r(i)) / std::numbers::pi;
  const auto f = xc::make_functional("lda-x+pz81");
  const auto v = mean_field_potential(g, rho, f, 0.0, false);
  const auto vz = mean_field_potential(g, rho, f, 5.0, false);
  const auto vh = radial::hartree_potential(g, rho);
  const auto& lda = std::get<xc::LdaFunctional>(f);
  for (std::size_t i = 0; i < g.size(); i += 101) {
    ASSERT_EQ(v[i], vz[i]);
    ASSERT_NEAR(v[i], vh[i] + lda.g_prime(rho[i]), 1e-14 * (1.0 + std::abs(v[i])));
  }
}

TEST(MixingSpec, Validation) {
  EXPECT_THROW((MixingSpec{MixingKind::Simple, 0.0, 5}.validate()), ContractError);
  EXPECT_THROW((MixingSpec{MixingKind::Simple, 1.5, 5}.validate()), ContractError);
  EXPECT_THROW((MixingSpec{MixingKind::Anderson, 0.3, 0}.validate()), ContractError);
  EXPECT_NO_THROW((MixingSpec{MixingKind::Simple, 1.0, 0}.validate()));
}

TEST(ScfConfig, Validation) {
  ScfConfig c;
  c.functional = "pbe";
  EXPECT_THROW(c.validate(), ContractError);
  c = {};
  c.tol_density = 0.0;
  EXPECT_THROW(c.validate(), ContractError);
  c = {};
  c.lambda = -0.5;
  EXPECT_THROW(c.validate(), ContractError);
}

TEST(RunScf, HeliumDiracMatchesNumerovOracle) {
  ScfConfig cfg;
  cfg.functional = "lda-x";
  cfg.mixing.kind = MixingKind::Anderson;
  const auto res = run_scf(cfg);
  ASSERT_TRUE(res.converged);
  const auto ref = oracle::NumerovAtom(2.0, std::log(1e-6), 40.0, 8001).solve(true);
  ASSERT_TRUE(ref.converged);
  EXPECT_NEAR(res.energies.total, ref.energy, 1e-3);
  EXPECT_NEAR(res.state.fermi_level, ref.eigenvalue, 1e-3);
  // Exchange-only LDA scales homogeneously, so the virial relation T = -E holds.
  EXPECT_NEAR(res.energies.kinetic, -res.energies.total, 1e-4);
}

TEST(RunScf, ReducedHartreeMatchesNumerovOracle) {
  ScfConfig cfg;
  cfg.functional = "none";
  cfg.mixing.kind = MixingKind::Anderson;
  const auto res = run_scf(cfg);
  ASSERT_TRUE(res.converged);
  const auto ref = oracle::NumerovAtom(2.0, std::log(1e-6), 40.0, 8001).solve(false);
  ASSERT_TRUE(ref.converged);
  EXPECT_NEAR(res.energies.total, ref.energy, 1e-3);
  EXPECT_EQ(res.energies.exc, 0.0);
}

TEST(RunScf, HeliumLdaInvariants) {
  const auto& res = helium_lda();
  ASSERT_TRUE(res.converged);
  EXPECT_LE(res.iterations, 200);
  EXPECT_LT(res.final_residual(), res.config.tol_density);
  EXPECT_LT(res.state.fermi_level, 0.0);
  EXPECT_NEAR(res.state.trace(), 1.0, 1e-10);

  // Rank one: a single shell with f = 1.
  const auto occ = res.state.occupied();
  ASSERT_EQ(occ.size(), 1u);
  EXPECT_EQ(occ.front()->occupation, 1.0);
  EXPECT_EQ(occ.front()->l, 0);
  EXPECT_EQ(occ.front()->eigenvalue, res.state.fermi_level);

  const auto& e = res.energies;
  EXPECT_NEAR(e.total, e.kinetic + e.nuclear + e.hartree + e.exc, 1e-12 * std::abs(e.total));
  EXPECT_GT(e.kinetic, 0.0);
  EXPECT_LT(e.nuclear, 0.0);
  EXPECT_GT(e.hartree, 0.0);
  EXPECT_LT(e.exc, 0.0);
  // Literature LDA (PZ81) helium total energy.
  EXPECT_NEAR(e.total, -2.834, 1e-3);
}

TEST(RunScf, EnergyRecomputedFromScratch) {
  const auto& res = helium_lda();
  const auto grid = radial::RadialGrid::build(res.config.grid);
  const auto kin = kinetic_operators(grid, res.config.l_max);
  const auto rho = density_from_state(grid, res.state).rho;
  const auto e = compute_energies(grid, kin, res.state, rho, xc::make_functional(res.config.functional), 2.0, true);
  EXPECT_NEAR(e.total, res.energies.total, 1e-10 * std::abs(e.total));
}

TEST(RunScf, EigenvalueSumIdentity) {
  // sum 2 f (2l+1) eps = T + int rho (V + v_H + g') evaluated on the potential
  // that produced the orbitals; at self-consistency that is the output density.
  const auto& res = helium_lda();
  const auto grid = radial::RadialGrid::build(res.config.grid);
  const auto f = xc::make_functional(res.config.functional);
  const auto v = mean_field_potential(grid, res.density.rho, f, 2.0, true);
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = res.density.rho[i] * v[i];
  double band = 0.0;
  for (const auto* s : res.state.occupied()) band += 2.0 * s->occupation * (2 * s->l + 1) * s->eigenvalue;
  EXPECT_NEAR(band, res.energies.kinetic + grid.integrate(w), 1e-6);
}

TEST(RunScf, OrbitalsOrthonormalWithinChannel) {
  const auto& res = helium_lda();
  const auto grid = radial::RadialGrid::build(res.config.grid);
  const auto kin = kinetic_operators(grid, res.config.l_max);
  for (std::size_t l = 0; l < res.state.channels.size(); ++l) {
    const auto& ch = res.state.channels[l];
    for (std::size_t a = 0; a < ch.size(); ++a)
      for (std::size_t b = 0; b <= a; ++b)
        ASSERT_NEAR(kin[l].inner(ch[a].u, ch[b].u), a == b ? 1.0 : 0.0, 1e-8) << "l=" << l;
  }
}

TEST(RunScf, SimpleAndAndersonAgree) {
  ScfConfig cfg;
  const auto simple = run_scf(cfg);
  ASSERT_TRUE(simple.converged);
  EXPECT_NEAR(simple.energies.total, helium_lda().energies.total, 1e-8);
  EXPECT_GT(simple.iterations, helium_lda().iterations);
}

TEST(RunScf, HydrogenHalfTraceIsBound) {
  ScfConfig cfg;
  cfg.z = 1.0;
  cfg.lambda = 0.5;
  cfg.mixing.kind = MixingKind::Anderson;
  const auto res = run_scf(cfg);
  ASSERT_TRUE(res.converged);
  EXPECT_LT(res.state.fermi_level, 0.0);
  EXPECT_LT(res.energies.total, 0.0);
  EXPECT_NEAR(res.state.trace(), 0.5, 1e-10);
  for (const auto& ch : res.state.channels)
    for (const auto& s : ch) {
      ASSERT_GE(s.occupation, 0.0);
      ASSERT_LE(s.occupation, 1.0);
    }
}

TEST(RunScf, TraceConservedAtEveryIterate) {
  ScfConfig cfg;
  cfg.max_iter = 6;
  cfg.lambda = 1.7;  // forces a fractional shell
  const auto res = run_scf(cfg);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 6);
  EXPECT_EQ(res.history.size(), 6u);
  EXPECT_NEAR(res.state.trace(), 1.7, 1e-10);
  EXPECT_FALSE(res.notes.empty());
}

TEST(RunScf, FractionalOnlyAtFermiLevel) {
  ScfConfig cfg;
  cfg.lambda = 0.6;
  cfg.z = 3.0;
  cfg.mixing.kind = MixingKind::Anderson;
  const auto res = run_scf(cfg);
  ASSERT_TRUE(res.converged);
  for (const auto& ch : res.state.channels)
    for (const auto& s : ch) {
      if (s.occupation > 0.0 && s.occupation < 1.0) {
        EXPECT_NEAR(s.eigenvalue, res.state.fermi_level, cfg.tol_deg);
      }
      if (s.eigenvalue < res.state.fermi_level - cfg.tol_deg) {
        EXPECT_EQ(s.occupation, 1.0);
      }
      if (s.eigenvalue > res.state.fermi_level + cfg.tol_deg) {
        EXPECT_EQ(s.occupation, 0.0);
      }
    }
  EXPECT_LE(res.state.fermi_level, 0.0);
}

TEST(RunScf, AnionRunIsFlagged) {
  ScfConfig cfg;
  cfg.z = 1.0;
  cfg.lambda = 1.0;
  cfg.max_iter = 3;
  const auto res = run_scf(cfg);
  bool flagged = false;
  for (const auto& n : res.notes) flagged |= n.find("exceeds Z") != std::string::npos;
  EXPECT_TRUE(flagged);
}

TEST(RunScf, Deterministic) {
  ScfConfig cfg;
  cfg.max_iter = 8;
  const auto a = run_scf(cfg), b = run_scf(cfg);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    ASSERT_EQ(a.history[i].energy, b.history[i].energy);
    ASSERT_EQ(a.history[i].residual, b.history[i].residual);
  }
  EXPECT_EQ(a.density.rho, b.density.rho);
}

TEST(SolveAtInfinity, SmallTraceBinds) {
  ScfConfig cfg;
  cfg.functional = "lda-x";
  cfg.lambda = 0.1;
  cfg.mixing.kind = MixingKind::Anderson;
  const auto res = solve_at_infinity(cfg);
  ASSERT_TRUE(res.converged);
  EXPECT_LT(res.energies.total, 0.0);
  EXPECT_EQ(res.energies.nuclear, 0.0);
}

TEST(SolveAtInfinity, EnergiesVanishAsTraceShrinks) {
  double prev = 1.0;
  for (double lam : {0.2, 0.05, 0.0125}) {
    ScfConfig cfg;
    cfg.lambda = lam;
    cfg.mixing.kind = MixingKind::Anderson;
    const auto atom = run_scf(cfg);
    const auto inf = solve_at_infinity(cfg);
    ASSERT_TRUE(atom.converged) << lam;
    const double a = std::abs(atom.energies.total), b = std::abs(inf.energies.total);
    EXPECT_LT(a, prev);
    EXPECT_LT(b, a);
    prev = a;
  }
  EXPECT_LT(prev, 0.06);
}

TEST(SolveAtInfinity, NoExchangeCorrelationNoBinding) {
  ScfConfig cfg;
  cfg.functional = "none";
  cfg.lambda = 0.5;
  cfg.max_iter = 60;
  const auto res = solve_at_infinity(cfg);
  EXPECT_GE(res.energies.total, 0.0);
  bool flagged = false;
  for (const auto& n : res.notes) flagged |= n.find("no binding without exchange-correlation") != std::string::npos;
  EXPECT_TRUE(flagged);
}

TEST(ScanLambda, ThreadedMatchesSerial) {
  ScfConfig cfg;
  cfg.mixing.kind = MixingKind::Anderson;
  cfg.grid.n = 1500;
  const auto serial = scan_lambda(cfg, {0.25, 1.0}, 1);
  const auto threaded = scan_lambda(cfg, {0.25, 1.0}, 3);
  ASSERT_EQ(serial.rows.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(serial.rows[i].lambda, threaded.rows[i].lambda);
    EXPECT_EQ(serial.rows[i].atom.energies.total, threaded.rows[i].atom.energies.total);
    EXPECT_EQ(serial.rows[i].infinity.energies.total, threaded.rows[i].infinity.energies.total);
  }
  EXPECT_LT(serial.rows[1].atom.energies.total, serial.rows[0].atom.energies.total);
  EXPECT_THROW(scan_lambda(cfg, {0.0}, 1), ContractError);
}

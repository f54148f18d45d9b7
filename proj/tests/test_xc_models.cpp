#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ksatom/radial/grid.hpp"
#include "ksatom/xc/exc_integral.hpp"
#include "ksatom/xc/functionals.hpp"
#include "ksatom/xc/variables.hpp"
#include "oracle/pz81_reference.hpp"
#include "support/fd_check.hpp"

using namespace ksatom;
using namespace ksatom::xc;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<Functional> all_registered() {
  std::vector<Functional> out;
  for (auto id : kRegisteredIds) out.push_back(make_functional(id));
  return out;
}
}  // namespace

TEST(LdaG, DiracAtZeroIsZero) {
  const LdaFunctional f{LdaKind::DiracExchange};
  const auto v = f.evaluate(0.0);
  EXPECT_EQ(v.g, 0.0);
  EXPECT_EQ(v.g_prime, 0.0);
}

TEST(LdaG, DiracAtUnitDensity) {
  const LdaFunctional f{LdaKind::DiracExchange};
  const auto v = f.evaluate(1.0);
  EXPECT_NEAR(v.g, -0.738559, 1e-6);
  EXPECT_NEAR(v.g_prime, -0.984745, 1e-6);
}

TEST(LdaG, Pz81MatchesIndependentTranscription) {
  const LdaFunctional f{LdaKind::PZ81Correlation};
  const auto v = f.evaluate(1.0);
  EXPECT_NEAR(v.g, oracle::pz81_g(1.0), 1e-10);
  EXPECT_NEAR(v.g_prime, oracle::pz81_g_prime(1.0), 1e-10);
  // Frozen from a 30-digit evaluation of the same interpolation formulas.
  EXPECT_NEAR(v.g, -0.0706378013031568, 1e-12);
  EXPECT_NEAR(v.g_prime, -0.0788218802963893, 1e-12);
}

TEST(LdaG, Pz81ReferenceSpotValues) {
  // eps_c(r_s) of the interpolation, evaluated at 30 digits.
  EXPECT_NEAR(oracle::pz81_eps(0.5).eps, -0.0760500244959742, 1e-14);
  EXPECT_NEAR(oracle::pz81_eps(1.0).eps, -0.0596320663789130, 1e-14);
  EXPECT_NEAR(oracle::pz81_eps(2.0).eps, -0.0450912136338484, 1e-14);
  EXPECT_NEAR(oracle::pz81_eps(5.0).eps, -0.0283389587893614, 1e-14);
  EXPECT_NEAR(oracle::pz81_eps(10.0).eps, -0.0185683885958792, 1e-14);
  const LdaFunctional f{LdaKind::PZ81Correlation};
  for (double rs : {0.3, 0.5, 2.0, 5.0, 10.0, 40.0}) {
    const double rho = 3.0 / (4.0 * kPi * rs * rs * rs);
    EXPECT_NEAR(f.g(rho) / rho, oracle::pz81_eps(rs).eps, 1e-13) << "rs=" << rs;
  }
}

TEST(LdaG, NegativeDensityIsDomainError) {
  const LdaFunctional f{LdaKind::DiracPlusPZ81};
  EXPECT_THROW(f.evaluate(-1e-3), DomainError);
}

TEST(LdaG, FiniteOnWholeRange) {
  for (const auto& fn : all_registered()) {
    const auto g = as_gga(fn);
    for (double lr = -30; lr <= 6; lr += 0.25) {
      const double rho = std::pow(10.0, lr);
      for (double kappa : {0.0, 1e-10, 1.0, 1e4, 1e8}) {
        const auto v = g.evaluate({rho, kappa});
        ASSERT_TRUE(std::isfinite(v.h) && std::isfinite(v.dh_drho) && std::isfinite(v.dh_dkappa) &&
                    std::isfinite(v.d2h_dkappa2))
            << g.id() << " rho=" << rho << " kappa=" << kappa;
      }
    }
  }
}

TEST(LdaG, DiracPotentialOverCubeRootIsConstant) {
  const LdaFunctional f{LdaKind::DiracExchange};
  const double expected = -std::cbrt(3.0 / kPi);
  for (double lr = -8; lr <= 4; lr += 0.1) {
    const double rho = std::pow(10.0, lr);
    EXPECT_NEAR(f.g_prime(rho) / std::cbrt(rho), expected, 1e-12);
  }
}

TEST(LdaG, DeclaredExponentsInAdmissibleRange) {
  for (auto kind : {LdaKind::DiracExchange, LdaKind::PZ81Correlation, LdaKind::DiracPlusPZ81}) {
    const LdaFunctional f{kind};
    EXPECT_GE(f.declared_alpha, 1.0);
    EXPECT_LT(f.declared_alpha, 1.5);
    EXPECT_GT(f.declared_beta_minus, 0.0);
    EXPECT_LE(f.declared_beta_minus, f.declared_beta_plus);
    EXPECT_LT(f.declared_beta_plus, 2.0 / 3.0);
  }
}

TEST(GgaH, PbeParameters) {
  const PbeParameters p;
  EXPECT_DOUBLE_EQ(p.mu, 0.21951);
  EXPECT_DOUBLE_EQ(p.nu, 0.804);
  EXPECT_NEAR(p.theta, (1.0 - std::log(2.0)) / (kPi * kPi), 1e-15);
  EXPECT_NEAR(p.upsilon, 3.0 * p.mu / (kPi * kPi), 1e-15);
}

TEST(GgaH, EnhancementFactor) {
  EXPECT_DOUBLE_EQ(pbe_enhancement(0.0), 1.0);
  EXPECT_NEAR(pbe_enhancement(1.0), 1.172432, 1e-6);
  EXPECT_NEAR(pbe_enhancement(1e8), 1.804, 1e-9);
}

TEST(GgaH, PbeExchangeAtZeroGradientIsLdaExchange) {
  const auto pbex = std::get<GgaFunctional>(make_functional("pbe-x"));
  const LdaFunctional dirac{LdaKind::DiracExchange};
  for (double rho : {1e-6, 1e-2, 1.0, 37.0}) {
    const auto v = pbex.evaluate({rho, 0.0});
    EXPECT_NEAR(v.h, dirac.g(rho), 1e-14 * std::abs(dirac.g(rho)));
    EXPECT_NEAR(v.dh_drho, dirac.g_prime(rho), 1e-13 * std::abs(dirac.g_prime(rho)));
  }
}

TEST(GgaH, PbeCorrelationAtZeroGradientIsPz81) {
  const auto pbec = std::get<GgaFunctional>(make_functional("pbe-c"));
  for (double rho : {1e-6, 1e-2, 1.0, 37.0}) EXPECT_NEAR(pbec.h(rho, 0.0), oracle::pz81_g(rho), 1e-15);
}

TEST(GgaH, PbeExchangeMatchesPhysicsConventionForm) {
  // rho eps_x(rho) F_x(s) with s computed from |grad rho| directly.
  const auto pbex = std::get<GgaFunctional>(make_functional("pbe-x"));
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-4, 3);
  for (int i = 0; i < 100; ++i) {
    const double rho = std::pow(10.0, u(gen));
    const double grad = std::pow(10.0, u(gen));
    const double s = reduced_variables(rho, grad).s;
    const double expected = oracle::dirac_g(rho) * pbe_enhancement(s);
    const double kappa = kappa_from_gradient(rho, grad * grad).kappa;
    EXPECT_NEAR(pbex.h(rho, kappa), expected, 1e-12 * std::abs(expected));
  }
}

TEST(GgaH, VanishesAtZeroDensity) {
  for (const auto& fn : all_registered()) {
    const auto g = as_gga(fn);
    for (double kappa : {0.0, 1e-8, 1.0, 1e4}) EXPECT_EQ(g.h(0.0, kappa), 0.0) << g.id();
  }
}

TEST(GgaH, LdaAsGgaHasNoKappaDependence) {
  const auto g = lda_as_gga(LdaFunctional{LdaKind::DiracPlusPZ81});
  for (double rho : {1e-5, 0.3, 10.0})
    for (double kappa : {0.0, 1.0, 1e3}) {
      const auto v = g.evaluate({rho, kappa});
      EXPECT_EQ(v.dh_dkappa, 0.0);
      EXPECT_EQ(v.d2h_dkappa2, 0.0);
    }
  ASSERT_TRUE(g.declared_ellipticity.has_value());
  EXPECT_EQ((*g.declared_ellipticity)[0], 1.0);
  EXPECT_EQ((*g.declared_ellipticity)[1], 1.0);
}

TEST(GgaH, NegativeInputsAreDomainErrors) {
  const auto g = std::get<GgaFunctional>(make_functional("pbe"));
  EXPECT_THROW(g.evaluate({-1.0, 0.0}), DomainError);
  EXPECT_THROW(g.evaluate({1.0, -1.0}), DomainError);
}

TEST(GgaH, AnalyticPartialsMatchFiniteDifferences) {
  const auto samples = support::derivative_samples(1000, 2024);
  for (const auto& fn : all_registered()) {
    const auto g = as_gga(fn);
    const auto rep = support::check_gga_partials(g, samples);
    EXPECT_LT(rep.worst, 1e-6) << g.id() << ": " << rep.where;
    if (const auto* l = std::get_if<LdaFunctional>(&fn)) {
      const auto rl = support::check_lda_partials(*l, samples);
      EXPECT_LT(rl.worst, 1e-6) << l->id() << ": " << rl.where;
    }
  }
}

TEST(Kappa, ExponentialProfile) {
  // rho = exp(-2r): |grad rho|^2 = 4 exp(-4r), kappa = exp(-2r)/2.
  for (double r : {0.0, 0.5, 2.0, 7.0}) {
    const double rho = std::exp(-2 * r);
    const double k = kappa_from_gradient(rho, 4 * std::exp(-4 * r)).kappa;
    EXPECT_NEAR(k, 0.5 * std::exp(-2 * r), 1e-15);
    // independent route: kappa = 1/2 |d sqrt(rho)/dr|^2 by central differences
    const double h = 1e-5;
    const double ds = (std::exp(-(r + h)) - std::exp(-(r - h))) / (2 * h);
    EXPECT_NEAR(k, 0.5 * ds * ds, 1e-6 * k);
  }
  EXPECT_NEAR(kappa_from_gradient(1.0, 4.0).kappa, 0.5, 1e-15);
}

TEST(Kappa, ConstantAndEmpty) {
  EXPECT_EQ(kappa_from_gradient(3.0, 0.0).kappa, 0.0);
  const auto z = kappa_from_gradient(0.0, 0.0);
  EXPECT_EQ(z.kappa, 0.0);
  EXPECT_FALSE(z.cusp);
}

TEST(Kappa, CuspFlagged) {
  const auto c = kappa_from_gradient(0.0, 1e-3);
  EXPECT_TRUE(c.cusp);
  EXPECT_TRUE(std::isfinite(c.kappa));
}

TEST(Kappa, MatchesSqrtDensityDifferencesOnRandomProfiles) {
  // rho(r) = A exp(-b r) (1 + c r^2), away from any zero of rho
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> ua(0.1, 10), ub(0.2, 4), uc(0, 2), ur(0.05, 6);
  for (int i = 0; i < 200; ++i) {
    const double A = ua(gen), b = ub(gen), c = uc(gen), r = ur(gen);
    auto rho = [&](double x) { return A * std::exp(-b * x) * (1 + c * x * x); };
    const double drho = A * std::exp(-b * r) * (-b * (1 + c * r * r) + 2 * c * r);
    const double k = kappa_from_gradient(rho(r), drho * drho).kappa;
    const double h = 1e-4 * std::max(r, 0.1);
    const double ds = support::fd1([&](double x) { return std::sqrt(rho(x)); }, r, h);
    EXPECT_NEAR(k, 0.5 * ds * ds, 1e-6 * std::max(k, 1e-12));
  }
}

TEST(ReducedVariables, ZeroGradient) {
  const auto v = reduced_variables(1.0, 0.0);
  EXPECT_EQ(v.s, 0.0);
  EXPECT_EQ(v.t, 0.0);
  EXPECT_NEAR(v.r_s, std::pow(4 * kPi / 3, -1.0 / 3.0), 1e-15);
  EXPECT_NEAR(v.r_s, 0.620350, 1e-6);
}

TEST(ReducedVariables, IndependentRecomputation) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-6, 4);
  for (int i = 0; i < 100; ++i) {
    const double rho = std::pow(10.0, u(gen));
    const double g = std::pow(10.0, u(gen));
    const auto v = reduced_variables(rho, g);
    // s = |grad rho| / (2 k_F rho), k_F = (3 pi^2 rho)^{1/3}
    const double kf = std::cbrt(3 * kPi * kPi * rho);
    EXPECT_NEAR(v.s, g / (2 * kf * rho), 1e-12 * v.s);
    // t = |grad rho| / (2 k_s rho), k_s = sqrt(4 k_F / pi)
    const double ks = std::sqrt(4 * kf / kPi);
    EXPECT_NEAR(v.t, g / (2 * ks * rho), 1e-12 * v.t);
    EXPECT_NEAR(4.0 / 3.0 * kPi * std::pow(v.r_s, 3) * rho, 1.0, 1e-12);
  }
  EXPECT_THROW(reduced_variables(0.0, 1.0), DomainError);
}

TEST(ExcIntegral, ZeroDensity) {
  const auto grid = radial::RadialGrid::build(radial::GridSpec{});
  const std::vector<double> rho(grid.size(), 0.0);
  for (const auto& fn : all_registered()) {
    const std::vector<double> grad(grid.size(), 0.0);
    EXPECT_EQ(exc_integral(fn, grid, rho, std::span<const double>(grad)), 0.0);
  }
}

TEST(ExcIntegral, DiracOnHydrogenDensity) {
  const auto grid = radial::RadialGrid::build(radial::GridSpec{});
  std::vector<double> rho(grid.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::exp(-2 * grid.r(i)) / kPi;
  // -Cx pi^{-4/3} 4 pi \int r^2 e^{-8r/3} dr = -Cx pi^{-4/3} 4 pi * 2 (3/8)^3
  const double cx = 0.75 * std::cbrt(3.0 / kPi);
  const double expected = -cx * std::pow(kPi, -4.0 / 3.0) * 4 * kPi * 2 * std::pow(3.0 / 8.0, 3);
  EXPECT_NEAR(expected, -0.212741503086010, 1e-14);
  EXPECT_NEAR(exc_integral(make_functional("lda-x"), grid, rho), expected, 1e-9);
}

TEST(ExcIntegral, GgaNeedsGradient) {
  const auto grid = radial::RadialGrid::build(radial::GridSpec{});
  const std::vector<double> rho(grid.size(), 0.1);
  EXPECT_THROW(exc_integral(make_functional("pbe"), grid, rho), ContractError);
  EXPECT_NO_THROW(exc_integral(make_functional("gga:lda-x"), grid, rho));
}

TEST(Registry, KnownAndUnknownIds) {
  for (auto id : kRegisteredIds) EXPECT_EQ(functional_id(make_functional(id)), id);
  EXPECT_EQ(functional_id(make_functional("gga:pz81")), "gga:pz81");
  EXPECT_THROW(make_functional("b3lyp"), ContractError);
  EXPECT_THROW(make_functional("gga:pbe"), ContractError);
}

// One line per acceptance criterion; exit status 1 if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ksatom/checker/hypothesis.hpp"
#include "ksatom/cli/app.hpp"
#include "ksatom/diagnostics/diagnostics.hpp"
#include "ksatom/pair/pair.hpp"
#include "ksatom/radial/eigensolver.hpp"
#include "ksatom/radial/operators.hpp"
#include "ksatom/scf/aufbau.hpp"
#include "ksatom/scf/scf.hpp"
#include "oracle/numerov_atom.hpp"
#include "support/fd_check.hpp"

using namespace ksatom;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// States produced by criteria 4-7, checked again by criterion 8.
struct Produced {
  std::vector<std::pair<std::string, scf::ScfResult>> eks;
  std::vector<std::pair<std::string, pair::PairResult>> pairs;
} produced;

scf::ScfConfig lda_helium() {
  scf::ScfConfig cfg;
  cfg.functional = "lda-x+pz81";
  cfg.mixing.kind = scf::MixingKind::Anderson;
  return cfg;
}

Outcome hydrogenic_spectrum() {
  const auto g = radial::RadialGrid::build(radial::GridSpec{});
  const auto op = radial::kinetic_operator(g, 0);
  double worst = 0.0, slowest = 0.0;
  for (int z = 1; z <= 3; ++z) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = -z / g.r(i);
    const auto pairs = radial::lowest_eigenpairs(op, v, 3);
    for (int n = 1; n <= 3; ++n)
      worst = std::max(worst, std::abs(pairs[n - 1].value + z * z / (2.0 * n * n)));
    slowest = std::max(slowest, seconds_since(t0));
  }
  return {worst < 1e-4 && slowest < 5.0,
          "max |eps - (-Z^2/2n^2)| = " + fmt("%.3g", worst) + " Ha, slowest Z " + fmt("%.2f", slowest) + " s"};
}

Outcome hypothesis_certification() {
  const auto dirac = checker::check_functional(xc::make_functional("lda-x"), checker::SampleSpec{});
  const bool exps = dirac.alpha && dirac.beta_minus && dirac.beta_plus &&
                    std::abs(dirac.alpha->exponent - 4.0 / 3.0) <= 0.01 &&
                    std::abs(dirac.beta_minus->exponent - 1.0 / 3.0) <= 0.01 &&
                    std::abs(dirac.beta_plus->exponent - 1.0 / 3.0) <= 0.01;
  std::string failed;
  bool gga_ok = true;
  for (const char* id : {"gga:pz81", "gga:lda-x+pz81"}) {
    const auto r = checker::check_functional(xc::make_functional(id), checker::SampleSpec{});
    for (const auto& c : r.conditions)
      if (c.verdict != checker::Verdict::Pass) {
        gga_ok = false;
        failed += std::string(" ") + id + ":" + c.id;
      }
  }
  std::string d = "Dirac " + std::string(dirac.all_pass() ? "passes" : "fails");
  if (dirac.alpha) d += ", alpha " + fmt("%.4f", dirac.alpha->exponent);
  if (dirac.beta_minus && dirac.beta_plus)
    d += ", beta " + fmt("%.4f", dirac.beta_minus->exponent) + "/" + fmt("%.4f", dirac.beta_plus->exponent);
  d += gga_ok ? "; LdaAsGga pz81 and lda-x+pz81 pass all conditions" : ";" + failed;
  return {dirac.all_pass() && exps && gga_ok, d};
}

Outcome derivative_consistency() {
  const auto samples = support::derivative_samples(1000, 2024);
  double worst = 0.0;
  std::string where;
  for (const auto id : xc::kRegisteredIds) {
    const auto f = xc::make_functional(id);
    auto rep = support::check_gga_partials(xc::as_gga(f), samples);
    if (const auto* l = std::get_if<xc::LdaFunctional>(&f)) {
      const auto rl = support::check_lda_partials(*l, samples);
      if (rl.worst > rep.worst) rep = rl;
    }
    if (rep.worst > worst) {
      worst = rep.worst;
      where = std::string(id) + " " + rep.where;
    }
  }
  return {worst < 1e-6, std::to_string(xc::kRegisteredIds.size()) + " functionals x 1000 points, worst relative error " +
                            fmt("%.3g", worst) + (where.empty() ? "" : " (" + where + ")")};
}

Outcome helium_lda() {
  auto res = scf::run_scf(lda_helium());
  const auto ref = oracle::NumerovAtom(2.0, std::log(1e-6), 40.0, 8001).solve(oracle::Xc::DiracPz81);
  const auto occ = res.state.occupied();
  const bool rank_one = occ.size() == 1 && occ.front()->occupation == 1.0;
  const double residual = res.history.empty() ? INFINITY : res.history.back().residual;
  const bool pass = res.converged && residual < 1e-8 && res.iterations <= 200 && ref.converged &&
                    std::abs(res.energies.total - ref.energy) < 1e-3 && rank_one && res.state.fermi_level < 0.0;
  std::string d = "E " + fmt("%.10g", res.energies.total) + " vs oracle " + fmt("%.10g", ref.energy) + ", " +
                  std::to_string(res.iterations) + " iterations, residual " + fmt("%.2g", residual) +
                  ", eps_F " + fmt("%.6f", res.state.fermi_level) + (rank_one ? ", rank 1" : ", NOT rank 1");
  if (res.converged) produced.eks.emplace_back("He LDA", std::move(res));
  return {pass, d};
}

Outcome pbe_two_electron() {
  pair::PairConfig cfg;
  cfg.functional = "pbe";
  auto res = pair::solve_pair(cfg);
  const auto g = radial::RadialGrid::build(cfg.grid);
  const double resid = pair::euler_residual(g, res.state.u, xc::as_gga(xc::make_functional("pbe")), cfg.z);
  double min_u = res.state.u.front();
  for (double x : res.state.u) min_u = std::min(min_u, x);
  bool fit_ok = false;
  std::string fit_text = "no decay window";
  try {
    const auto fit = diagnostics::fit_decay(g, pair::orbital(g, res.state.u));
    fit_ok = fit.gamma > 0.0 && fit.r2 > 0.999;
    fit_text = "gamma " + fmt("%.4f", fit.gamma) + " (R^2 " + fmt("%.6f", fit.r2) + ")";
  } catch (const ContractError&) {
  }
  const bool pass = res.converged && resid < 1e-6 && res.state.epsilon < 0.0 && min_u >= 0.0 && fit_ok;
  std::string d = "residual " + fmt("%.3g", resid) + ", eps " + fmt("%.6f", res.state.epsilon) + ", E " +
                  fmt("%.10g", res.state.energies.total) + ", min u " + fmt("%.2g", min_u) + ", " + fit_text;
  if (res.converged) produced.pairs.emplace_back("He PBE pair", std::move(res));
  return {pass, d};
}

Outcome cross_module() {
  pair::PairConfig pc;
  pc.functional = "gga:lda-x+pz81";
  auto p = pair::solve_pair(pc);
  auto eks = scf::run_scf(lda_helium());
  const auto rep = pair::rank_one_check(p, eks);
  const bool pass = p.converged && eks.converged && std::abs(rep.energy_gap) < 1e-6 && rep.density_gap < 1e-6;
  std::string d = "|dE| " + fmt("%.3g", std::abs(rep.energy_gap)) + " Ha, ||drho||_1 " + fmt("%.3g", rep.density_gap);
  if (p.converged) produced.pairs.emplace_back("He LdaAsGga pair", std::move(p));
  return {pass, d};
}

Outcome lambda_structure() {
  auto base = lda_helium();
  const std::vector<double> lambdas{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  const auto table = scf::scan_lambda(base, lambdas, 4);
  int unconverged = 0;
  for (const auto& row : table.rows) {
    const std::string l = fmt("%g", row.lambda);
    if (row.atom.converged) produced.eks.emplace_back("I(" + l + ")", row.atom);
    else ++unconverged;
    if (row.infinity.converged) produced.eks.emplace_back("I_inf(" + l + ")", row.infinity);
    else ++unconverged;
  }
  const auto rep = diagnostics::check_lambda_table(table);
  const bool pass = unconverged == 0 && rep.decreasing_atom && rep.decreasing_infinity && rep.binding &&
                    rep.negative_infinity && rep.subadditive;
  auto flag = [](bool ok, const char* name) { return std::string(name) + (ok ? " ok" : " FAILS"); };
  std::string d = flag(rep.decreasing_atom, "I decreasing") + ", " + flag(rep.decreasing_infinity, "I_inf decreasing") +
                  ", " + flag(rep.binding, "I < I_inf") + ", " + flag(rep.negative_infinity, "I_inf < 0") + ", " +
                  flag(rep.subadditive, "subadditivity");
  if (unconverged) d += ", " + std::to_string(unconverged) + " runs unconverged";
  d += "; I_inf:";
  for (const auto& row : table.rows) d += " " + fmt("%g", row.lambda) + "->" + fmt("%.3g", row.infinity.energies.total);
  return {pass, d};
}

Outcome estimates_on_produced_states() {
  int states = 0, rank_one = 0;
  std::string failed;
  for (const auto& [name, r] : produced.eks) {
    const auto rep = diagnostics::verify_estimates(r);
    ++states;
    rank_one += rep.rank_one;
    for (const auto& c : rep.checks)
      if (!c.pass) failed += " " + name + ":" + c.id;
  }
  for (const auto& [name, r] : produced.pairs) {
    const auto rep = diagnostics::verify_estimates(r);
    ++states;
    rank_one += rep.rank_one;
    for (const auto& c : rep.checks)
      if (!c.pass) failed += " " + name + ":" + c.id;
  }
  return {failed.empty() && states > 0, std::to_string(states) + " converged states (" + std::to_string(rank_one) +
                                            " rank 1)" + (failed.empty() ? ", all estimates hold" : "; failing:" + failed)};
}

Outcome aufbau_examples() {
  using scf::aufbau_fill;
  const auto a = aufbau_fill({{-2.0, -0.5}, {-0.8}}, 2.5);
  const auto b = aufbau_fill({{-2.0, -0.5}, {-0.8}}, 5.0);
  const auto c = aufbau_fill({{-2.0, -0.5}, {-0.5 + 1e-9}}, 2.0);
  const bool ok_a = a.occupations[0][0] == 1.0 && a.occupations[1][0] == 0.5 && a.occupations[0][1] == 0.0 &&
                    a.fermi_level == -0.8;
  const bool ok_b = b.occupations[0][0] == 1.0 && b.occupations[0][1] == 1.0 && b.occupations[1][0] == 1.0 &&
                    b.fermi_level == -0.5;
  const bool ok_c = c.occupations[0][0] == 1.0 && c.occupations[0][1] == 0.25 && c.occupations[1][0] == 0.25 &&
                    c.fermi_level == -0.5;
  return {ok_a && ok_b && ok_c, std::string("fractional shell ") + (ok_a ? "ok" : "WRONG") + ", full capacity " +
                                    (ok_b ? "ok" : "WRONG") + ", degenerate split " + (ok_c ? "ok" : "WRONG")};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ksatom_acceptance";
  fs::create_directories(dir);
  const auto out = (dir / "run.json").string();
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  std::string failed;
  const std::vector<std::vector<std::string>> runs = {
      {"solve-atom"}, {"solve-infinity", "--lambda", "0.25"}, {"solve-two-electron"}, {"check-xc", "--functional", "pbe"}};
  for (const auto& r : runs) {
    std::vector<std::string> args{"ksatom"};
    args.insert(args.end(), r.begin(), r.end());
    args.insert(args.end(), {"--out", out});
    std::ostringstream sink;
    std::string first;
    for (int k = 0; k < 2; ++k) {
      fs::remove(out);
      const int code = cli::run(args, sink, sink);
      const auto text = slurp(out);
      if (code != 0 || text.empty()) failed += " " + r.front() + "(exit " + std::to_string(code) + ")";
      if (k == 0) first = text;
      else if (text != first) failed += " " + r.front();
    }
  }
  fs::remove_all(dir);
  return {failed.empty(), failed.empty() ? "solve-atom, solve-infinity, solve-two-electron, check-xc: identical bytes"
                                         : "differs or failed:" + failed};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "hydrogenic spectrum", hydrogenic_spectrum},
      {2, "hypothesis certification", hypothesis_certification},
      {3, "derivative consistency", derivative_consistency},
      {4, "helium LDA ground state", helium_lda},
      {5, "two-electron PBE properties", pbe_two_electron},
      {6, "cross-module equivalence", cross_module},
      {7, "I_lambda structure", lambda_structure},
      {8, "estimates on produced states", estimates_on_produced_states},
      {9, "aufbau examples", aufbau_examples},
      {10, "determinism", determinism},
  };
  const double budget[] = {15.0, 10.0, 30.0, 60.0, 120.0, 1e9, 900.0, 1e9, 1e9, 1e9};

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double t = seconds_since(t0);
    if (t > budget[c.id - 1]) {
      o.pass = false;
      o.detail += "; over the " + fmt("%g", budget[c.id - 1]) + " s budget";
    }
    failures += !o.pass;
    std::printf("criterion %2d %-30s %s  %s  [%.1f s]\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), t);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

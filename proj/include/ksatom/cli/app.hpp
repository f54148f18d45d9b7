#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ksatom/checker/hypothesis.hpp"
#include "ksatom/cli/config.hpp"
#include "ksatom/cli/serialize.hpp"
#include "ksatom/diagnostics/diagnostics.hpp"
#include "ksatom/pair/pair.hpp"
#include "ksatom/radial/hartree.hpp"
#include "ksatom/radial/radial_io.hpp"
#include "ksatom/scf/scf.hpp"
#include "ksatom/xc/exc_integral.hpp"

namespace ksatom::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;

/// What a subcommand produced: the document written to `config.out`, the
/// human-readable summary, and the exit code.
struct Outcome {
  int code = kExitOk;
  Json document;
  std::string summary;
};

namespace detail {

inline std::string sig10(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

class Summary {
 public:
  explicit Summary(std::string title) { text_ = title + "\n"; }
  void row(const std::string& name, const std::string& value) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "  %-26s ", name.c_str());
    text_ += buf + value + "\n";
  }
  void row(const std::string& name, double value) { row(name, sig10(value)); }
  void line(const std::string& s) { text_ += "  " + s + "\n"; }
  std::string str() const { return text_; }

 private:
  std::string text_;
};

inline std::string title(const RunConfig& c) {
  std::string t = "ksatom " + to_string(c.subcommand) + "  functional " + c.resolved_functional();
  if (c.subcommand != Subcommand::CheckXc && c.subcommand != Subcommand::Verify) t += "  Z " + std::to_string(c.z);
  if (is_eks(c.subcommand) && c.subcommand != Subcommand::ScanLambda) t += "  lambda " + sig10(c.lambda);
  return t;
}

inline std::filesystem::path sibling(const std::filesystem::path& out, const std::string& suffix) {
  auto stem = out.parent_path() / out.stem();
  stem += suffix;
  return stem;
}

inline void dump(const std::filesystem::path& path, std::vector<std::string> header, const radial::RadialGrid& g,
                 std::span<const double> v) {
  radial::TwoColumn t;
  t.header = std::move(header);
  t.r.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) t.r[i] = g.r(i);
  t.value.assign(v.begin(), v.end());
  radial::write_two_column(path, t);
}

inline void dump_scf(const RunConfig& c, const scf::ScfResult& r, const radial::RadialGrid& g,
                     const std::string& tag) {
  const std::string who = "functional " + r.config.functional + ", Z " + sig10(r.config.include_nuclear ? r.config.z : 0.0) +
                          ", lambda " + sig10(r.config.lambda);
  dump(sibling(c.out, tag + ".density.dat"), {"density rho(r) in bohr^-3; " + who, "r rho"}, g, r.density.rho);
  for (const auto& ch : r.state.channels)
    for (const auto& s : ch) {
      if (s.occupation <= 0.0) continue;
      const std::string name = tag + ".orbital.l" + std::to_string(s.l) + ".k" + std::to_string(s.index) + ".dat";
      dump(sibling(c.out, name),
           {"reduced radial orbital u(r), l " + std::to_string(s.l) + ", eigenvalue " + sig10(s.eigenvalue) +
                ", occupation " + sig10(s.occupation) + "; " + who,
            "r u"},
           g, s.u);
    }
}

inline void energy_rows(Summary& s, const scf::Energies& e) {
  s.row("E_total", e.total);
  s.row("  kinetic", e.kinetic);
  s.row("  nuclear", e.nuclear);
  s.row("  hartree", e.hartree);
  s.row("  exc", e.exc);
}

inline std::string status(bool converged) { return converged ? "converged" : "not_converged"; }

inline Json state_diagnostics(const scf::ScfResult& r, const radial::RadialGrid& g) {
  Json d;
  d["estimates"] = estimates_json(diagnostics::verify_estimates(r));
  d["regime"] = regime_json(diagnostics::regime_flags(r.config.include_nuclear ? r.config.z : 0.0, r.config.lambda));
  d["box_edge_fraction"] = diagnostics::box_edge_fraction(g, r.density.rho);
  return d;
}

// --- subcommands -----------------------------------------------------------

inline Outcome check_xc(const RunConfig& c) {
  const auto rep = checker::check_functional(xc::make_functional(c.resolved_functional()), c.sample);
  Outcome o;
  o.document = document(c);
  o.document["status"] = "ok";
  o.document["result"] = condition_report_json(rep);
  Summary s(title(c));
  for (const auto& x : rep.conditions) s.row(x.id, checker::to_string(x.verdict));
  for (const auto& x : rep.relaxed) s.row(x.id + " (relaxed)", checker::to_string(x.verdict));
  if (rep.alpha) s.row("alpha", rep.alpha->exponent);
  if (rep.beta_minus) s.row("beta_minus", rep.beta_minus->exponent);
  if (rep.beta_plus) s.row("beta_plus", rep.beta_plus->exponent);
  o.summary = s.str();
  return o;
}

inline Outcome solve_eks(const RunConfig& c) {
  const bool infinity = c.subcommand == Subcommand::SolveInfinity;
  const auto r = infinity ? scf::solve_at_infinity(c.scf) : scf::run_scf(c.scf);
  const auto g = radial::RadialGrid::build(r.config.grid);
  Outcome o;
  o.code = r.converged ? kExitOk : kExitNotConverged;
  o.document = document(c);
  o.document["status"] = status(r.converged);
  o.document["result"] = scf_result_json(r, g);
  o.document["diagnostics"] = state_diagnostics(r, g);
  if (c.dump_orbitals) dump_scf(c, r, g, "");

  Summary s(title(c));
  s.row("status", status(r.converged) + " after " + std::to_string(r.iterations) + " iterations");
  if (!r.history.empty()) s.row("density residual", r.history.back().residual);
  energy_rows(s, r.energies);
  s.row("fermi_level", r.state.fermi_level);
  for (const auto* sh : r.state.occupied())
    s.row("shell l=" + std::to_string(sh->l) + " k=" + std::to_string(sh->index),
          "eps " + sig10(sh->eigenvalue) + "  f " + sig10(sh->occupation));
  s.row("estimates", o.document["diagnostics"]["estimates"]["all_pass"].get<bool>() ? "pass" : "FAIL");
  for (const auto& n : r.notes) s.line("note: " + n);
  o.summary = s.str();
  return o;
}

inline Outcome scan(const RunConfig& c) {
  const auto table = scf::scan_lambda(c.scf, c.lambdas, c.jobs);
  const auto g = radial::RadialGrid::build(c.scf.grid);
  Outcome o;
  o.document = document(c);
  Json rows = Json::array();
  bool all_converged = true;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    all_converged = all_converged && row.atom.converged && row.infinity.converged;
    rows.push_back({{"lambda", row.lambda},
                    {"atom", scf_result_json(row.atom, g)},
                    {"infinity", scf_result_json(row.infinity, g)},
                    {"diagnostics",
                     {{"atom", state_diagnostics(row.atom, g)}, {"infinity", state_diagnostics(row.infinity, g)}}}});
    if (c.dump_orbitals) {
      dump_scf(c, row.atom, g, ".lambda" + std::to_string(i) + ".atom");
      dump_scf(c, row.infinity, g, ".lambda" + std::to_string(i) + ".infinity");
    }
  }
  o.code = all_converged ? kExitOk : kExitNotConverged;
  o.document["status"] = status(all_converged);
  o.document["result"] = {{"rows", rows}};

  Summary s(title(c));
  s.row("lambda", "I_lambda          I_inf_lambda");
  for (const auto& row : table.rows)
    s.row(sig10(row.lambda), sig10(row.atom.energies.total) + (row.atom.converged ? "  " : "* ") +
                                 sig10(row.infinity.energies.total) + (row.infinity.converged ? "" : "*"));
  try {
    const auto rep = diagnostics::check_lambda_table(table);
    o.document["diagnostics"] = {{"lambda_table", lambda_report_json(rep)}};
    s.row("decreasing I / I_inf", std::string(rep.decreasing_atom ? "pass" : "FAIL") + " / " +
                                      (rep.decreasing_infinity ? "pass" : "FAIL"));
    s.row("I < I_inf", rep.binding ? "pass" : "FAIL");
    s.row("I_inf < 0", rep.negative_infinity ? "pass" : "FAIL");
    s.row("subadditivity", rep.subadditive ? "pass" : "FAIL");
    s.row("vanishing limit", rep.vanishing_limit ? "pass" : "FAIL");
    s.row("bounded differences", rep.bounded_differences ? "pass" : "FAIL");
  } catch (const ContractError& e) {
    o.document["diagnostics"] = {{"lambda_table", {{"error", e.what()}}}};
    s.row("lambda table", std::string("not checked: ") + e.what());
  }
  if (!all_converged) s.line("* not converged");
  o.summary = s.str();
  return o;
}

inline Outcome two_electron(const RunConfig& c) {
  const auto r = pair::solve_pair(c.pair);
  const auto g = radial::RadialGrid::build(c.pair.grid);
  Outcome o;
  o.code = r.converged ? kExitOk : kExitNotConverged;
  o.document = document(c);
  o.document["status"] = status(r.converged);
  o.document["result"] = pair_result_json(r, g);

  Json d;
  d["estimates"] = estimates_json(diagnostics::verify_estimates(r));
  d["regime"] = regime_json(diagnostics::regime_flags(c.pair.z, 1.0));
  const auto phi = pair::orbital(g, r.state.u);
  double min_u = 0.0;
  for (std::size_t i = 0; i + 1 < r.state.u.size(); ++i) min_u = i == 0 ? r.state.u[i] : std::min(min_u, r.state.u[i]);
  d["min_interior_u"] = num(min_u);
  try {
    d["decay"] = decay_json(diagnostics::fit_decay(g, phi));
  } catch (const ContractError& e) {
    d["decay"] = {{"error", e.what()}};
  }
  d["box_edge_fraction"] = diagnostics::box_edge_fraction(g, pair::pair_density(g, r.state.u));
  o.document["diagnostics"] = d;

  if (c.dump_orbitals) {
    const std::string who = "functional " + c.pair.functional + ", Z " + sig10(c.pair.z);
    dump(sibling(c.out, ".density.dat"), {"two-electron density rho = 2 phi^2 in bohr^-3; " + who, "r rho"}, g,
         pair::pair_density(g, r.state.u));
    dump(sibling(c.out, ".orbital.dat"),
         {"reduced radial orbital u = sqrt(4 pi) r phi, epsilon " + sig10(r.state.epsilon) + "; " + who, "r u"}, g,
         r.state.u);
  }

  Summary s(title(c));
  s.row("status", status(r.converged) + " after " + std::to_string(r.iterations) + " iterations");
  s.row("euler residual", r.state.residual);
  s.row("epsilon", r.state.epsilon);
  energy_rows(s, r.state.energies);
  if (d["decay"].contains("gamma")) s.row("decay rate of phi", d["decay"]["gamma"].get<double>());
  s.row("estimates", d["estimates"]["all_pass"].get<bool>() ? "pass" : "FAIL");
  for (const auto& n : r.notes) s.line("note: " + n);
  o.summary = s.str();
  return o;
}

// --- verify ------------------------------------------------------------------

struct VerifyContext {
  Json checks = Json::array();
  std::vector<std::string> warnings;

  void check(const std::string& id, bool pass, const std::string& detail = "") {
    checks.push_back({{"id", id}, {"pass", pass}, {"detail", detail}});
  }
};

inline bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)}); }

inline void check_nodes(VerifyContext& v, const radial::RadialGrid& g, const Json& r, const std::string& where) {
  const auto nodes = array_from_json(r);
  if (nodes.size() != g.size())
    throw ContractError(where + ": " + std::to_string(nodes.size()) + " stored nodes, the grid recipe gives " +
                        std::to_string(g.size()));
  double worst = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) worst = std::max(worst, std::abs(nodes[i] - g.r(i)) / g.r(i));
  if (worst > 1e-12) v.warnings.push_back(where + ": stored nodes deviate from the grid recipe by " + sig10(worst));
}

inline void add_estimates(VerifyContext& v, const diagnostics::EstimateReport& rep, const std::string& prefix) {
  for (const auto& c : rep.checks)
    v.check(prefix + "estimate." + c.id, c.pass, "lhs " + sig10(c.lhs) + ", rhs " + sig10(c.rhs));
}

// Replays one extended Kohn-Sham state from its stored density and shells.
inline void verify_eks_state(VerifyContext& v, const Json& st, const radial::RadialGrid& g,
                             const xc::Functional& f, double z, const std::string& prefix) {
  check_nodes(v, g, st.at("density").at("r"), prefix + "density");
  const auto rho = array_from_json(st.at("density").at("rho"));
  const auto e = energies_from_json(st.at("energies"));
  const bool nuclear = st.at("include_nuclear").get<bool>();
  v.check(prefix + "converged", st.at("converged").get<bool>());

  scf::Energies re = e;
  if (nuclear) {
    std::vector<double> w(g.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = -z * rho[i] / g.r(i);
    re.nuclear = g.integrate(w);
  }
  re.hartree = radial::hartree_energy(g, rho);
  re.exc = xc::exc_integral(f, g, rho);
  re.sum();
  const bool replay = close(re.nuclear, e.nuclear, 1e-10) && close(re.hartree, e.hartree, 1e-10) &&
                      close(re.exc, e.exc, 1e-10) && close(re.total, e.total, 1e-10);
  v.check(prefix + "energy_replay", replay, "E recomputed " + sig10(re.total) + ", stored " + sig10(e.total));

  double trace = 0.0;
  int occupied = 0;
  bool rank_one = false;
  for (const auto& s : st.at("shells")) {
    const double occ = s.at("occupation").get<double>();
    const int l = s.at("l").get<int>();
    trace += (2 * l + 1) * occ;
    if (occ > 0.0) {
      ++occupied;
      rank_one = l == 0 && occ == 1.0;
    }
  }
  rank_one = rank_one && occupied == 1;
  add_estimates(v, diagnostics::verify_estimates(g, rho, e, nuclear ? z : 0.0, trace, rank_one), prefix);
  const double lambda = st.at("lambda").get<double>();
  if (nuclear && diagnostics::regime_flags(z, lambda).anion_warning)
    v.warnings.push_back(prefix + "N = 2 lambda = " + sig10(2 * lambda) + " exceeds Z: outside the theorem regime");
}

inline void verify_pair(VerifyContext& v, const Json& st, const radial::RadialGrid& g, const xc::Functional& f,
                        double z) {
  check_nodes(v, g, st.at("orbital").at("r"), "orbital");
  const auto u = array_from_json(st.at("orbital").at("u"));
  const auto e = energies_from_json(st.at("energies"));
  const auto gga = xc::as_gga(f);
  v.check("converged", st.at("converged").get<bool>());
  const auto chk = pair::euler_check(g, u, gga, z);
  v.check("euler_residual", chk.norm < 1e-6, "residual " + sig10(chk.norm) + ", epsilon " + sig10(chk.epsilon));
  v.check("epsilon_negative", chk.epsilon < 0.0);
  double min_u = u.front();
  for (std::size_t i = 0; i + 1 < u.size(); ++i) min_u = std::min(min_u, u[i]);
  v.check("orbital_nonnegative", min_u >= 0.0, "min u " + sig10(min_u));
  const auto re = pair::pair_energy(g, u, gga, z);
  v.check("energy_replay", close(re.total, e.total, 1e-10),
          "E recomputed " + sig10(re.total) + ", stored " + sig10(e.total));
  try {
    const auto fit = diagnostics::fit_decay(g, pair::orbital(g, u));
    v.check("exponential_decay", fit.gamma > 0.0 && fit.r2 > 0.999,
            "gamma " + sig10(fit.gamma) + ", R^2 " + sig10(fit.r2));
  } catch (const ContractError& ex) {
    v.check("exponential_decay", false, ex.what());
  }
  add_estimates(v, diagnostics::verify_estimates(g, pair::pair_density(g, u), e, z, 1.0, true), "");
  if (diagnostics::regime_flags(z, 1.0).anion_warning) v.warnings.push_back("two electrons with Z < 2: outside the theorem regime");
}

inline checker::SampleSpec sample_from_json(const Json& j) {
  checker::SampleSpec s;
  s.rho_min = j.at("rho_min").get<double>();
  s.rho_max = j.at("rho_max").get<double>();
  s.n_rho = j.at("n_rho").get<int>();
  s.kappa_min = j.at("kappa_min").get<double>();
  s.kappa_max = j.at("kappa_max").get<double>();
  s.n_kappa = j.at("n_kappa").get<int>();
  s.delta_neg = j.at("delta_neg").get<double>();
  return s;
}

inline Json load_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("input", 0, "cannot open result document " + path.string());
  Json src;
  try {
    src = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("input", 0, path.string() + " is not a JSON document: " + e.what());
  }
  if (!src.is_object() || !src.contains("schema_version")) throw ContractError(path.string() + " has no schema_version");
  if (src.at("schema_version") != kSchemaVersion)
    throw ContractError(path.string() + " has schema_version " + src.at("schema_version").dump() + ", expected " +
                        std::to_string(kSchemaVersion));
  return src;
}

inline Outcome verify(const RunConfig& c) {
  const Json src = load_document(c.input);
  const std::string kind = src.at("subcommand").get<std::string>();
  const Json& sc = src.at("config");
  const std::string fid = sc.at("functional").get<std::string>();
  const auto f = xc::make_functional(fid);
  const double z = sc.at("Z").get<double>();

  VerifyContext v;
  const auto grid_spec = grid_from_json(sc.at("grid"));
  if (!(grid_spec == c.grid))
    v.warnings.push_back("grid provenance mismatch: document grid " + grid_json(grid_spec).dump() +
                         ", requested grid " + grid_json(c.grid).dump() + "; the document grid is used");
  if (src.at("modules") != modules_json()) v.warnings.push_back("document was written by different module versions");
  const auto g = radial::RadialGrid::build(grid_spec);
  const Json& res = src.at("result");

  if (kind == "solve-atom" || kind == "solve-infinity") {
    verify_eks_state(v, res, g, f, z, "");
  } else if (kind == "scan-lambda") {
    std::vector<diagnostics::LambdaPoint> pts;
    for (const auto& row : res.at("rows")) {
      const double l = row.at("lambda").get<double>();
      const std::string p = "lambda=" + sig10(l) + ".";
      verify_eks_state(v, row.at("atom"), g, f, z, p + "atom.");
      verify_eks_state(v, row.at("infinity"), g, f, z, p + "infinity.");
      pts.push_back({l, row.at("atom").at("energies").at("total").get<double>(),
                     row.at("infinity").at("energies").at("total").get<double>(),
                     row.at("atom").at("converged").get<bool>() && row.at("infinity").at("converged").get<bool>()});
    }
    try {
      const auto rep = diagnostics::check_lambda_table(pts);
      auto witnesses = [&](const std::string& id) {
        std::string out;
        for (const auto& w : rep.violations)
          if (w.check == id) out += (out.empty() ? "" : "; ") + (w.mu > 0.0 ? sig10(w.mu) + "," : "") + sig10(w.lambda) + " by " +
                 sig10(w.amount);
        return out;
      };
      v.check("lambda_table.decreasing_atom", rep.decreasing_atom, witnesses("decreasing_atom"));
      v.check("lambda_table.decreasing_infinity", rep.decreasing_infinity, witnesses("decreasing_infinity"));
      v.check("lambda_table.binding", rep.binding, witnesses("binding"));
      v.check("lambda_table.negative_infinity", rep.negative_infinity, witnesses("negative_infinity"));
      v.check("lambda_table.subadditive", rep.subadditive, witnesses("subadditivity"));
      v.check("lambda_table.vanishing_limit", rep.vanishing_limit, "trend exponent " + sig10(rep.trend_exponent));
      v.check("lambda_table.bounded_differences", rep.bounded_differences, "L " + sig10(rep.lipschitz));
      for (const auto& w : rep.warnings) v.warnings.push_back(w);
    } catch (const ContractError& e) {
      v.check("lambda_table", false, e.what());
    }
  } else if (kind == "solve-two-electron") {
    verify_pair(v, res, g, f, z);
  } else if (kind == "check-xc") {
    const auto rep = checker::check_functional(f, sample_from_json(sc.at("checker")));
    const auto replay = condition_report_json(rep);
    v.check("replay", replay.at("conditions") == res.at("conditions") && replay.at("relaxed") == res.at("relaxed"),
            "condition report recomputed from the stored sample specification");
    for (const auto& [id, cond] : res.at("conditions").items())
      v.check("condition." + id, cond.at("verdict") == "pass", cond.at("verdict").get<std::string>());
  } else {
    throw ContractError("cannot verify a '" + kind + "' document");
  }

  bool all = true;
  for (const auto& ch : v.checks) all = all && ch.at("pass").get<bool>();
  Outcome o;
  o.document = document(c);
  o.document["status"] = "ok";
  o.document["source"] = {{"path", c.input.generic_string()}, {"subcommand", kind}, {"config", sc}};
  o.document["warnings"] = v.warnings;
  o.document["all_pass"] = all;
  o.document["checks"] = v.checks;

  Summary s("ksatom verify  " + c.input.generic_string() + "  (" + kind + ", functional " + fid + ")");
  for (const auto& ch : v.checks) {
    std::string line = ch.at("pass").get<bool>() ? "pass" : "FAIL";
    const auto detail = ch.at("detail").get<std::string>();
    if (!detail.empty()) line += "  " + detail;
    s.row(ch.at("id").get<std::string>(), line);
  }
  for (const auto& w : v.warnings) s.line("warning: " + w);
  s.row("overall", all ? "pass" : "FAIL");
  o.summary = s.str();
  return o;
}

}  // namespace detail

/// Runs one resolved configuration without touching the filesystem.
inline Outcome execute(const RunConfig& c) {
  switch (c.subcommand) {
    case Subcommand::CheckXc: return detail::check_xc(c);
    case Subcommand::SolveAtom:
    case Subcommand::SolveInfinity: return detail::solve_eks(c);
    case Subcommand::ScanLambda: return detail::scan(c);
    case Subcommand::SolveTwoElectron: return detail::two_electron(c);
    case Subcommand::Verify: return detail::verify(c);
  }
  throw ContractError("unknown subcommand");
}

/// Runs the subcommand, writes the result document atomically and prints the
/// summary. Returns the process exit code.
inline int dispatch(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    const auto o = execute(c);
    radial::write_file_atomic(c.out, o.document.dump(2) + "\n");
    out << o.summary << "  result document            " << c.out.generic_string() << "\n";
    if (o.code == kExitNotConverged) err << "ksatom: not converged; partial result written to " << c.out << "\n";
    return o.code;
  } catch (const ConvergenceError& e) {
    err << "ksatom: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const std::exception& e) {
    err << "ksatom: " << e.what() << "\n";
    return kExitError;
  }
}

/// Command-line entry point: flags over config file over defaults.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Closed-shell extended Kohn-Sham radial atom solver and verification suite", "ksatom"};
  app.require_subcommand(1);

  struct Flag {
    std::string key, name, desc;
  };
  const std::vector<Flag> flags = {
      {"functional", "--functional", "functional id (lda-x, pz81, lda-x+pz81, pbe-x, pbe-c, pbe, none, gga:<lda id>)"},
      {"Z", "-Z", "nuclear charge, positive integer"},
      {"lambda", "--lambda", "trace lambda = N/2, in (0, 8]"},
      {"lambdas", "--lambdas", "comma-separated lambda list for scan-lambda"},
      {"grid.n", "--grid-n", "number of grid nodes"},
      {"grid.rmax", "--rmax", "box radius in bohr"},
      {"scf.tol_density", "--tol-density", "SCF tolerance on the L1 density residual"},
      {"max_iter", "--max-iter", "iteration cap of the solver"},
      {"mixing", "--mixing", "simple or anderson"},
      {"jobs", "--jobs", "worker threads for scan-lambda"},
      {"out", "--out", "result document path"},
  };
  // Every subcommand shares the storage; only the chosen one is parsed.
  std::vector<std::string> values(flags.size());
  std::string config_path, input;
  bool dump_orbitals = false;

  const std::vector<std::pair<Subcommand, std::string>> help = {
      {Subcommand::CheckXc, "certify the hypotheses of a registered functional on a sample grid"},
      {Subcommand::SolveAtom, "extended Kohn-Sham ground state of an atom with trace lambda"},
      {Subcommand::SolveInfinity, "the same minimization without the nucleus (problem at infinity)"},
      {Subcommand::ScanLambda, "I_lambda and I_inf_lambda over a list of lambdas"},
      {Subcommand::SolveTwoElectron, "two-electron GGA minimizer and its Euler equation"},
      {Subcommand::Verify, "replay the diagnostics of a result document"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [kind, text] : help) {
    auto* sc = app.add_subcommand(to_string(kind), text);
    subs.push_back(sc);
    sc->add_option("--config", config_path, "INI configuration file");
    for (std::size_t i = 0; i < flags.size(); ++i) sc->add_option(flags[i].name, values[i], flags[i].desc);
    sc->add_flag("--dump-orbitals", dump_orbitals, "write two-column density and orbital dumps");
    if (kind == Subcommand::Verify) sc->add_option("input", input, "result document")->required();
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  RunConfig cfg;
  try {
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed()) cfg.subcommand = help[i].first;
    const auto* chosen = subs[static_cast<std::size_t>(cfg.subcommand)];
    if (chosen->count("--config") > 0) apply_ini_file(cfg, config_path);
    for (std::size_t i = 0; i < flags.size(); ++i) {
      if (chosen->count(flags[i].name) == 0) continue;
      std::string key = flags[i].key;
      if (key == "max_iter" || key == "mixing")
        key = (cfg.subcommand == Subcommand::SolveTwoElectron ? "pair." : "scf.") + key;
      apply(cfg, key, values[i], 0);
    }
    if (chosen->count("--dump-orbitals") > 0) apply(cfg, "dump_orbitals", "true", 0);
    if (const auto* in = chosen->get_option_no_throw("input"); in && in->count() > 0) apply(cfg, "input", input, 0);
    resolve(cfg);
  } catch (const ConfigError& e) {
    err << "ksatom: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "ksatom: " << e.what() << "\n";
    return kExitError;
  }
  return dispatch(cfg, out, err);
}

inline int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace ksatom::cli

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "ksatom/checker/hypothesis.hpp"
#include "ksatom/cli/config.hpp"
#include "ksatom/diagnostics/diagnostics.hpp"
#include "ksatom/pair/pair.hpp"
#include "ksatom/scf/scf.hpp"
#include "ksatom/version.hpp"

namespace ksatom::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

// Non-finite values have no JSON spelling; they become null.
inline Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

template <class T>
Json opt(const std::optional<T>& x) {
  return x ? Json(*x) : Json(nullptr);
}

inline Json array(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline Json nodes(const radial::RadialGrid& g) {
  Json a = Json::array();
  for (std::size_t i = 0; i < g.size(); ++i) a.push_back(g.r(i));
  return a;
}

}  // namespace detail

inline Json grid_json(const radial::GridSpec& g) {
  return {{"n", g.n}, {"rmin", g.r_min}, {"rmax", g.r_max}, {"spacing", radial::to_string(g.spacing)}};
}

inline radial::GridSpec grid_from_json(const Json& j) {
  radial::GridSpec g;
  g.n = j.at("n").get<int>();
  g.r_min = j.at("rmin").get<double>();
  g.r_max = j.at("rmax").get<double>();
  const auto s = j.at("spacing").get<std::string>();
  if (s != "log" && s != "linear") throw ContractError("unknown grid spacing '" + s + "'");
  g.spacing = s == "log" ? radial::Spacing::Log : radial::Spacing::Linear;
  return g;
}

inline Json mixing_json(const scf::MixingSpec& m) {
  return {{"kind", scf::to_string(m.kind)}, {"beta", m.beta}, {"depth", m.depth}};
}

/// The fully resolved configuration, echoed into every document.
inline Json config_json(const RunConfig& c) {
  Json j;
  j["functional"] = c.resolved_functional();
  j["Z"] = c.z;
  j["lambda"] = c.lambda;
  j["lambdas"] = c.lambdas;
  j["jobs"] = c.jobs;
  j["out"] = c.out.generic_string();
  j["dump_orbitals"] = c.dump_orbitals;
  j["input"] = c.input.generic_string();
  j["grid"] = grid_json(c.grid);
  j["scf"] = {{"tol_density", c.scf.tol_density},
              {"tol_energy", c.scf.tol_energy},
              {"max_iter", c.scf.max_iter},
              {"l_max", c.scf.l_max},
              {"shells_per_channel", c.scf.shells_per_channel},
              {"tol_deg", c.scf.tol_deg},
              {"mixing", mixing_json(c.scf.mixing)},
              {"seed_zeta", detail::opt(c.scf.seed_zeta)},
              {"include_nuclear", c.scf.include_nuclear}};
  j["pair"] = {{"tol_residual", c.pair.tol_residual},
               {"tol_energy", c.pair.tol_energy},
               {"max_iter", c.pair.max_iter},
               {"mixing", mixing_json(c.pair.mixing)},
               {"a_min", detail::opt(c.a_min)},
               {"a_max", detail::opt(c.a_max)}};
  j["checker"] = {{"rho_min", c.sample.rho_min},     {"rho_max", c.sample.rho_max},
                  {"n_rho", c.sample.n_rho},         {"kappa_min", c.sample.kappa_min},
                  {"kappa_max", c.sample.kappa_max}, {"n_kappa", c.sample.n_kappa},
                  {"delta_neg", c.sample.delta_neg}};
  return j;
}

inline Json modules_json() {
  Json j;
  for (const auto& [name, v] : kModuleVersions) j[std::string(name)] = v;
  return j;
}

/// Common head of every output document.
inline Json document(const RunConfig& c) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["program"] = "ksatom";
  j["version"] = std::string(kVersion);
  j["modules"] = modules_json();
  j["subcommand"] = to_string(c.subcommand);
  j["config"] = config_json(c);
  return j;
}

inline Json energies_json(const scf::Energies& e) {
  return {{"kinetic", detail::num(e.kinetic)}, {"nuclear", detail::num(e.nuclear)},
          {"hartree", detail::num(e.hartree)}, {"exc", detail::num(e.exc)},
          {"total", detail::num(e.total)}};
}

inline scf::Energies energies_from_json(const Json& j) {
  scf::Energies e;
  e.kinetic = j.at("kinetic").get<double>();
  e.nuclear = j.at("nuclear").get<double>();
  e.hartree = j.at("hartree").get<double>();
  e.exc = j.at("exc").get<double>();
  e.total = j.at("total").get<double>();
  return e;
}

inline Json scf_result_json(const scf::ScfResult& r, const radial::RadialGrid& g) {
  Json j;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["lambda"] = r.config.lambda;
  j["include_nuclear"] = r.config.include_nuclear;
  j["energies"] = energies_json(r.energies);
  j["fermi_level"] = detail::num(r.state.fermi_level);
  j["trace"] = r.state.trace();
  Json shells = Json::array();
  for (const auto& ch : r.state.channels)
    for (const auto& s : ch)
      shells.push_back({{"l", s.l}, {"index", s.index}, {"eigenvalue", detail::num(s.eigenvalue)},
                        {"occupation", s.occupation}});
  j["shells"] = shells;
  Json hist = Json::array();
  for (const auto& h : r.history)
    hist.push_back({{"iteration", h.iteration}, {"residual", detail::num(h.residual)},
                    {"energy", detail::num(h.energy)}, {"fermi_level", detail::num(h.fermi_level)}});
  j["history"] = hist;
  j["notes"] = r.notes;
  j["density"] = {{"r", detail::nodes(g)}, {"rho", detail::array(r.density.rho)}};
  return j;
}

inline Json pair_result_json(const pair::PairResult& r, const radial::RadialGrid& g) {
  Json j;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["epsilon"] = detail::num(r.state.epsilon);
  j["residual"] = detail::num(r.state.residual);
  j["energies"] = energies_json(r.state.energies);
  if (!r.state.a_coeff.empty()) {
    const auto [lo, hi] = std::minmax_element(r.state.a_coeff.begin(), r.state.a_coeff.end());
    j["ellipticity"] = {{"min", *lo}, {"max", *hi}};
  }
  Json hist = Json::array();
  for (const auto& h : r.history)
    hist.push_back({{"iteration", h.iteration}, {"residual", detail::num(h.residual)},
                    {"energy", detail::num(h.energy)}, {"epsilon", detail::num(h.epsilon)}});
  j["history"] = hist;
  j["notes"] = r.notes;
  j["orbital"] = {{"r", detail::nodes(g)}, {"u", detail::array(r.state.u)}};
  return j;
}

inline Json witness_json(const std::optional<checker::Witness>& w) {
  if (!w) return nullptr;
  return {{"rho", detail::num(w->rho)}, {"kappa", detail::num(w->kappa)}, {"value", detail::num(w->value)}};
}

inline Json fit_json(const std::optional<checker::ExponentFit>& f) {
  if (!f) return nullptr;
  return {{"exponent", detail::num(f->exponent)}, {"std_error", detail::num(f->std_error)},
          {"samples", f->samples},                {"lo", f->lo},
          {"hi", f->hi},                          {"conclusive", f->conclusive}};
}

/// condition id -> verdict, witness and detail, plus the fitted exponents.
inline Json condition_report_json(const checker::ConditionReport& rep) {
  auto conditions = [](const std::vector<checker::ConditionResult>& cs) {
    Json j = Json::object();
    for (const auto& c : cs)
      j[c.id] = {{"verdict", checker::to_string(c.verdict)}, {"witness", witness_json(c.witness)}, {"detail", c.detail}};
    return j;
  };
  Json j;
  j["functional"] = rep.functional;
  j["all_pass"] = rep.all_pass();
  j["conditions"] = conditions(rep.conditions);
  j["relaxed"] = conditions(rep.relaxed);
  j["fits"] = {{"alpha", fit_json(rep.alpha)},
               {"beta_minus", fit_json(rep.beta_minus)},
               {"beta_plus", fit_json(rep.beta_plus)},
               {"a", detail::opt(rep.fitted_a)},
               {"b", detail::opt(rep.fitted_b)},
               {"limsup", detail::opt(rep.limsup_estimate)}};
  return j;
}

inline Json estimates_json(const diagnostics::EstimateReport& rep) {
  Json checks = Json::object();
  for (const auto& c : rep.checks)
    checks[c.id] = {{"lhs", detail::num(c.lhs)}, {"rhs", detail::num(c.rhs)}, {"margin", detail::num(c.margin)},
                    {"pass", c.pass}};
  return {{"rank_one", rep.rank_one}, {"trace", rep.trace}, {"all_pass", rep.all_pass()}, {"checks", checks}};
}

inline Json lambda_report_json(const diagnostics::LambdaReport& rep) {
  Json v = Json::array();
  for (const auto& x : rep.violations)
    v.push_back({{"check", x.check}, {"mu", x.mu}, {"lambda", x.lambda}, {"amount", detail::num(x.amount)}});
  return {{"all_pass", rep.all_pass()},
          {"decreasing_atom", rep.decreasing_atom},
          {"decreasing_infinity", rep.decreasing_infinity},
          {"binding", rep.binding},
          {"negative_infinity", rep.negative_infinity},
          {"subadditive", rep.subadditive},
          {"vanishing_limit", rep.vanishing_limit},
          {"bounded_differences", rep.bounded_differences},
          {"lipschitz", detail::num(rep.lipschitz)},
          {"trend_exponent", detail::num(rep.trend_exponent)},
          {"violations", v},
          {"warnings", rep.warnings}};
}

inline Json decay_json(const diagnostics::DecayFit& f) {
  return {{"gamma", detail::num(f.gamma)}, {"r_lo", f.r_lo}, {"r_hi", f.r_hi}, {"r2", detail::num(f.r2)},
          {"samples", f.samples}};
}

inline Json regime_json(const diagnostics::RegimeFlags& f) {
  return {{"inside_theorem_regime", f.inside_theorem_regime}, {"anion_warning", f.anion_warning}};
}

inline std::vector<double> array_from_json(const Json& j) {
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) v.push_back(x.is_null() ? std::nan("") : x.get<double>());
  return v;
}

}  // namespace ksatom::cli

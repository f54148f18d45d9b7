#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ksatom/checker/hypothesis.hpp"
#include "ksatom/errors.hpp"
#include "ksatom/pair/pair.hpp"
#include "ksatom/radial/grid.hpp"
#include "ksatom/scf/scf.hpp"
#include "ksatom/xc/functionals.hpp"

namespace ksatom::cli {

enum class Subcommand { CheckXc, SolveAtom, SolveInfinity, ScanLambda, SolveTwoElectron, Verify };

inline constexpr std::array<std::pair<Subcommand, std::string_view>, 6> kSubcommands = {{
    {Subcommand::CheckXc, "check-xc"},
    {Subcommand::SolveAtom, "solve-atom"},
    {Subcommand::SolveInfinity, "solve-infinity"},
    {Subcommand::ScanLambda, "scan-lambda"},
    {Subcommand::SolveTwoElectron, "solve-two-electron"},
    {Subcommand::Verify, "verify"},
}};

inline std::string to_string(Subcommand s) {
  for (const auto& [k, name] : kSubcommands)
    if (k == s) return std::string(name);
  return "?";
}

inline std::optional<Subcommand> parse_subcommand(std::string_view name) {
  for (const auto& [k, n] : kSubcommands)
    if (n == name) return k;
  return std::nullopt;
}

inline bool is_eks(Subcommand s) {
  return s == Subcommand::SolveAtom || s == Subcommand::SolveInfinity || s == Subcommand::ScanLambda;
}

inline constexpr double kLambdaMax = 8.0;

struct RunConfig {
  Subcommand subcommand = Subcommand::SolveAtom;
  std::optional<std::string> functional;  // unset: pbe for check-xc / two-electron, lda-x+pz81 otherwise
  int z = 2;
  double lambda = 1.0;
  std::vector<double> lambdas{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  radial::GridSpec grid{};
  scf::ScfConfig scf{};
  pair::PairConfig pair{};
  std::optional<double> a_min, a_max;
  checker::SampleSpec sample{};
  int jobs = 1;
  std::filesystem::path out;  // empty: <subcommand>.json
  bool dump_orbitals = false;
  std::filesystem::path input;  // result document read by verify

  std::map<std::string, int> origin;  // key -> line it was last set on (0: flag)

  std::string resolved_functional() const {
    if (functional) return *functional;
    return subcommand == Subcommand::CheckXc || subcommand == Subcommand::SolveTwoElectron ? "pbe" : "lda-x+pz81";
  }
};

namespace detail {

struct BadValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::string as_string(std::string_view v) {
  v = trim(v);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) v = v.substr(1, v.size() - 2);
  return std::string(v);
}

inline double as_double(std::string_view v) {
  const std::string s = as_string(v);
  double x = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(x))
    throw BadValue("expected a finite number, got '" + s + "'");
  return x;
}

inline int as_int(std::string_view v) {
  const std::string s = as_string(v);
  int x = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size())
    throw BadValue("expected an integer, got '" + s + "'");
  return x;
}

inline bool as_bool(std::string_view v) {
  const std::string s = as_string(v);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw BadValue("expected a boolean, got '" + s + "'");
}

inline std::vector<double> as_list(std::string_view v) {
  std::string s = as_string(v);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<double> out;
  std::string_view rest = s;
  while (true) {
    const auto comma = rest.find(',');
    out.push_back(as_double(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

inline double positive(double x) {
  if (!(x > 0.0)) throw BadValue("must be > 0");
  return x;
}

inline int at_least(int x, int lo) {
  if (x < lo) throw BadValue("must be >= " + std::to_string(lo));
  return x;
}

inline double lambda_value(std::string_view v) {
  const double x = as_double(v);
  if (!(x > 0.0 && x <= kLambdaMax)) throw BadValue("lambda must lie in (0, 8]");
  return x;
}

inline double beta_value(std::string_view v) {
  const double b = as_double(v);
  if (!(b > 0.0 && b <= 1.0)) throw BadValue("must lie in (0, 1]");
  return b;
}

inline scf::MixingKind mixing_kind(std::string_view v) {
  const std::string s = as_string(v);
  if (s == "simple") return scf::MixingKind::Simple;
  if (s == "anderson") return scf::MixingKind::Anderson;
  throw BadValue("expected 'simple' or 'anderson', got '" + s + "'");
}

using Setter = void (*)(RunConfig&, std::string_view);

// Keys are "section.key"; top-level keys have no section.
inline const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"functional",
       [](RunConfig& c, std::string_view v) {
         const std::string id = as_string(v);
         try {
           xc::make_functional(id);
         } catch (const ContractError& e) {
           throw BadValue(e.what());
         }
         c.functional = id;
       }},
      {"Z",
       [](RunConfig& c, std::string_view v) {
         const int z = as_int(v);
         if (z < 1) throw BadValue("Z must be a positive integer");
         c.z = z;
       }},
      {"lambda", [](RunConfig& c, std::string_view v) { c.lambda = lambda_value(v); }},
      {"lambdas",
       [](RunConfig& c, std::string_view v) {
         auto l = as_list(v);
         for (double x : l)
           if (!(x > 0.0 && x <= kLambdaMax)) throw BadValue("every lambda must lie in (0, 8]");
         std::sort(l.begin(), l.end());
         if (std::adjacent_find(l.begin(), l.end()) != l.end()) throw BadValue("duplicate lambda");
         c.lambdas = l;
       }},
      {"jobs", [](RunConfig& c, std::string_view v) { c.jobs = at_least(as_int(v), 1); }},
      {"out", [](RunConfig& c, std::string_view v) { c.out = as_string(v); }},
      {"dump_orbitals", [](RunConfig& c, std::string_view v) { c.dump_orbitals = as_bool(v); }},
      {"input", [](RunConfig& c, std::string_view v) { c.input = as_string(v); }},

      {"grid.n", [](RunConfig& c, std::string_view v) { c.grid.n = at_least(as_int(v), 64); }},
      {"grid.rmin", [](RunConfig& c, std::string_view v) { c.grid.r_min = positive(as_double(v)); }},
      {"grid.rmax", [](RunConfig& c, std::string_view v) { c.grid.r_max = positive(as_double(v)); }},
      {"grid.spacing",
       [](RunConfig& c, std::string_view v) {
         const std::string s = as_string(v);
         if (s == "log") c.grid.spacing = radial::Spacing::Log;
         else if (s == "linear") c.grid.spacing = radial::Spacing::Linear;
         else throw BadValue("expected 'log' or 'linear', got '" + s + "'");
       }},

      {"scf.tol_density", [](RunConfig& c, std::string_view v) { c.scf.tol_density = positive(as_double(v)); }},
      {"scf.tol_energy", [](RunConfig& c, std::string_view v) { c.scf.tol_energy = positive(as_double(v)); }},
      {"scf.max_iter", [](RunConfig& c, std::string_view v) { c.scf.max_iter = at_least(as_int(v), 1); }},
      {"scf.l_max", [](RunConfig& c, std::string_view v) { c.scf.l_max = at_least(as_int(v), 0); }},
      {"scf.shells_per_channel",
       [](RunConfig& c, std::string_view v) { c.scf.shells_per_channel = at_least(as_int(v), 1); }},
      {"scf.tol_deg",
       [](RunConfig& c, std::string_view v) {
         const double t = as_double(v);
         if (t < 0.0) throw BadValue("must be >= 0");
         c.scf.tol_deg = t;
       }},
      {"scf.mixing", [](RunConfig& c, std::string_view v) { c.scf.mixing.kind = mixing_kind(v); }},
      {"scf.beta", [](RunConfig& c, std::string_view v) { c.scf.mixing.beta = beta_value(v); }},
      {"scf.depth", [](RunConfig& c, std::string_view v) { c.scf.mixing.depth = at_least(as_int(v), 1); }},
      {"scf.seed_zeta", [](RunConfig& c, std::string_view v) { c.scf.seed_zeta = positive(as_double(v)); }},

      {"pair.tol_residual", [](RunConfig& c, std::string_view v) { c.pair.tol_residual = positive(as_double(v)); }},
      {"pair.tol_energy", [](RunConfig& c, std::string_view v) { c.pair.tol_energy = positive(as_double(v)); }},
      {"pair.max_iter", [](RunConfig& c, std::string_view v) { c.pair.max_iter = at_least(as_int(v), 1); }},
      {"pair.mixing", [](RunConfig& c, std::string_view v) { c.pair.mixing.kind = mixing_kind(v); }},
      {"pair.beta", [](RunConfig& c, std::string_view v) { c.pair.mixing.beta = beta_value(v); }},
      {"pair.depth", [](RunConfig& c, std::string_view v) { c.pair.mixing.depth = at_least(as_int(v), 1); }},
      {"pair.a_min", [](RunConfig& c, std::string_view v) { c.a_min = positive(as_double(v)); }},
      {"pair.a_max", [](RunConfig& c, std::string_view v) { c.a_max = positive(as_double(v)); }},

      {"checker.rho_min", [](RunConfig& c, std::string_view v) { c.sample.rho_min = positive(as_double(v)); }},
      {"checker.rho_max", [](RunConfig& c, std::string_view v) { c.sample.rho_max = positive(as_double(v)); }},
      {"checker.n_rho", [](RunConfig& c, std::string_view v) { c.sample.n_rho = at_least(as_int(v), 64); }},
      {"checker.kappa_min", [](RunConfig& c, std::string_view v) { c.sample.kappa_min = positive(as_double(v)); }},
      {"checker.kappa_max", [](RunConfig& c, std::string_view v) { c.sample.kappa_max = positive(as_double(v)); }},
      {"checker.n_kappa", [](RunConfig& c, std::string_view v) { c.sample.n_kappa = at_least(as_int(v), 64); }},
      {"checker.delta_neg", [](RunConfig& c, std::string_view v) { c.sample.delta_neg = positive(as_double(v)); }},
  };
  return table;
}

}  // namespace detail

/// Sets one key. `line` is the config-file line, 0 for a command-line flag.
inline void apply(RunConfig& cfg, std::string key, std::string_view value, int line) {
  if (key == "z") key = "Z";
  const auto& table = detail::setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError(key, line, "unknown key");
  try {
    it->second(cfg, value);
  } catch (const detail::BadValue& e) {
    throw ConfigError(key, line, e.what());
  }
  cfg.origin[key] = line;
}

struct IniEntry {
  std::string key;  // section-qualified
  std::string value;
  int line = 0;
};

/// `key = value` lines, `[section]` headers, `#` or `;` comments.
inline std::vector<IniEntry> parse_ini(std::istream& in) {
  std::vector<IniEntry> out;
  std::map<std::string, int> seen;
  std::string section, raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = detail::trim(raw);
    char quote = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (quote) {
        if (s[i] == quote) quote = 0;
      } else if (s[i] == '"' || s[i] == '\'') {
        quote = s[i];
      } else if (s[i] == '#' || s[i] == ';') {
        s = detail::trim(s.substr(0, i));
        break;
      }
    }
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("", line, "unterminated section header");
      section = std::string(detail::trim(s.substr(1, s.size() - 2)));
      if (section.empty()) throw ConfigError("", line, "empty section name");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ConfigError("", line, "expected 'key = value'");
    const std::string key = std::string(detail::trim(s.substr(0, eq)));
    if (key.empty()) throw ConfigError("", line, "missing key before '='");
    const std::string full = section.empty() ? key : section + "." + key;
    if (const auto it = seen.find(full); it != seen.end())
      throw ConfigError(full, line, "duplicate key (first set on line " + std::to_string(it->second) + ")");
    seen[full] = line;
    out.push_back({full, std::string(detail::trim(s.substr(eq + 1))), line});
  }
  return out;
}

inline void apply_ini(RunConfig& cfg, std::istream& in) {
  for (const auto& e : parse_ini(in)) apply(cfg, e.key, e.value, e.line);
}

inline void apply_ini_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot open config file " + path.string());
  apply_ini(cfg, in);
}

/// Fills defaults, copies the shared fields into the module configs and
/// validates everything before any numerics run.
inline void resolve(RunConfig& cfg) {
  auto where = [&](const std::string& key) {
    const auto it = cfg.origin.find(key);
    return it == cfg.origin.end() ? 0 : it->second;
  };
  const std::string fid = cfg.resolved_functional();
  const auto f = xc::make_functional(fid);
  if (is_eks(cfg.subcommand) && !xc::is_lda(f))
    throw ConfigError("functional", where("functional"),
                      to_string(cfg.subcommand) + " takes an LDA functional, got '" + fid + "'");
  if (!(cfg.grid.r_max > cfg.grid.r_min)) throw ConfigError("grid.rmax", where("grid.rmax"), "must exceed grid.rmin");
  if (cfg.a_min.has_value() != cfg.a_max.has_value())
    throw ConfigError(cfg.a_min ? "pair.a_max" : "pair.a_min", 0, "pair.a_min and pair.a_max are set together");
  if (cfg.subcommand == Subcommand::Verify && cfg.input.empty())
    throw ConfigError("input", where("input"), "verify needs a result document");

  cfg.functional = fid;
  cfg.scf.functional = fid;
  cfg.scf.z = cfg.z;
  cfg.scf.lambda = cfg.lambda;
  cfg.scf.grid = cfg.grid;
  cfg.scf.include_nuclear = cfg.subcommand != Subcommand::SolveInfinity;
  cfg.pair.functional = fid;
  cfg.pair.z = cfg.z;
  cfg.pair.grid = cfg.grid;
  if (cfg.a_min) cfg.pair.ellipticity = std::array<double, 2>{*cfg.a_min, *cfg.a_max};
  if (cfg.out.empty()) cfg.out = to_string(cfg.subcommand) + ".json";

  try {
    if (is_eks(cfg.subcommand)) cfg.scf.validate();
    if (cfg.subcommand == Subcommand::SolveTwoElectron) cfg.pair.validate();
    if (cfg.subcommand == Subcommand::CheckXc) cfg.sample.validate();
  } catch (const ContractError& e) {
    throw ConfigError("", 0, e.what());
  }
}

}  // namespace ksatom::cli

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ksatom/errors.hpp"

namespace ksatom::radial {

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

struct TwoColumn {
  std::vector<std::string> header;  // without the leading '#'
  std::vector<double> r;
  std::vector<double> value;
};

/// `# header` lines followed by "r value" rows at round-trip precision.
inline std::string format_two_column(const TwoColumn& data) {
  if (data.r.size() != data.value.size()) throw ContractError("two-column dump with mismatched columns");
  std::string out;
  for (const auto& h : data.header) out += "# " + h + "\n";
  char buf[64];
  for (std::size_t i = 0; i < data.r.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", data.r[i], data.value[i]);
    out += buf;
  }
  return out;
}

inline void write_two_column(const std::filesystem::path& path, const TwoColumn& data) {
  write_file_atomic(path, format_two_column(data));
}

inline TwoColumn parse_two_column(std::istream& in) {
  TwoColumn data;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string h = line.substr(1);
      if (!h.empty() && h.front() == ' ') h.erase(0, 1);
      data.header.push_back(h);
      continue;
    }
    std::istringstream row(line);
    double r = 0.0, v = 0.0;
    if (!(row >> r >> v)) throw std::runtime_error("malformed two-column row at line " + std::to_string(lineno));
    data.r.push_back(r);
    data.value.push_back(v);
  }
  return data;
}

inline TwoColumn read_two_column(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_two_column(in);
}

}  // namespace ksatom::radial

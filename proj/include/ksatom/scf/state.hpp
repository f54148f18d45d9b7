#pragma once

#include <vector>

namespace ksatom::scf {

struct Shell {
  int l = 0;
  int index = 0;             // 0-based radial index within the channel
  double eigenvalue = 0.0;   // hartree
  double occupation = 0.0;   // f in [0, 1]
  std::vector<double> u;     // reduced radial orbital on the grid, int u^2 dr = 1
};

/// gamma = sum f |phi><phi| restricted to spherical symmetry: shells grouped by l.
struct DensityOperatorState {
  std::vector<std::vector<Shell>> channels;  // channels[l]
  double lambda = 0.0;
  double fermi_level = 0.0;

  /// Tr gamma = sum (2l+1) f.
  double trace() const {
    double t = 0.0;
    for (const auto& ch : channels)
      for (const auto& s : ch) t += (2 * s.l + 1) * s.occupation;
    return t;
  }

  std::vector<const Shell*> occupied() const {
    std::vector<const Shell*> out;
    for (const auto& ch : channels)
      for (const auto& s : ch)
        if (s.occupation > 0.0) out.push_back(&s);
    return out;
  }
};

struct DensityField {
  std::vector<double> rho;   // bohr^-3
  std::vector<double> grad;  // d rho / dr
};

struct Energies {
  double kinetic = 0.0;  // Tr(-Delta gamma)
  double nuclear = 0.0;  // int rho V
  double hartree = 0.0;  // J(rho)
  double exc = 0.0;      // E_xc(rho)
  double total = 0.0;

  void sum() { total = kinetic + nuclear + hartree + exc; }
};

}  // namespace ksatom::scf

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ksatom/errors.hpp"

namespace ksatom::scf {

struct AufbauResult {
  std::vector<std::vector<double>> occupations;  // same shape as the input eigenvalues
  double fermi_level = 0.0;
};

/// Fills shells (weight 2l+1 for channel l) in increasing eigenvalue order until
/// the trace reaches lambda. The remainder goes uniformly (equal f) to every
/// shell within tol_deg of the frontier eigenvalue; eps_F is that eigenvalue.
inline AufbauResult aufbau_fill(const std::vector<std::vector<double>>& eigvals, double lambda,
                                double tol_deg = 1e-6) {
  if (!(lambda >= 0.0)) throw ContractError("aufbau_fill needs lambda >= 0");
  struct Entry {
    double eps;
    std::size_t l, k;
  };
  std::vector<Entry> shells;
  double capacity = 0.0;
  for (std::size_t l = 0; l < eigvals.size(); ++l)
    for (std::size_t k = 0; k < eigvals[l].size(); ++k) {
      shells.push_back({eigvals[l][k], l, k});
      capacity += static_cast<double>(2 * l + 1);
    }
  const double slack = 1e-12 * std::max(1.0, lambda);
  if (capacity < lambda - slack)
    throw ContractError("aufbau_fill: " + std::to_string(capacity) + " states cannot hold trace " +
                        std::to_string(lambda) + "; increase l_max or shells_per_channel");
  std::stable_sort(shells.begin(), shells.end(), [](const Entry& a, const Entry& b) { return a.eps < b.eps; });

  AufbauResult out;
  out.occupations.resize(eigvals.size());
  for (std::size_t l = 0; l < eigvals.size(); ++l) out.occupations[l].assign(eigvals[l].size(), 0.0);
  out.fermi_level = shells.empty() ? 0.0 : shells.front().eps;

  double remaining = lambda;
  std::size_t i = 0;
  while (i < shells.size() && remaining > slack) {
    // Group of shells degenerate with shells[i].
    std::size_t j = i;
    double weight = 0.0;
    while (j < shells.size() && shells[j].eps <= shells[i].eps + tol_deg) {
      weight += static_cast<double>(2 * shells[j].l + 1);
      ++j;
    }
    const double f = remaining >= weight - slack ? 1.0 : remaining / weight;
    for (std::size_t m = i; m < j; ++m) out.occupations[shells[m].l][shells[m].k] = f;
    remaining -= f * weight;
    out.fermi_level = shells[i].eps;
    i = j;
  }
  return out;
}

}  // namespace ksatom::scf

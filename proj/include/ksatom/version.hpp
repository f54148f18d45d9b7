#pragma once

#include <array>
#include <string_view>
#include <utility>

namespace ksatom {

inline constexpr std::string_view kVersion = "0.1.0";

// Bumped whenever a module's numerical output changes for the same input.
inline constexpr std::array<std::pair<std::string_view, int>, 7> kModuleVersions = {{
    {"xc_models", 1},
    {"hypothesis_checker", 1},
    {"radial_core", 1},
    {"eks_scf", 1},
    {"gga_pair", 1},
    {"diagnostics", 1},
    {"cli", 1},
}};

}  // namespace ksatom

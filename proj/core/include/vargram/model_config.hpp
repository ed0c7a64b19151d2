#pragma once

#include "vargram/mass_action.hpp"
#include "vargram/model.hpp"

#include <filesystem>
#include <string>

namespace vargram {

// Build a SystemModel from a JSON model spec. Schema, by "kind":
//   {"kind": "lti",         "a": [[...]], "c": [[...]]}
//   {"kind": "lorenz63",    "sigma": 10, "rho": 28, "beta": 2.6667}   (all optional)
//   {"kind": "mass_action", "theta": [[...]],
//                           "reactions": [{"reactants": [[i, order], ...], "rate": k}, ...],
//                           "species_names": [...], "domain": {"lo": [...], "hi": [...]}}
// Matrices are row-major lists of rows. Validation failures throw
// ConfigError naming the offending field path.
SystemModel load_model(const std::filesystem::path& path);
SystemModel load_model_from_json_text(const std::string& text, const std::string& origin = "<inline>");

// Parse just the mass-action payload (used by tools that need the network,
// not the wrapped model).
MassActionNetwork load_mass_action(const std::filesystem::path& path);

} // namespace vargram

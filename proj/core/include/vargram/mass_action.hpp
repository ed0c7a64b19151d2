#pragma once

#include "vargram/model.hpp"
#include "vargram/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace vargram {

// One elementary reaction: rate = k * prod_i x_i^order_i over the listed
// reactant species. Orders are small nonnegative integers.
struct Reaction {
    std::vector<std::pair<Index, int>> reactants; // (species index, order)
    double rate = 0.0;
};

// A chemical reaction network with polynomial (mass-action) kinetics:
//   dx/dt = theta * psi(x),  psi_j(x) = k_j * prod_i x_i^{order_ij}.
// theta is the n_species x n_reactions stoichiometry matrix.
struct MassActionNetwork {
    Matrix theta;
    std::vector<Reaction> reactions;
    std::vector<std::string> species_names;
    std::optional<DomainBox> domain;
    std::string name;

    Index n_species() const { return theta.rows(); }
    Index n_reactions() const { return theta.cols(); }

    // Throws ConfigError on shape mismatches, out-of-range species indices,
    // negative orders, or nonpositive rate constants.
    void validate() const;
};

// Reaction rate vector psi(x).
Vector eval_rates(const MassActionNetwork& net, const Vector& x);

// State derivative theta * psi(x).
Vector eval_mass_action(const MassActionNetwork& net, const Vector& x);

// Analytic Jacobian of theta * psi(x). A factor x^(order-1) with order = 1
// contributes 1 even at x = 0 (the 0 * x^-1 := 0 convention applies only to
// genuinely vanishing terms).
Matrix jacobian_mass_action(const MassActionNetwork& net, const Vector& x);

// Wrap a network as a SystemModel with identity output (every species
// concentration is individually measurable, so sensors sit on nodes).
SystemModel make_mass_action(MassActionNetwork net);

// The three-species cycle A -> B -> C -> A with rates (1, 2, 3).
MassActionNetwork make_cycle3();

// A randomized sparse network for scalability checks: n_reactions unary or
// binary reactions over n_species states, conservative stoichiometry,
// rates log-uniform in [0.05, 5]. Deterministic in the seed.
MassActionNetwork make_random_network(Index n_species, Index n_reactions, std::uint64_t seed);

// Serialize a network to the model-spec JSON schema understood by
// load_model (kind = "mass_action").
std::string to_model_json(const MassActionNetwork& net);

} // namespace vargram

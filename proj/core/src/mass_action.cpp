#include "vargram/mass_action.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <memory>
#include <random>
#include <utility>

namespace vargram {

namespace {

// integer power by repeated multiplication keeps results bit-identical
// across platforms (std::pow may route through exp/log)
double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

} // namespace

void MassActionNetwork::validate() const {
    const Index ns = n_species();
    const Index nr = n_reactions();
    if (ns == 0 || nr == 0)
        throw ConfigError("mass_action: empty network (theta is " + std::to_string(ns) + "x" +
                          std::to_string(nr) + ")");
    if (static_cast<Index>(reactions.size()) != nr)
        throw ConfigError("mass_action.reactions: " + std::to_string(reactions.size()) +
                          " entries, expected " + std::to_string(nr) + " (theta columns)");
    for (Index j = 0; j < nr; ++j) {
        const Reaction& r = reactions[static_cast<std::size_t>(j)];
        if (!(r.rate > 0.0) || !std::isfinite(r.rate))
            throw ConfigError("mass_action.reactions[" + std::to_string(j) +
                              "].rate: must be positive and finite");
        for (const auto& [species, order] : r.reactants) {
            if (species < 0 || species >= ns)
                throw ConfigError("mass_action.reactions[" + std::to_string(j) +
                                  "]: species index " + std::to_string(species) +
                                  " out of range [0," + std::to_string(ns - 1) + "]");
            if (order < 0)
                throw ConfigError("mass_action.reactions[" + std::to_string(j) +
                                  "]: negative order " + std::to_string(order));
        }
    }
    if (!species_names.empty() && static_cast<Index>(species_names.size()) != ns)
        throw ConfigError("mass_action.species_names: " + std::to_string(species_names.size()) +
                          " entries, expected " + std::to_string(ns));
    if (domain && (domain->lo.size() != ns || domain->hi.size() != ns))
        throw ConfigError("mass_action.domain: bounds must have " + std::to_string(ns) +
                          " entries");
}

Vector eval_rates(const MassActionNetwork& net, const Vector& x) {
    Vector psi(net.n_reactions());
    for (Index j = 0; j < net.n_reactions(); ++j) {
        const Reaction& r = net.reactions[static_cast<std::size_t>(j)];
        double v = r.rate;
        for (const auto& [species, order] : r.reactants) v *= ipow(x(species), order);
        psi(j) = v;
    }
    return psi;
}

Vector eval_mass_action(const MassActionNetwork& net, const Vector& x) {
    return net.theta * eval_rates(net, x);
}

Matrix jacobian_mass_action(const MassActionNetwork& net, const Vector& x) {
    // d psi_j / d x_m = k_j * order_m * x_m^(order_m - 1) * prod_{i != m} x_i^order_i
    Matrix dpsi = Matrix::Zero(net.n_reactions(), net.n_species());
    for (Index j = 0; j < net.n_reactions(); ++j) {
        const Reaction& r = net.reactions[static_cast<std::size_t>(j)];
        for (std::size_t m = 0; m < r.reactants.size(); ++m) {
            const auto [species_m, order_m] = r.reactants[m];
            if (order_m == 0) continue; // exponent zero: no dependence, 0 * x^-1 := 0
            double d = r.rate * order_m * ipow(x(species_m), order_m - 1);
            for (std::size_t i = 0; i < r.reactants.size(); ++i) {
                if (i == m) continue;
                const auto [species_i, order_i] = r.reactants[i];
                d *= ipow(x(species_i), order_i);
            }
            dpsi(j, species_m) += d;
        }
    }
    return net.theta * dpsi;
}

SystemModel make_mass_action(MassActionNetwork net) {
    net.validate();
    auto shared = std::make_shared<const MassActionNetwork>(std::move(net));

    SystemModel m;
    m.n_x = shared->n_species();
    m.n_y = shared->n_species();
    m.f = [shared](const Vector& x) -> Vector { return eval_mass_action(*shared, x); };
    m.jac_f = [shared](const Vector& x) -> Matrix { return jacobian_mass_action(*shared, x); };
    m.h = [](const Vector& x) -> Vector { return x; };
    m.jac_h = [](const Vector& x) -> Matrix {
        return Matrix::Identity(x.size(), x.size());
    };
    m.domain = shared->domain;
    m.name = shared->name.empty() ? "mass_action" : shared->name;
    return m;
}

MassActionNetwork make_cycle3() {
    MassActionNetwork net;
    net.theta.resize(3, 3);
    // A -> B, B -> C, C -> A
    net.theta << -1, 0, 1,
                  1, -1, 0,
                  0, 1, -1;
    net.reactions = {
        Reaction{{{0, 1}}, 1.0},
        Reaction{{{1, 1}}, 2.0},
        Reaction{{{2, 1}}, 3.0},
    };
    net.species_names = {"A", "B", "C"};
    net.name = "cycle3";
    return net;
}

MassActionNetwork make_random_network(Index n_species, Index n_reactions, std::uint64_t seed) {
    if (n_species < 2) throw ConfigError("make_random_network: need at least 2 species");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> pick(0, n_species - 1);
    std::uniform_real_distribution<double> logk(std::log(0.05), std::log(5.0));
    std::bernoulli_distribution binary(0.6);

    MassActionNetwork net;
    net.theta = Matrix::Zero(n_species, n_reactions);
    net.reactions.reserve(static_cast<std::size_t>(n_reactions));
    for (Index j = 0; j < n_reactions; ++j) {
        Reaction r;
        r.rate = std::exp(logk(rng));
        Index s1 = pick(rng);
        Index product = pick(rng);
        while (product == s1) product = pick(rng);
        if (binary(rng)) {
            // s1 + s2 -> product + s2' with conservative stoichiometry
            Index s2 = pick(rng);
            while (s2 == s1) s2 = pick(rng);
            r.reactants = {{s1, 1}, {s2, 1}};
            net.theta(s1, j) -= 1;
            net.theta(product, j) += 1;
        } else {
            r.reactants = {{s1, 1}};
            net.theta(s1, j) -= 1;
            net.theta(product, j) += 1;
        }
        net.reactions.push_back(std::move(r));
    }
    net.name = "random_network";
    return net;
}

std::string to_model_json(const MassActionNetwork& net) {
    nlohmann::ordered_json j;
    j["kind"] = "mass_action";
    if (!net.name.empty()) j["name"] = net.name;
    auto theta = nlohmann::ordered_json::array();
    for (Index i = 0; i < net.theta.rows(); ++i) {
        auto row = nlohmann::ordered_json::array();
        for (Index c = 0; c < net.theta.cols(); ++c) row.push_back(net.theta(i, c));
        theta.push_back(std::move(row));
    }
    j["theta"] = std::move(theta);
    auto reactions = nlohmann::ordered_json::array();
    for (const Reaction& r : net.reactions) {
        nlohmann::ordered_json rj;
        auto reactants = nlohmann::ordered_json::array();
        for (const auto& [species, order] : r.reactants)
            reactants.push_back(nlohmann::ordered_json::array({species, order}));
        rj["reactants"] = std::move(reactants);
        rj["rate"] = r.rate;
        reactions.push_back(std::move(rj));
    }
    j["reactions"] = std::move(reactions);
    if (!net.species_names.empty()) j["species_names"] = net.species_names;
    if (net.domain) {
        std::vector<double> lo(net.domain->lo.begin(), net.domain->lo.end());
        std::vector<double> hi(net.domain->hi.begin(), net.domain->hi.end());
        j["domain"] = {{"lo", lo}, {"hi", hi}};
    }
    return j.dump(2);
}

} // namespace vargram

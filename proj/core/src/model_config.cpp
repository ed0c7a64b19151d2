#include "vargram/model_config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace vargram {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& msg) {
    throw ConfigError(origin + ": " + msg);
}

json parse(const std::string& text, const std::string& origin) {
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) fail(origin, "not valid JSON");
    return j;
}

Matrix read_matrix(const json& j, const std::string& origin, const std::string& field) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        fail(origin, field + ": expected a non-empty list of rows");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = static_cast<Index>(j.front().size());
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols)
            fail(origin, field + "[" + std::to_string(r) + "]: row length " +
                             std::to_string(row.size()) + " != " + std::to_string(cols));
        for (Index c = 0; c < cols; ++c) {
            const json& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number())
                fail(origin, field + "[" + std::to_string(r) + "][" + std::to_string(c) +
                                 "]: expected a number");
            m(r, c) = v.get<double>();
        }
    }
    return m;
}

Vector read_vector(const json& j, const std::string& origin, const std::string& field) {
    if (!j.is_array() || j.empty())
        fail(origin, field + ": expected a non-empty array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            fail(origin, field + "[" + std::to_string(i) + "]: expected a number");
        v(static_cast<Index>(i)) = j[i].get<double>();
    }
    return v;
}

double read_number(const json& j, const std::string& origin, const std::string& field,
                   double fallback) {
    if (!j.contains(field)) return fallback;
    if (!j[field].is_number()) fail(origin, field + ": expected a number");
    return j[field].get<double>();
}

MassActionNetwork parse_mass_action(const json& j, const std::string& origin) {
    MassActionNetwork net;
    if (!j.contains("theta")) fail(origin, "mass_action: missing required field theta");
    net.theta = read_matrix(j["theta"], origin, "theta");

    if (!j.contains("reactions") || !j["reactions"].is_array())
        fail(origin, "mass_action: missing required array reactions");
    for (std::size_t r = 0; r < j["reactions"].size(); ++r) {
        const json& rj = j["reactions"][r];
        const std::string where = "reactions[" + std::to_string(r) + "]";
        if (!rj.is_object()) fail(origin, where + ": expected an object");
        Reaction reaction;
        if (!rj.contains("rate") || !rj["rate"].is_number())
            fail(origin, where + ".rate: expected a number");
        reaction.rate = rj["rate"].get<double>();
        if (!rj.contains("reactants") || !rj["reactants"].is_array())
            fail(origin, where + ".reactants: expected an array of [species, order] pairs");
        for (const json& p : rj["reactants"]) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
                !p[1].is_number_integer())
                fail(origin, where + ".reactants: entries must be [species, order] integer pairs");
            reaction.reactants.emplace_back(p[0].get<Index>(), p[1].get<int>());
        }
        net.reactions.push_back(std::move(reaction));
    }

    if (j.contains("species_names")) {
        if (!j["species_names"].is_array())
            fail(origin, "species_names: expected an array of strings");
        for (const json& s : j["species_names"]) {
            if (!s.is_string()) fail(origin, "species_names: expected an array of strings");
            net.species_names.push_back(s.get<std::string>());
        }
    }
    if (j.contains("domain")) {
        const json& d = j["domain"];
        if (!d.is_object() || !d.contains("lo") || !d.contains("hi"))
            fail(origin, "domain: expected an object with lo and hi arrays");
        DomainBox box;
        box.lo = read_vector(d["lo"], origin, "domain.lo");
        box.hi = read_vector(d["hi"], origin, "domain.hi");
        net.domain = std::move(box);
    }
    if (j.contains("name")) net.name = j["name"].get<std::string>();

    try {
        net.validate();
    } catch (const ConfigError& e) {
        fail(origin, e.what());
    }
    return net;
}

} // namespace

SystemModel load_model_from_json_text(const std::string& text, const std::string& origin) {
    json j = parse(text, origin);
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        fail(origin, "missing required string field kind");
    const std::string kind = j["kind"].get<std::string>();

    if (kind == "lti") {
        if (!j.contains("a")) fail(origin, "lti: missing required field a");
        if (!j.contains("c")) fail(origin, "lti: missing required field c");
        Matrix a = read_matrix(j["a"], origin, "a");
        Matrix c = read_matrix(j["c"], origin, "c");
        try {
            return make_linear(a, c);
        } catch (const ConfigError& e) {
            fail(origin, e.what());
        }
    }
    if (kind == "lorenz63") {
        const double sigma = read_number(j, origin, "sigma", 10.0);
        const double rho = read_number(j, origin, "rho", 28.0);
        const double beta = read_number(j, origin, "beta", 8.0 / 3.0);
        return make_lorenz63(sigma, rho, beta);
    }
    if (kind == "mass_action") {
        return make_mass_action(parse_mass_action(j, origin));
    }
    fail(origin, "unknown model kind \"" + kind + "\" (expected lti, lorenz63, or mass_action)");
}

SystemModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open model spec");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_model_from_json_text(ss.str(), path.string());
}

MassActionNetwork load_mass_action(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open model spec");
    std::ostringstream ss;
    ss << in.rdbuf();
    json j = parse(ss.str(), path.string());
    if (!j.is_object() || j.value("kind", "") != "mass_action")
        throw ConfigError(path.string() + ": not a mass_action model spec");
    return parse_mass_action(j, path.string());
}

} // namespace vargram

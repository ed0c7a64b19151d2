#include <doctest.h>

#include <random>
#include <string>

#include "support/oracles.hpp"

using namespace vargram;
using oracles::max_abs_diff;

namespace {

// asserts that fn throws ConfigError whose message mentions `needle`
template <typename Fn>
void expect_config_error(Fn&& fn, const std::string& needle) {
    try {
        fn();
        FAIL_CHECK("expected ConfigError mentioning \"" << needle << "\"");
    } catch (const ConfigError& e) {
        CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos,
                      "message was: " << e.what());
    }
}

} // namespace

TEST_CASE("linear model evaluates a*x and c*x with matching jacobians") {
    Matrix a(2, 2), c(1, 2);
    a << -0.5, 0.2, 0.0, -0.8;
    c << 1.0, 0.0;
    const SystemModel m = make_linear(a, c);
    CHECK(m.n_x == 2);
    CHECK(m.n_y == 1);

    Vector x(2);
    x << 3.0, -1.0;
    CHECK((m.f(x) - a * x).norm() == doctest::Approx(0.0));
    CHECK((m.h(x) - c * x).norm() == doctest::Approx(0.0));
    CHECK(max_abs_diff(m.jac_f(x), a) == 0.0);
    CHECK(max_abs_diff(m.jac_h(x), c) == 0.0);
}

TEST_CASE("linear model rejects mismatched dimensions") {
    Matrix a(2, 3), c(1, 2);
    a.setZero();
    c.setZero();
    CHECK_THROWS_AS((void)make_linear(a, c), ConfigError);
    Matrix a2 = Matrix::Identity(2, 2), c2(1, 3);
    c2.setZero();
    CHECK_THROWS_AS((void)make_linear(a2, c2), ConfigError);
}

TEST_CASE("lorenz63 vector field and jacobian at fixed points") {
    const SystemModel m = make_lorenz63();
    CHECK(m.n_x == 3);
    CHECK(m.n_y == 3);

    Vector x(3);
    x << 1.0, 1.0, 1.0;
    const Vector fx = m.f(x);
    CHECK(fx(0) == doctest::Approx(0.0));
    CHECK(fx(1) == doctest::Approx(26.0));
    CHECK(fx(2) == doctest::Approx(1.0 - 8.0 / 3.0));

    Vector p(3);
    p << 1.0, 2.0, 3.0;
    Matrix expected(3, 3);
    expected << -10.0, 10.0, 0.0,
                 28.0 - 3.0, -1.0, -1.0,
                 2.0, 1.0, -8.0 / 3.0;
    CHECK(max_abs_diff(m.jac_f(p), expected) == doctest::Approx(0.0));

    // full-state output by default
    CHECK((m.h(p) - p).norm() == 0.0);
    CHECK(max_abs_diff(m.jac_h(p), Matrix::Identity(3, 3)) == 0.0);
}

TEST_CASE("analytic jacobians agree with central differences") {
    const SystemModel lorenz = make_lorenz63();
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 5; ++trial) {
        Vector x(3);
        for (Index i = 0; i < 3; ++i) x(i) = u(rng);
        const Matrix fd = fd_jacobian(lorenz.f, x);
        CHECK(max_abs_diff(lorenz.jac_f(x), fd) < 1e-6);
    }
}

TEST_CASE("identity output wrapper replaces the output map") {
    Matrix a = Matrix::Identity(2, 2), c(1, 2);
    c << 1.0, 1.0;
    SystemModel m = with_identity_output(make_linear(a, c));
    CHECK(m.n_y == 2);
    Vector x(2);
    x << 4.0, 5.0;
    CHECK((m.h(x) - x).norm() == 0.0);
    CHECK(max_abs_diff(m.jac_h(x), Matrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("cycle3 network evaluates its closed forms") {
    const MassActionNetwork net = make_cycle3();
    const SystemModel m = make_mass_action(net);
    CHECK(m.n_x == 3);

    Vector x(3);
    x << 1.0, 1.0, 1.0;
    const Vector fx = m.f(x);
    CHECK(fx(0) == doctest::Approx(2.0));   // -1*1 + 3*1
    CHECK(fx(1) == doctest::Approx(-1.0));  // 1*1 - 2*1
    CHECK(fx(2) == doctest::Approx(-1.0));  // 2*1 - 3*1

    Vector p(3);
    p << 1.0, 2.0, 3.0;
    Matrix expected(3, 3);
    expected << -1.0, 0.0, 3.0,
                 1.0, -2.0, 0.0,
                 0.0, 2.0, -3.0;
    CHECK(max_abs_diff(m.jac_f(p), expected) == doctest::Approx(0.0));
}

TEST_CASE("cycle3 conserves total mass") {
    const MassActionNetwork net = make_cycle3();
    CHECK((net.theta.colwise().sum()).cwiseAbs().maxCoeff() == 0.0);

    const SystemModel m = make_mass_action(net);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.1, 4.0);
    for (int trial = 0; trial < 5; ++trial) {
        Vector x(3);
        for (Index i = 0; i < 3; ++i) x(i) = u(rng);
        CHECK(std::abs(m.f(x).sum()) < 1e-14);
    }
}

TEST_CASE("mass action jacobian handles repeated species and zero states") {
    // 2A -> B plus A -> B, so d f / d a must blend both orders
    MassActionNetwork net;
    net.theta.resize(2, 2);
    net.theta << -2, -1,
                  1, 1;
    net.reactions = {Reaction{{{0, 2}}, 3.0}, Reaction{{{0, 1}}, 0.5}};
    net.validate();

    Vector x(2);
    x << 2.0, 1.0;
    // f_a = -2*3*a^2 - 0.5*a, d/da = -12a - 0.5
    const Matrix j = jacobian_mass_action(net, x);
    CHECK(j(0, 0) == doctest::Approx(-12.0 * 2.0 - 0.5));
    CHECK(j(1, 0) == doctest::Approx(6.0 * 2.0 + 0.5));
    CHECK(j(0, 1) == 0.0);

    // at a = 0 the quadratic contribution vanishes but the linear one stays
    x << 0.0, 1.0;
    const Matrix j0 = jacobian_mass_action(net, x);
    CHECK(j0(0, 0) == doctest::Approx(-0.5));
    CHECK(j0.allFinite());
}

TEST_CASE("random networks are reproducible and consistent with differences") {
    const MassActionNetwork n1 = make_random_network(5, 8, 123);
    const MassActionNetwork n2 = make_random_network(5, 8, 123);
    CHECK(to_model_json(n1) == to_model_json(n2));
    const MassActionNetwork n3 = make_random_network(5, 8, 124);
    CHECK(to_model_json(n1) != to_model_json(n3));

    n1.validate();
    const SystemModel m = make_mass_action(n1);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    Vector x(5);
    for (Index i = 0; i < 5; ++i) x(i) = u(rng);
    CHECK(max_abs_diff(m.jac_f(x), fd_jacobian(m.f, x)) < 1e-6);
}

TEST_CASE("network validation points at the offending field") {
    MassActionNetwork net = make_cycle3();
    net.reactions[1].rate = -2.0;
    expect_config_error([&] { net.validate(); }, "reactions[1].rate");

    MassActionNetwork bad_species = make_cycle3();
    bad_species.reactions[2].reactants = {{7, 1}};
    expect_config_error([&] { bad_species.validate(); }, "out of range");

    MassActionNetwork short_names = make_cycle3();
    short_names.species_names = {"A"};
    expect_config_error([&] { short_names.validate(); }, "species_names");
}

TEST_CASE("bundled model files load with the right shapes") {
    const SystemModel lti = load_model(oracles::config_path("models/lti_smoke.json").string());
    CHECK(lti.n_x == 2);
    CHECK(lti.n_y == 2);

    const SystemModel lorenz = load_model(oracles::config_path("models/lorenz63.json").string());
    CHECK(lorenz.n_x == 3);
    Vector ones = Vector::Ones(3);
    CHECK(lorenz.f(ones)(1) == doctest::Approx(26.0));

    const SystemModel h2o2 =
        load_model(oracles::config_path("models/h2o2_surrogate.json").string());
    CHECK(h2o2.n_x == 9);
    CHECK(h2o2.n_y == 9);
    CHECK(h2o2.domain.has_value());
}

TEST_CASE("bundled cycle3 file matches the built-in network") {
    const MassActionNetwork from_file =
        load_mass_action(oracles::config_path("models/cycle3.json").string());
    const MassActionNetwork built_in = make_cycle3();
    CHECK(max_abs_diff(from_file.theta, built_in.theta) == 0.0);
    REQUIRE(from_file.reactions.size() == built_in.reactions.size());
    for (std::size_t j = 0; j < built_in.reactions.size(); ++j) {
        CHECK(from_file.reactions[j].rate == built_in.reactions[j].rate);
        CHECK(from_file.reactions[j].reactants == built_in.reactions[j].reactants);
    }
}

TEST_CASE("the inert species in the bundled h2o2 network stays decoupled") {
    const MassActionNetwork net =
        load_mass_action(oracles::config_path("models/h2o2_surrogate.json").string());
    const Index inert = 8;
    CHECK(net.theta.row(inert).cwiseAbs().maxCoeff() == 0.0);
    for (const Reaction& r : net.reactions)
        for (const auto& [species, order] : r.reactants) CHECK(species != inert);
}

TEST_CASE("model json parsing reports precise errors") {
    expect_config_error(
        [] { (void)load_model_from_json_text(R"({"kind":"pendulum"})"); },
        "unknown model kind");
    expect_config_error(
        [] {
            (void)load_model_from_json_text(
                R"({"kind":"lti","a":[[1,2]],"c":[[1,0]]})");
        },
        "must be square");
    expect_config_error([] { (void)load_model_from_json_text("{not json"); },
                        "valid JSON");
    expect_config_error([] { (void)load_model("/nonexistent/model.json"); },
                        "nonexistent");
}

TEST_CASE("lorenz63 parameters come from the file") {
    const SystemModel m = load_model_from_json_text(
        R"({"kind":"lorenz63","sigma":2.0,"rho":3.0,"beta":1.0})");
    Vector x(3);
    x << 1.0, 5.0, 0.0;
    const Vector fx = m.f(x);
    CHECK(fx(0) == doctest::Approx(2.0 * (5.0 - 1.0)));
    CHECK(fx(1) == doctest::Approx(1.0 * (3.0 - 0.0) - 5.0));
    CHECK(fx(2) == doctest::Approx(1.0 * 5.0 - 1.0 * 0.0));
}

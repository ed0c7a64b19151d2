#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "support/oracles.hpp"

using namespace vargram;

namespace {

// transitions for a constant per-step factor, phi accumulated explicitly
std::vector<VariationalTransition> constant_factor_chain(const Matrix& factor, Index n) {
    std::vector<VariationalTransition> phis;
    const Index d = factor.rows();
    Matrix phi = Matrix::Identity(d, d);
    phis.push_back({phi, Matrix::Identity(d, d), 0});
    for (Index k = 1; k <= n; ++k) {
        phi = (factor * phi).eval();
        phis.push_back({phi, factor, k});
    }
    return phis;
}

} // namespace

TEST_CASE("constant diagonal factors give their log rates exactly") {
    Matrix factor = Matrix::Zero(2, 2);
    factor(0, 0) = std::exp(0.3);
    factor(1, 1) = std::exp(-0.2);
    const auto phis = constant_factor_chain(factor, 40);

    for (const auto mode : {LyapunovMode::direct, LyapunovMode::stabilized}) {
        const LyapunovSpectrum s = lyapunov_spectrum(phis, mode);
        CHECK(s.horizon == 40);
        CHECK(s.exponents(0) == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(s.exponents(1) == doctest::Approx(-0.2).epsilon(1e-12));
        CHECK(s.mle == s.exponents(0));
        CHECK_FALSE(s.degenerate);
    }
}

TEST_CASE("exponents are sorted descending even when factors are not") {
    Matrix factor = Matrix::Zero(3, 3);
    factor(0, 0) = std::exp(-1.0);
    factor(1, 1) = std::exp(0.5);
    factor(2, 2) = std::exp(-0.1);
    const auto phis = constant_factor_chain(factor, 25);
    const LyapunovSpectrum s = lyapunov_spectrum(phis);
    CHECK(s.exponents(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.exponents(1) == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(s.exponents(2) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("rotations have zero exponents under both modes") {
    const double angle = 0.7;
    Matrix rot(2, 2);
    rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    const auto phis = constant_factor_chain(rot, 60);
    for (const auto mode : {LyapunovMode::direct, LyapunovMode::stabilized}) {
        const LyapunovSpectrum s = lyapunov_spectrum(phis, mode);
        CHECK(std::abs(s.exponents(0)) < 1e-12);
        CHECK(std::abs(s.exponents(1)) < 1e-12);
    }
}

TEST_CASE("stabilized mode survives products the direct mode cannot hold") {
    // decay e^{-2.5} per step over 300 steps shrinks below the smallest
    // denormal (e^{-750}), while the growing direction stays representable
    Matrix factor = Matrix::Zero(2, 2);
    factor(0, 0) = std::exp(0.5);
    factor(1, 1) = std::exp(-2.5);
    const auto phis = constant_factor_chain(factor, 300);
    CHECK(phis.back().phi(1, 1) == 0.0); // the product genuinely underflowed

    const LyapunovSpectrum direct = lyapunov_spectrum(phis, LyapunovMode::direct);
    // sigma_min of the final product underflows, so the direct route loses
    // the contracting exponent entirely
    CHECK(direct.exponents(1) == -std::numeric_limits<double>::infinity());
    CHECK(direct.degenerate);

    const LyapunovSpectrum stab = lyapunov_spectrum(phis, LyapunovMode::stabilized);
    CHECK(stab.exponents(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(stab.exponents(1) == doctest::Approx(-2.5).epsilon(1e-12));
    CHECK_FALSE(stab.degenerate);

    // the automatic pick must land on the stabilized result
    const LyapunovSpectrum picked = lyapunov_spectrum(phis);
    CHECK(picked.mode_used == LyapunovMode::stabilized);
    CHECK(picked.exponents(1) == doctest::Approx(-2.5).epsilon(1e-12));
}

TEST_CASE("streamed spectrum equals the in-memory stabilized spectrum") {
    const SystemModel m = make_lorenz63();
    IrkConfig cfg;
    cfg.step_size = 0.01;
    Vector x0(3);
    x0 << 1.0, 1.0, 1.0;
    const Index n = 200;

    const Trajectory traj = simulate(m, x0, n, cfg);
    const auto phis = propagate_variational(m, traj, cfg);
    const LyapunovSpectrum stored = lyapunov_spectrum(phis, LyapunovMode::stabilized, x0);
    const LyapunovSpectrum streamed = lyapunov_spectrum_streamed(m, x0, n, cfg);

    CHECK(streamed.horizon == stored.horizon);
    CHECK((streamed.exponents - stored.exponents).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(streamed.mode_used == LyapunovMode::stabilized);
}

TEST_CASE("volume identity ties the final deformation to the exponent sum") {
    // contracting isotropic chain: phi per step is e^{-0.1} I in two states,
    // so after ten steps both routes must give exactly -4
    Matrix factor = std::exp(-0.1) * Matrix::Identity(2, 2);
    const auto phis = constant_factor_chain(factor, 10);
    const LogdetLeReport rep = logdet_le_relation(phis, 11);
    CHECK(rep.logdet_final_deformation == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK(rep.two_n_sum_le == doctest::Approx(-4.0).epsilon(1e-12));
    // the full horizon sum is a different object; only its gap is reported
    CHECK(rep.logdet_full_sum > rep.logdet_final_deformation);
    CHECK(rep.full_sum_gap == doctest::Approx(rep.logdet_full_sum - rep.two_n_sum_le));
}

TEST_CASE("volume identity holds along a chaotic trajectory") {
    const SystemModel m = make_lorenz63();
    IrkConfig cfg;
    cfg.step_size = 0.01;
    Vector x0(3);
    x0 << 1.0, 1.0, 1.0;
    const Trajectory traj = simulate(m, x0, 100, cfg);
    const auto phis = propagate_variational(m, traj, cfg);
    const LogdetLeReport rep = logdet_le_relation(phis, static_cast<Index>(phis.size()));
    CHECK(rep.logdet_final_deformation ==
          doctest::Approx(rep.two_n_sum_le).epsilon(1e-9));
}

TEST_CASE("verdict separates contracting from expanding scalar dynamics") {
    // factor a < 1: gramian eigenvalue sum stays far below 2N
    {
        const auto phis = constant_factor_chain(Matrix::Constant(1, 1, 0.5), 20);
        Matrix g = Matrix::Zero(1, 1);
        for (Index k = 0; k < 20; ++k) g += phis[k].phi.transpose() * phis[k].phi;
        Gramian gram;
        gram.matrix = g;
        gram.kind = GramianKind::variational;
        gram.horizon = 20;
        gram.base_state = Vector::Zero(1);
        const LyapunovSpectrum s = lyapunov_spectrum(phis);
        const ObservabilityVerdict v = observability_verdict(gram, s);
        CHECK(v.spectral_value < 1.0);
        CHECK(v.rank == 1);
        CHECK(v.observable);
        CHECK(v.lambda_max == doctest::Approx(4.0 / 3.0).epsilon(1e-3));
        CHECK(v.growth_rate < 1.0085);
    }
    // factor a > 1: the gramian top eigenvalue outruns the horizon scale
    {
        const auto phis = constant_factor_chain(Matrix::Constant(1, 1, 1.3), 20);
        Matrix g = Matrix::Zero(1, 1);
        for (Index k = 0; k < 20; ++k) g += phis[k].phi.transpose() * phis[k].phi;
        Gramian gram;
        gram.matrix = g;
        gram.kind = GramianKind::variational;
        gram.horizon = 20;
        gram.base_state = Vector::Zero(1);
        const ObservabilityVerdict v = observability_verdict(gram, lyapunov_spectrum(phis));
        CHECK(v.spectral_value > 1.0);
        CHECK_FALSE(v.observable);
    }
}

TEST_CASE("verdict flags rank deficiency regardless of spectral size") {
    // two decoupled contracting states, but only the first is ever seen
    const Index n = 15;
    std::vector<VariationalTransition> phis = {
        {Matrix::Identity(2, 2), Matrix::Identity(2, 2), 0}};
    Matrix factor = Matrix::Zero(2, 2);
    factor(0, 0) = 0.8;
    factor(1, 1) = 0.7;
    Matrix phi = Matrix::Identity(2, 2);
    Matrix g = Matrix::Zero(2, 2);
    Matrix c = Matrix::Zero(1, 2);
    c(0, 0) = 1.0;
    for (Index k = 0; k < n; ++k) {
        const Matrix psi = c * phi;
        g += psi.transpose() * psi;
        phi = (factor * phi).eval();
        phis.push_back({phi, factor, k + 1});
    }
    Gramian gram;
    gram.matrix = g;
    gram.kind = GramianKind::variational;
    gram.horizon = n;
    gram.base_state = Vector::Zero(2);
    const ObservabilityVerdict v = observability_verdict(gram, lyapunov_spectrum(phis));
    CHECK(v.rank == 1);
    CHECK(v.spectral_value < 1.0);
    CHECK_FALSE(v.observable);
}

TEST_CASE("verdict requires matching horizons") {
    const auto phis = constant_factor_chain(Matrix::Constant(1, 1, 0.5), 20);
    Gramian gram;
    gram.matrix = Matrix::Ones(1, 1);
    gram.kind = GramianKind::variational;
    gram.horizon = 19;
    gram.base_state = Vector::Zero(1);
    CHECK_THROWS_AS((void)observability_verdict(gram, lyapunov_spectrum(phis)), ConfigError);
}

TEST_CASE("output boundedness check reports the witness") {
    std::vector<VariationalOutputMap> psis;
    for (Index k = 0; k < 5; ++k) {
        Matrix psi = Matrix::Identity(2, 2) * (1.0 + static_cast<double>(k));
        psis.push_back({psi, k});
    }
    const BoundednessReport ok = boundedness_check(psis, 10.0);
    CHECK(ok.bounded);
    CHECK(ok.max_norm == doctest::Approx(5.0));
    CHECK(ok.argmax_step == 4);

    const BoundednessReport bad = boundedness_check(psis, 4.5);
    CHECK_FALSE(bad.bounded);
    CHECK(bad.argmax_step == 4);
}

TEST_CASE("spectrum csv lists one exponent per row") {
    const auto phis = constant_factor_chain(Matrix::Constant(1, 1, 0.5), 4);
    const LyapunovSpectrum s = lyapunov_spectrum(phis);
    std::ostringstream os;
    write_spectrum_csv(s, os);
    std::istringstream in(os.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "i,lambda");
    std::string row;
    std::getline(in, row);
    CHECK(row.substr(0, 2) == "0,");
}

TEST_CASE("verdict json exposes the decision and both rates") {
    const auto phis = constant_factor_chain(Matrix::Constant(1, 1, 0.5), 20);
    Matrix g = Matrix::Zero(1, 1);
    for (Index k = 0; k < 20; ++k) g += phis[k].phi.transpose() * phis[k].phi;
    Gramian gram;
    gram.matrix = g;
    gram.kind = GramianKind::variational;
    gram.horizon = 20;
    gram.base_state = Vector::Zero(1);
    const std::string j =
        verdict_to_json(observability_verdict(gram, lyapunov_spectrum(phis)));
    CHECK(j.find("\"observable\": true") != std::string::npos);
    CHECK(j.find("\"spectral_value\"") != std::string::npos);
    CHECK(j.find("\"growth_rate\"") != std::string::npos);
    CHECK(j.find("\"rank\"") != std::string::npos);
}

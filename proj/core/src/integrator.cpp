#include "vargram/integrator.hpp"

#include "internal.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <utility>

namespace vargram {

namespace {

struct StageSolution {
    Vector zeta1;
    Vector zeta2;
    Vector x_next;
    int iterations = 0;
    Matrix jac_z1; // f Jacobians at the converged stages, reused by the
    Matrix jac_z2; // sensitivity solve
};

// Newton on the stacked residual of the two stage equations. The Newton
// matrix is I - K with
//   K = [ T/4 J(z1), -T/4 J(z2); T/4 J(z1), 5T/12 J(z2) ]
// which is the same matrix the step sensitivity needs afterwards.
StageSolution solve_stages(const SystemModel& model, const Vector& x, const IrkConfig& cfg,
                           Index step_index, bool want_jacobians) {
    const Index n = model.n_x;
    const double t4 = cfg.step_size / 4.0;
    const double t12 = cfg.step_size / 12.0;

    StageSolution s;
    s.zeta1 = x;
    s.zeta2 = x;

    Vector f1 = model.f(s.zeta1);
    Vector f2 = f1;
    Vector residual(2 * n);
    auto form_residual = [&]() {
        residual.head(n) = s.zeta1 - x - t4 * (f1 - f2);
        residual.tail(n) = s.zeta2 - x - t12 * (3.0 * f1 + 5.0 * f2);
    };
    form_residual();

    double res_norm = residual.lpNorm<Eigen::Infinity>();
    Matrix newton(2 * n, 2 * n);
    while (res_norm > cfg.newton_tol) {
        if (s.iterations >= cfg.newton_max_iter)
            throw IntegrationError("stage solve: Newton did not reach tolerance " +
                                       std::to_string(cfg.newton_tol) + " within " +
                                       std::to_string(cfg.newton_max_iter) +
                                       " iterations (try a smaller step size)",
                                   step_index, res_norm);
        if (!std::isfinite(res_norm))
            throw IntegrationError("stage solve: residual became non-finite", step_index,
                                   res_norm);

        const Matrix j1 = model.jac_f(s.zeta1);
        const Matrix j2 = model.jac_f(s.zeta2);
        newton.topLeftCorner(n, n) = Matrix::Identity(n, n) - t4 * j1;
        newton.topRightCorner(n, n) = t4 * j2;
        newton.bottomLeftCorner(n, n) = -t4 * j1; // 3T/12 = T/4
        newton.bottomRightCorner(n, n) = Matrix::Identity(n, n) - 5.0 * t12 * j2;

        Eigen::PartialPivLU<Matrix> lu(newton);
        const Vector delta = lu.solve(-residual);
        if (!delta.allFinite())
            throw IntegrationError(
                "stage solve: singular Newton system (try a smaller step size)", step_index,
                res_norm);

        s.zeta1 += delta.head(n);
        s.zeta2 += delta.tail(n);
        ++s.iterations;

        f1 = model.f(s.zeta1);
        f2 = model.f(s.zeta2);
        form_residual();
        res_norm = residual.lpNorm<Eigen::Infinity>();
    }

    s.x_next = x + t4 * (f1 + 3.0 * f2);
    if (!s.x_next.allFinite())
        throw IntegrationError("stage solve: state became non-finite", step_index, res_norm);
    if (want_jacobians) {
        s.jac_z1 = model.jac_f(s.zeta1);
        s.jac_z2 = model.jac_f(s.zeta2);
    }
    return s;
}

// Exact step sensitivity from the converged stages: the stacked stage
// sensitivities Q = [dz1/dx; dz2/dx] solve (I - K) Q = [I; I], then
//   d x+ / d x = I + T/4 J(z1) Q1 + 3T/4 J(z2) Q2.
Matrix step_sensitivity(const StageSolution& s, double step_size, Index step_index) {
    const Index n = s.zeta1.size();
    const double t4 = step_size / 4.0;
    const double t12 = step_size / 12.0;

    Matrix system(2 * n, 2 * n);
    system.topLeftCorner(n, n) = Matrix::Identity(n, n) - t4 * s.jac_z1;
    system.topRightCorner(n, n) = t4 * s.jac_z2;
    system.bottomLeftCorner(n, n) = -t4 * s.jac_z1;
    system.bottomRightCorner(n, n) = Matrix::Identity(n, n) - 5.0 * t12 * s.jac_z2;

    Matrix rhs(2 * n, n);
    rhs.topRows(n) = Matrix::Identity(n, n);
    rhs.bottomRows(n) = Matrix::Identity(n, n);

    Eigen::PartialPivLU<Matrix> lu(system);
    const Matrix q = lu.solve(rhs);
    if (!q.allFinite())
        throw IntegrationError("step sensitivity: singular stage system", step_index, 0.0);

    return Matrix::Identity(n, n) + t4 * s.jac_z1 * q.topRows(n) +
           3.0 * t4 * s.jac_z2 * q.bottomRows(n);
}

void check_input(const SystemModel& model, const Vector& x, const IrkConfig& cfg) {
    if (model.n_x <= 0 || !model.f || !model.jac_f)
        throw ConfigError("integrator: model must provide f and jac_f");
    if (x.size() != model.n_x)
        throw ConfigError("integrator: state has " + std::to_string(x.size()) +
                          " entries, model expects " + std::to_string(model.n_x));
    if (!(cfg.step_size > 0.0))
        throw ConfigError("integrator: step_size must be positive");
}

} // namespace

IrkStep irk_step(const SystemModel& model, const Vector& x, const IrkConfig& cfg) {
    check_input(model, x, cfg);
    StageSolution s = solve_stages(model, x, cfg, 0, /*want_jacobians=*/true);

    IrkStep out;
    out.x_next = std::move(s.x_next);
    out.step_jacobian = step_sensitivity(s, cfg.step_size, 0);
    out.zeta1 = std::move(s.zeta1);
    out.zeta2 = std::move(s.zeta2);
    out.newton_iterations = s.iterations;
    return out;
}

Trajectory simulate(const SystemModel& model, const Vector& x0, Index n_steps,
                    const IrkConfig& cfg) {
    check_input(model, x0, cfg);
    if (n_steps < 0) throw ConfigError("simulate: n_steps must be nonnegative");

    Trajectory traj;
    traj.step_size = cfg.step_size;
    traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
    traj.states.push_back(x0);
    Vector x = x0;
    for (Index k = 0; k < n_steps; ++k) {
        try {
            StageSolution s = solve_stages(model, x, cfg, k, /*want_jacobians=*/false);
            x = std::move(s.x_next);
        } catch (const IntegrationError& e) {
            throw IntegrationError(std::string(e.what()) + " at step " + std::to_string(k), k,
                                   e.residual_norm);
        }
        traj.states.push_back(x);
    }
    return traj;
}

namespace detail {

// Shared with variational.cpp: one step plus its exact sensitivity.
std::pair<Vector, Matrix> step_with_sensitivity(const SystemModel& model, const Vector& x,
                                                const IrkConfig& cfg, Index step_index) {
    StageSolution s = solve_stages(model, x, cfg, step_index, /*want_jacobians=*/true);
    Matrix jac = step_sensitivity(s, cfg.step_size, step_index);
    return {std::move(s.x_next), std::move(jac)};
}

} // namespace detail

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
    const Index n = traj.states.empty() ? 0 : traj.states.front().size();
    os << "k,t";
    for (Index i = 0; i < n; ++i) os << ",x_" << i;
    os << "\n";
    char buf[32];
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        os << k;
        std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(k) * traj.step_size);
        os << ',' << buf;
        for (Index i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", traj.states[k](i));
            os << ',' << buf;
        }
        os << "\n";
    }
}

} // namespace vargram

#include "vargram/estimation.hpp"

#include "vargram/variational.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <utility>

namespace vargram {

namespace {

struct FullEval {
    double cost = 0.0;
    Matrix jtj;
    Vector jtr;
};

// Residuals r_k = (selected h(x_k)) - y_k stacked over k = 0 .. N-1 with the
// Jacobian rows taken from the selected rows of Psi_0^k. Normal equations
// are accumulated on the fly so nothing of size N is stored.
FullEval eval_full(const EstimationProblem& p, const Vector& x0_hat) {
    const Index n_x = p.model.n_x;
    FullEval ev;
    ev.jtj = Matrix::Zero(n_x, n_x);
    ev.jtr = Vector::Zero(n_x);

    Matrix phi = Matrix::Identity(n_x, n_x);
    walk_step_factors(p.model, x0_hat, p.horizon, p.cfg,
                      [&](Index k, const Vector& x_k, const Matrix& factor) {
                          const Vector y = p.model.h(x_k);
                          const Matrix psi = p.model.jac_h(x_k) * phi;
                          for (std::size_t s = 0; s < p.sensors.selected.size(); ++s) {
                              const Index j = p.sensors.selected[s];
                              const double r =
                                  y(j) - p.measurements(k, static_cast<Index>(s));
                              ev.cost += r * r;
                              ev.jtj.noalias() +=
                                  psi.row(j).transpose() * psi.row(j);
                              ev.jtr.noalias() += psi.row(j).transpose() * r;
                          }
                          phi = (factor * phi).eval();
                      });
    return ev;
}

double eval_cost(const EstimationProblem& p, const Vector& x0_hat) {
    const Trajectory traj = simulate(p.model, x0_hat, p.horizon - 1, p.cfg);
    double cost = 0.0;
    for (Index k = 0; k < p.horizon; ++k) {
        const Vector y = p.model.h(traj.states[static_cast<std::size_t>(k)]);
        for (std::size_t s = 0; s < p.sensors.selected.size(); ++s) {
            const double r =
                y(p.sensors.selected[s]) - p.measurements(k, static_cast<Index>(s));
            cost += r * r;
        }
    }
    return cost;
}

void check_problem(const EstimationProblem& p) {
    if (p.sensors.selected.empty())
        throw ConfigError("estimate_initial_state: empty sensor set");
    if (p.horizon < 1) throw ConfigError("estimate_initial_state: horizon must be at least 1");
    if (p.measurements.rows() != p.horizon ||
        p.measurements.cols() != static_cast<Index>(p.sensors.selected.size()))
        throw ConfigError("estimate_initial_state: measurements must be horizon x |sensors| (" +
                          std::to_string(p.horizon) + "x" +
                          std::to_string(p.sensors.selected.size()) + "), got " +
                          std::to_string(p.measurements.rows()) + "x" +
                          std::to_string(p.measurements.cols()));
    if (p.x0_guess.size() != p.model.n_x)
        throw ConfigError("estimate_initial_state: guess has wrong dimension");
    for (int j : p.sensors.selected)
        if (j < 0 || j >= p.model.n_y)
            throw ConfigError("estimate_initial_state: sensor index out of range");
}

} // namespace

EstimationResult estimate_initial_state(const EstimationProblem& p) {
    check_problem(p);

    constexpr double grad_tol = 1e-8;
    constexpr double step_tol = 1e-12;
    constexpr int max_iter = 200;
    constexpr int max_integration_retries = 5;

    const Index n_x = p.model.n_x;
    Vector x = p.x0_guess;
    double lambda = 1e-3;

    FullEval ev = eval_full(p, x);
    EstimationResult res;
    res.converged = false;

    int integration_retries = 0;
    while (res.iterations < max_iter) {
        if (ev.jtr.lpNorm<Eigen::Infinity>() < grad_tol) {
            res.converged = true;
            break;
        }

        Matrix damped = ev.jtj + lambda * Matrix::Identity(n_x, n_x);
        const Vector step = damped.ldlt().solve(-ev.jtr);
        if (!step.allFinite())
            throw NumericalError("estimate_initial_state: singular damped normal equations");
        if (step.norm() < step_tol) {
            res.converged = true;
            break;
        }

        ++res.iterations;
        const Vector trial = x + step;
        double trial_cost;
        try {
            trial_cost = eval_cost(p, trial);
        } catch (const IntegrationError&) {
            // the step left the region the integrator can handle; damp harder
            if (++integration_retries > max_integration_retries) throw;
            lambda *= 10.0;
            continue;
        }
        integration_retries = 0;

        if (trial_cost < ev.cost) {
            x = trial;
            lambda = std::max(lambda / 10.0, 1e-15);
            ev = eval_full(p, x);
        } else {
            lambda *= 10.0;
        }
    }

    res.x0_hat = x;
    res.residual_norm = std::sqrt(ev.cost);
    if (p.x0_truth) {
        const double denom = p.x0_truth->norm();
        res.relative_error = denom > 0.0 ? (*p.x0_truth - x).norm() / denom
                                         : (*p.x0_truth - x).norm();
    } else {
        res.relative_error = std::numeric_limits<double>::quiet_NaN();
    }
    return res;
}

Matrix synthesize_measurements(const SystemModel& model, const SensorSet& sensors,
                               const Vector& x0, Index n, const IrkConfig& cfg, double noise_std,
                               std::uint64_t seed) {
    if (sensors.selected.empty())
        throw ConfigError("synthesize_measurements: empty sensor set");
    if (n < 1) throw ConfigError("synthesize_measurements: horizon must be at least 1");

    const Trajectory traj = simulate(model, x0, n - 1, cfg);
    Matrix y(n, static_cast<Index>(sensors.selected.size()));
    for (Index k = 0; k < n; ++k) {
        const Vector out = model.h(traj.states[static_cast<std::size_t>(k)]);
        for (std::size_t s = 0; s < sensors.selected.size(); ++s)
            y(k, static_cast<Index>(s)) = out(sensors.selected[s]);
    }
    if (noise_std > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, noise_std);
        for (Index k = 0; k < y.rows(); ++k)
            for (Index s = 0; s < y.cols(); ++s) y(k, s) += noise(rng);
    }
    return y;
}

std::vector<ErrorVsBudgetRow> error_vs_budget(const SystemModel& model, const Vector& x0_truth,
                                              Index n, const std::vector<int>& budgets,
                                              const IrkConfig& cfg,
                                              const EstimationOptions& opts) {
    if (budgets.empty()) throw ConfigError("error_vs_budget: no budgets given");
    for (int r : budgets)
        if (r < 1 || r > model.n_y)
            throw ConfigError("error_vs_budget: budget " + std::to_string(r) + " outside 1.." +
                              std::to_string(model.n_y));

    // the same perturbed guess is reused across budgets so rows are comparable
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Vector guess = x0_truth;
    for (Index i = 0; i < guess.size(); ++i)
        guess(i) *= 1.0 + opts.guess_perturbation * unit(rng);

    const PerSensorGramians gs = per_sensor_gramians(model, x0_truth, n, cfg);
    const double delta = default_delta(gs);

    std::vector<ErrorVsBudgetRow> rows;
    rows.reserve(budgets.size());
    for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
        const int r = budgets[bi];
        ErrorVsBudgetRow row;
        row.budget = r;
        try {
            const GreedyResult greedy = greedy_select(gs, r, delta);
            row.sensors = greedy.set.selected;

            EstimationProblem p;
            p.model = model;
            p.sensors = greedy.set;
            p.horizon = n;
            p.cfg = cfg;
            p.measurements = synthesize_measurements(model, greedy.set, x0_truth, n, cfg,
                                                     opts.noise_std, opts.seed + 1 + bi);
            p.x0_guess = guess;
            p.x0_truth = x0_truth;

            const EstimationResult est = estimate_initial_state(p);
            row.relative_error = est.relative_error;
            row.residual_norm = est.residual_norm;
            row.iterations = est.iterations;
            row.converged = est.converged;
        } catch (const IntegrationError&) {
            row.relative_error = std::numeric_limits<double>::quiet_NaN();
            row.converged = false;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_error_table_csv(const std::vector<ErrorVsBudgetRow>& rows, std::ostream& os) {
    os << "r,sensors,e,residual,iterations,converged\n";
    char buf[32];
    for (const auto& row : rows) {
        os << row.budget << ',';
        for (std::size_t i = 0; i < row.sensors.size(); ++i) {
            if (i) os << '|';
            os << row.sensors[i];
        }
        std::snprintf(buf, sizeof buf, "%.17g", row.relative_error);
        os << ',' << buf;
        std::snprintf(buf, sizeof buf, "%.17g", row.residual_norm);
        os << ',' << buf << ',' << row.iterations << ',' << (row.converged ? 1 : 0) << "\n";
    }
}

} // namespace vargram

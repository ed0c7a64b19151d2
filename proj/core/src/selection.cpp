#include "vargram/selection.hpp"

#include "vargram/variational.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <utility>

namespace vargram {

namespace {

double logdet_chol(const Matrix& m, const char* who) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success)
        throw NumericalError(std::string(who) + ": log-det of a non positive definite matrix");
    double logdet = 0.0;
    const auto& l = llt.matrixLLT();
    for (Index i = 0; i < m.rows(); ++i) logdet += 2.0 * std::log(l(i, i));
    if (!std::isfinite(logdet))
        throw NumericalError(std::string(who) + ": non-finite determinant");
    return logdet;
}

void check_budget(Index n_y, int budget, const char* who) {
    if (budget < 1 || budget > n_y)
        throw ConfigError(std::string(who) + ": budget " + std::to_string(budget) +
                          " outside 1.." + std::to_string(n_y));
}

// number of r-subsets, saturating at the guard limit
long long subset_count(Index n, int r, long long limit) {
    long long c = 1;
    for (int i = 1; i <= r; ++i) {
        c = c * (n - r + i) / i;
        if (c > limit) return limit + 1;
    }
    return c;
}

} // namespace

SensorSet make_sensor_set(std::vector<int> selected, Index n_y, int budget) {
    if (budget < 0 || budget > n_y)
        throw ConfigError("sensor set: budget " + std::to_string(budget) + " outside 0.." +
                          std::to_string(n_y));
    if (static_cast<int>(selected.size()) > budget)
        throw ConfigError("sensor set: " + std::to_string(selected.size()) +
                          " sensors exceed budget " + std::to_string(budget));
    SensorSet s;
    s.gamma = Eigen::VectorXi::Zero(n_y);
    for (int j : selected) {
        if (j < 0 || j >= n_y)
            throw ConfigError("sensor set: index " + std::to_string(j) + " outside 0.." +
                              std::to_string(n_y - 1));
        if (s.gamma(j) != 0)
            throw ConfigError("sensor set: duplicate index " + std::to_string(j));
        s.gamma(j) = 1;
    }
    s.selected = std::move(selected);
    s.budget = budget;
    return s;
}

PerSensorGramians per_sensor_gramians(const SystemModel& model, const Vector& x0, Index n,
                                      const IrkConfig& cfg) {
    if (!model.jac_h) throw ConfigError("per_sensor_gramians: model has no output Jacobian");
    if (x0.size() != model.n_x)
        throw ConfigError("per_sensor_gramians: x0 has " + std::to_string(x0.size()) +
                          " entries, model expects " + std::to_string(model.n_x));
    if (n < 1) throw ConfigError("per_sensor_gramians: horizon must be at least 1");

    const Index n_x = model.n_x;
    const Index n_y = model.n_y;
    PerSensorGramians gs;
    gs.horizon = n;
    gs.base_state = x0;
    gs.per_sensor.assign(static_cast<std::size_t>(n_y), Matrix::Zero(n_x, n_x));

    Matrix phi = Matrix::Identity(n_x, n_x);
    walk_step_factors(model, x0, n, cfg,
                      [&](Index /*k*/, const Vector& x_k, const Matrix& factor) {
                          const Matrix rows = model.jac_h(x_k) * phi; // n_y x n_x
                          for (Index j = 0; j < n_y; ++j)
                              gs.per_sensor[static_cast<std::size_t>(j)].noalias() +=
                                  rows.row(j).transpose() * rows.row(j);
                          phi = (factor * phi).eval();
                      });

    for (auto& g : gs.per_sensor) g = 0.5 * (g + g.transpose()).eval();
    return gs;
}

double default_delta(const PerSensorGramians& gs) {
    if (gs.per_sensor.empty()) throw ConfigError("default_delta: no per-sensor Gramians");
    double trace = 0.0;
    for (const auto& g : gs.per_sensor) trace += g.trace();
    if (!std::isfinite(trace) || trace <= 0.0) return 1e-8;
    return 1e-8 * trace / static_cast<double>(gs.n_x());
}

double objective_logdet(const PerSensorGramians& gs, const SensorSet& s, double delta) {
    if (delta < 0.0) throw ConfigError("objective_logdet: delta must be nonnegative");
    const Index n_x = gs.n_x();
    Matrix acc = delta * Matrix::Identity(n_x, n_x);
    for (int j : s.selected) {
        if (j < 0 || j >= gs.n_sensors())
            throw ConfigError("objective_logdet: sensor index " + std::to_string(j) +
                              " out of range");
        acc += gs.per_sensor[static_cast<std::size_t>(j)];
    }
    const double raw = logdet_chol(acc, "objective_logdet");
    const double base = static_cast<double>(n_x) * std::log(delta);
    const double score = raw - base;
    if (!std::isfinite(score))
        throw NumericalError("objective_logdet: non-finite score (delta too small?)");
    return score;
}

GreedyResult greedy_select(const PerSensorGramians& gs, int budget, double delta) {
    check_budget(gs.n_sensors(), budget, "greedy_select");
    if (!(delta > 0.0)) throw ConfigError("greedy_select: delta must be positive");

    const Index n_x = gs.n_x();
    const Index n_y = gs.n_sensors();

    GreedyResult res;
    Matrix acc = delta * Matrix::Identity(n_x, n_x);
    double current = logdet_chol(acc, "greedy_select");
    std::vector<bool> taken(static_cast<std::size_t>(n_y), false);

    for (int pick = 0; pick < budget; ++pick) {
        int best = -1;
        double best_logdet = -std::numeric_limits<double>::infinity();
        for (Index j = 0; j < n_y; ++j) {
            if (taken[static_cast<std::size_t>(j)]) continue;
            const double cand =
                logdet_chol(acc + gs.per_sensor[static_cast<std::size_t>(j)], "greedy_select");
            if (cand > best_logdet) { // strict: ties stay with the lowest index
                best_logdet = cand;
                best = static_cast<int>(j);
            }
        }
        taken[static_cast<std::size_t>(best)] = true;
        res.set.selected.push_back(best);
        res.gains.push_back(best_logdet - current);
        acc += gs.per_sensor[static_cast<std::size_t>(best)];
        current = best_logdet;
    }

    res.set = make_sensor_set(std::move(res.set.selected), n_y, budget);
    res.objective = current - static_cast<double>(n_x) * std::log(delta);
    return res;
}

SensorSet brute_force_select(const PerSensorGramians& gs, int budget, double delta) {
    check_budget(gs.n_sensors(), budget, "brute_force_select");
    if (!(delta > 0.0)) throw ConfigError("brute_force_select: delta must be positive");

    const Index n_y = gs.n_sensors();
    constexpr long long limit = 1'000'000;
    if (subset_count(n_y, budget, limit) > limit)
        throw ConfigError("brute_force_select: more than 1e6 subsets, refusing");

    const Index n_x = gs.n_x();
    const Matrix reg = delta * Matrix::Identity(n_x, n_x);

    // lexicographic enumeration of r-combinations; first maximizer wins
    std::vector<int> comb(static_cast<std::size_t>(budget));
    for (int i = 0; i < budget; ++i) comb[static_cast<std::size_t>(i)] = i;

    std::vector<int> best_comb;
    double best = -std::numeric_limits<double>::infinity();
    while (true) {
        Matrix acc = reg;
        for (int j : comb) acc += gs.per_sensor[static_cast<std::size_t>(j)];
        const double score = logdet_chol(acc, "brute_force_select");
        if (score > best) {
            best = score;
            best_comb = comb;
        }
        // advance
        int i = budget - 1;
        while (i >= 0 && comb[static_cast<std::size_t>(i)] ==
                             static_cast<int>(n_y) - budget + i)
            --i;
        if (i < 0) break;
        ++comb[static_cast<std::size_t>(i)];
        for (int t = i + 1; t < budget; ++t)
            comb[static_cast<std::size_t>(t)] = comb[static_cast<std::size_t>(t - 1)] + 1;
    }
    return make_sensor_set(std::move(best_comb), n_y, budget);
}

SubmodularityReport submodularity_audit(const PerSensorGramians& gs, double delta, int n_max) {
    const Index n_y = gs.n_sensors();
    if (n_y > n_max)
        throw ConfigError("submodularity_audit: " + std::to_string(n_y) +
                          " sensors exceed the audit cap " + std::to_string(n_max));
    if (!(delta > 0.0)) throw ConfigError("submodularity_audit: delta must be positive");

    const Index n_x = gs.n_x();
    const unsigned full = 1u << n_y;

    // cache log det(delta I + sum of subset) for every subset mask
    std::vector<double> f(full);
    for (unsigned mask = 0; mask < full; ++mask) {
        Matrix acc = delta * Matrix::Identity(n_x, n_x);
        for (Index j = 0; j < n_y; ++j)
            if (mask & (1u << j)) acc += gs.per_sensor[static_cast<std::size_t>(j)];
        f[mask] = logdet_chol(acc, "submodularity_audit");
    }

    constexpr double tol = 1e-9;
    SubmodularityReport rep;
    rep.worst_slack = std::numeric_limits<double>::infinity();

    // monotonicity: every marginal gain is nonnegative
    for (unsigned a = 0; a < full; ++a) {
        for (Index sj = 0; sj < n_y; ++sj) {
            const unsigned bit = 1u << sj;
            if (a & bit) continue;
            if (f[a | bit] - f[a] < -tol) ++rep.monotonicity_violations;
        }
    }

    // diminishing returns over every nested pair: enumerate B, its proper
    // submasks A, and s outside B
    for (unsigned b = 0; b < full; ++b) {
        for (unsigned a = b;; a = (a - 1) & b) {
            for (Index sj = 0; sj < n_y; ++sj) {
                const unsigned bit = 1u << sj;
                if (b & bit) continue;
                const double slack = (f[a | bit] - f[a]) - (f[b | bit] - f[b]);
                ++rep.checked;
                if (slack < rep.worst_slack) rep.worst_slack = slack;
                if (slack < -tol) ++rep.violations;
            }
            if (a == 0) break;
        }
    }
    if (rep.checked == 0) rep.worst_slack = 0.0;
    return rep;
}

std::string selection_report_json(const GreedyResult& greedy, double delta,
                                  std::optional<double> ratio_vs_brute_force) {
    nlohmann::ordered_json j;
    j["budget"] = greedy.set.budget;
    j["selected"] = greedy.set.selected;
    j["gamma"] = std::vector<int>(greedy.set.gamma.begin(), greedy.set.gamma.end());
    j["gains"] = greedy.gains;
    j["objective"] = greedy.objective;
    j["delta"] = delta;
    if (ratio_vs_brute_force) j["ratio_vs_brute_force"] = *ratio_vs_brute_force;
    return j.dump(2);
}

} // namespace vargram

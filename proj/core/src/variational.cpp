#include "vargram/variational.hpp"

#include "internal.hpp"

namespace vargram {

std::vector<VariationalTransition> propagate_variational(const SystemModel& model,
                                                         const Trajectory& traj,
                                                         const IrkConfig& cfg,
                                                         std::size_t max_stored_scalars) {
    if (traj.states.empty()) throw ConfigError("propagate_variational: empty trajectory");
    const Index n = model.n_x;
    if (traj.states.front().size() != n)
        throw ConfigError("propagate_variational: trajectory/model dimension mismatch");

    const std::size_t needed =
        2 * traj.states.size() * static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    if (needed > max_stored_scalars)
        throw ConfigError("propagate_variational: storing " + std::to_string(needed) +
                          " scalars exceeds the budget of " +
                          std::to_string(max_stored_scalars) +
                          "; use walk_step_factors or variational_gramian instead");

    std::vector<VariationalTransition> phis;
    phis.reserve(traj.states.size());
    phis.push_back({Matrix::Identity(n, n), Matrix::Identity(n, n), 0});
    for (Index k = 0; k + 1 < static_cast<Index>(traj.states.size()); ++k) {
        auto [x_next, factor] =
            detail::step_with_sensitivity(model, traj.states[static_cast<std::size_t>(k)], cfg, k);
        (void)x_next; // states are already stored; only the factor is new
        Matrix phi = factor * phis.back().phi;
        if (!phi.allFinite())
            throw NumericalError(
                "propagate_variational: accumulated sensitivity overflowed at step " +
                std::to_string(k + 1) + "; use the streamed Lyapunov path for long horizons");
        phis.push_back({std::move(phi), std::move(factor), k + 1});
    }
    return phis;
}

std::vector<VariationalOutputMap> output_maps(const SystemModel& model, const Trajectory& traj,
                                              std::span<const VariationalTransition> phis) {
    if (!model.jac_h) throw ConfigError("output_maps: model has no output Jacobian");
    if (phis.size() != traj.states.size())
        throw ConfigError("output_maps: phis (" + std::to_string(phis.size()) +
                          ") not aligned with trajectory (" + std::to_string(traj.states.size()) +
                          " states)");

    std::vector<VariationalOutputMap> psis;
    if (traj.horizon() < 1) return psis;
    psis.reserve(static_cast<std::size_t>(traj.horizon()));
    for (Index k = 0; k < traj.horizon(); ++k) {
        const auto ku = static_cast<std::size_t>(k);
        psis.push_back({model.jac_h(traj.states[ku]) * phis[ku].phi, k});
    }
    return psis;
}

void walk_step_factors(const SystemModel& model, const Vector& x0, Index n_steps,
                       const IrkConfig& cfg, const StepVisitor& visit) {
    if (n_steps < 0) throw ConfigError("walk_step_factors: n_steps must be nonnegative");
    Vector x = x0;
    for (Index k = 0; k < n_steps; ++k) {
        auto [x_next, factor] = detail::step_with_sensitivity(model, x, cfg, k);
        visit(k, x, factor);
        x = std::move(x_next);
    }
}

} // namespace vargram

#pragma once

#include "vargram/integrator.hpp"
#include "vargram/model.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace vargram {

// State-transition data for one step index k along a trajectory:
//   phi         = Phi_0^k, the accumulated sensitivity d x_k / d x_0
//   step_factor = Phi_{k-1}^k, the single-step Jacobian (identity at k = 0)
// The per-step factor is kept because long products over- or underflow long
// before their factors do; the QR-stabilized Lyapunov path consumes factors
// only.
struct VariationalTransition {
    Matrix phi;
    Matrix step_factor;
    Index step_index = 0;
};

// Psi_0^k = jac_h(x_k) * Phi_0^k, the sensitivity of output k to the
// initial state.
struct VariationalOutputMap {
    Matrix psi;
    Index step_index = 0;
};

// Chain-rule propagation Phi_0^{k+1} = Phi_k^{k+1} * Phi_0^k along a stored
// trajectory, re-deriving each step factor from the converged stages at
// x_k. Returns Phi_0^0 .. Phi_0^N. Refuses (ConfigError) when the result
// would exceed max_stored_scalars; use the streaming walker or
// variational_gramian for horizons past that budget.
std::vector<VariationalTransition> propagate_variational(
    const SystemModel& model, const Trajectory& traj, const IrkConfig& cfg,
    std::size_t max_stored_scalars = 10'000'000);

// Output sensitivities Psi_0^k for k = 0 .. N-1 (the final state's map is
// not part of the horizon-N stack).
std::vector<VariationalOutputMap> output_maps(const SystemModel& model, const Trajectory& traj,
                                              std::span<const VariationalTransition> phis);

// Streaming form: integrates n_steps from x0 and hands (k, x_k, Phi_{k}^{k+1})
// to the visitor for k = 0 .. n_steps-1, keeping O(n_x^2) memory. All
// Gramian accumulation and the streamed Lyapunov path are built on this.
using StepVisitor = std::function<void(Index k, const Vector& x_k, const Matrix& step_factor)>;
void walk_step_factors(const SystemModel& model, const Vector& x0, Index n_steps,
                       const IrkConfig& cfg, const StepVisitor& visit);

} // namespace vargram

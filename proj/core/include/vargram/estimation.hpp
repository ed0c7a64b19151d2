#pragma once

#include "vargram/integrator.hpp"
#include "vargram/model.hpp"
#include "vargram/selection.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace vargram {

// Nonlinear least squares for the initial state: minimize over x0_hat
//   sum_{k=0}^{N-1} || y_k - Gamma_S h(x_k(x0_hat)) ||^2
// given measurements y_k of the selected outputs along one trajectory.
struct EstimationProblem {
    SystemModel model;
    SensorSet sensors;
    Matrix measurements; // N x |S|, row k = selected outputs at step k
    Index horizon = 0;
    IrkConfig cfg;
    Vector x0_guess;
    std::optional<Vector> x0_truth; // enables relative_error in the result
};

struct EstimationResult {
    Vector x0_hat;
    double relative_error = 0.0; // ||truth - hat|| / ||truth||, NaN without truth
    double residual_norm = 0.0;  // final ||r||_2
    int iterations = 0;
    bool converged = false;
};

// Levenberg-Marquardt with the residual Jacobian assembled from the
// selected rows of the variational output maps Psi_0^k (no finite
// differencing). Damping starts at 1e-3 with a x10 / /10 schedule;
// convergence when the gradient max-norm drops below 1e-8 or the step
// below 1e-12; hard cap 200 iterations. Non-convergence is reported via
// converged = false, not an exception. An integrator failure inside an
// iterate is retried with increased damping up to 5 times, then rethrown.
EstimationResult estimate_initial_state(const EstimationProblem& problem);

// Noiseless (or Gaussian-perturbed) synthetic measurements of the selected
// outputs along the trajectory from x0, rows k = 0 .. n-1.
Matrix synthesize_measurements(const SystemModel& model, const SensorSet& sensors,
                               const Vector& x0, Index n, const IrkConfig& cfg,
                               double noise_std = 0.0, std::uint64_t seed = 0);

struct EstimationOptions {
    double guess_perturbation = 0.1; // componentwise relative size of the initial-guess error
    double noise_std = 0.0;
    std::uint64_t seed = 0;
};

struct ErrorVsBudgetRow {
    int budget = 0;
    std::vector<int> sensors;
    double relative_error = 0.0;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// For each budget r: greedy-select r sensors from the per-sensor Gramians
// at the truth, synthesize measurements, estimate from the perturbed guess
// x0 * (1 + guess_perturbation * u), u uniform in [-1, 1] per component
// (seeded), and record the relative error. Budgets must lie in 1 .. n_y.
std::vector<ErrorVsBudgetRow> error_vs_budget(const SystemModel& model, const Vector& x0_truth,
                                              Index n, const std::vector<int>& budgets,
                                              const IrkConfig& cfg,
                                              const EstimationOptions& opts);

// CSV "r,sensors,e,residual,iterations,converged" with sensors joined by '|'.
void write_error_table_csv(const std::vector<ErrorVsBudgetRow>& rows, std::ostream& os);

} // namespace vargram

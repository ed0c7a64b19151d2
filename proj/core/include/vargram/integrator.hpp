#pragma once

#include "vargram/model.hpp"
#include "vargram/types.hpp"

#include <iosfwd>
#include <vector>

namespace vargram {

struct IrkConfig {
    double step_size = 1e-3;
    double newton_tol = 1e-10;   // max-norm of the stage residual
    int newton_max_iter = 50;
};

// One step of the two-stage implicit Runge-Kutta scheme
//   z1 = x + T/4  * (f(z1) - f(z2))
//   z2 = x + T/12 * (3 f(z1) + 5 f(z2))
//   x+ = x + T/4  * (f(z1) + 3 f(z2))
// (third-order, L-stable on the left half plane). step_jacobian is the
// exact d x+ / d x obtained by differentiating the converged stage
// equations, not a finite-difference estimate.
struct IrkStep {
    Vector x_next;
    Vector zeta1;
    Vector zeta2;
    Matrix step_jacobian;
    int newton_iterations = 0;
};

struct Trajectory {
    std::vector<Vector> states; // x_0 .. x_N
    double step_size = 0.0;

    Index horizon() const { return static_cast<Index>(states.size()) - 1; }
};

IrkStep irk_step(const SystemModel& model, const Vector& x, const IrkConfig& cfg);

// Repeated irk_step without the Jacobian assembly (the stage solve is
// shared; only the extra linear solve is skipped).
Trajectory simulate(const SystemModel& model, const Vector& x0, Index n_steps,
                    const IrkConfig& cfg);

// Header "k,t,x_0,...,x_{n_x-1}", one row per stored state.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

} // namespace vargram

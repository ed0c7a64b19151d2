#pragma once

#include "vargram/types.hpp"

#include <functional>
#include <optional>
#include <string>

namespace vargram {

// Axis-aligned box of admissible states, used by samplers and validators.
struct DomainBox {
    Vector lo;
    Vector hi;

    bool contains(const Vector& x) const {
        return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
    }
};

// A continuous-time autonomous system dx/dt = f(x) with output y = h(x).
// All four callables must be reentrant; captured state is treated as
// immutable so models can be shared across threads.
struct SystemModel {
    Index n_x = 0;
    Index n_y = 0;

    std::function<Vector(const Vector&)> f;      // state derivative
    std::function<Matrix(const Vector&)> jac_f;  // n_x x n_x
    std::function<Vector(const Vector&)> h;      // output map
    std::function<Matrix(const Vector&)> jac_h;  // n_y x n_x

    std::optional<DomainBox> domain;
    std::string name;
};

// Linear dynamics dx/dt = A x with linear output y = C x.
SystemModel make_linear(const Matrix& a, const Matrix& c);

// The classic three-state chaotic benchmark; outputs are the full state.
SystemModel make_lorenz63(double sigma = 10.0, double rho = 28.0, double beta = 8.0 / 3.0);

// Replace the output map of a model with the identity (y = x).
SystemModel with_identity_output(SystemModel model);

// Central-difference Jacobian of an arbitrary vector map. Step for
// component i is base_step * (1 + |x_i|). Used as an oracle and as the
// fallback for models without analytic Jacobians.
Matrix fd_jacobian(const std::function<Vector(const Vector&)>& fn, const Vector& x,
                   double base_step = 1e-6);

} // namespace vargram

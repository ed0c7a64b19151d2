#pragma once

// Cross-TU helpers that are not part of the public interface.

#include "vargram/integrator.hpp"
#include "vargram/model.hpp"

#include <utility>

namespace vargram::detail {

// One integrator step plus its exact sensitivity d x_next / d x, sharing
// the converged stage data between the two.
std::pair<Vector, Matrix> step_with_sensitivity(const SystemModel& model, const Vector& x,
                                                const IrkConfig& cfg, Index step_index);

} // namespace vargram::detail

#pragma once

// Umbrella header.

#include "vargram/estimation.hpp"
#include "vargram/experiment.hpp"
#include "vargram/gramian.hpp"
#include "vargram/integrator.hpp"
#include "vargram/lyapunov.hpp"
#include "vargram/mass_action.hpp"
#include "vargram/model.hpp"
#include "vargram/model_config.hpp"
#include "vargram/selection.hpp"
#include "vargram/types.hpp"
#include "vargram/variational.hpp"

namespace vargram {
inline constexpr const char* version = "0.1.0";
}

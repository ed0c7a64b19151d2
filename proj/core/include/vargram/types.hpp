#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace vargram {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent user input: config files, dimension mismatches,
// out-of-range arguments. The CLI maps this to exit code 2.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// The implicit stage solve (or something downstream of it) failed.
// Carries the step index and the last Newton residual so callers can tell
// where a long simulation died. The CLI maps this to exit code 3.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, Index step_index, double residual_norm)
        : Error(what), step_index(step_index), residual_norm(residual_norm) {}

    Index step_index;
    double residual_norm;
};

// Numerical breakdown outside the integrator: non-finite determinants,
// degenerate ranges, singular systems. Also exit code 3.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(what) {}
};

} // namespace vargram

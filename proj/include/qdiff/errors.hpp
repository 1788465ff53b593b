#pragma once

#include <stdexcept>
#include <string>

namespace qdiff {

// Bad user-supplied parameter values (V <= 0, negative L, ...).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Shape / length mismatches between assembled objects.
struct StructuralError : std::logic_error {
    using std::logic_error::logic_error;
};

// Config file / CLI problems. Maps to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical blow-up during time integration. Maps to exit code 3.
struct IntegrationError : std::runtime_error {
    IntegrationError(const std::string& what, double t)
        : std::runtime_error(what), failure_time(t) {}
    double failure_time = 0.0;
};

// Boundary-guard violation that invalidates the requested analysis. Exit code 4.
struct ValidityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qdiff

#pragma once

#include <stdexcept>
#include <string>

namespace loam {

// Error taxonomy, one class per failure family named in the module contracts.

struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PreconditionError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace loam

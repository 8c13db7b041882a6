#pragma once

#include <stdexcept>
#include <string>

namespace visa {

// Bad configuration file, flag value, or incompatible option combination.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite value produced during computation (overflow in exp, log of a
// non-positive number, diverged optimisation, ...).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Caller violated an interface precondition (out-of-range index, wrong
// dimension, malformed input file).
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace visa

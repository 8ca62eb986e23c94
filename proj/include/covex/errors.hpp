#pragma once

#include <stdexcept>
#include <string>

namespace covex {

// Input failed a semantic validity check (bad kernel, bad config, bad file).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Induced chain lacks a unique stationary distribution.
struct ErgodicityError : ValidationError {
    explicit ErgodicityError(const std::string& msg) : ValidationError(msg) {}
};

// Constraint system admits no feasible point.
struct InfeasibleError : std::runtime_error {
    explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

// A solver failed to reach its required accuracy.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace covex

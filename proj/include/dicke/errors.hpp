#pragma once

#include <stdexcept>
#include <string>

// Failure categories that callers (notably the CLI) treat differently from
// plain invalid input: basis/estimate non-convergence, and analytic
// formulas applied outside their regime of validity.

namespace dicke {

struct convergence_error : std::runtime_error {
    explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

struct unstructured_error : std::runtime_error {
    explicit unstructured_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dicke

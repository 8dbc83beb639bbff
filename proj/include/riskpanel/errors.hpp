#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace riskpanel {

// Malformed or inconsistent input data: bad CSV rows, unknown codes,
// schema mismatches, invalid hyperparameters.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical routine could not produce a trustworthy result
// (rank deficiency, degenerate series, non-finite intermediate).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative solver hit its iteration cap while still improving.
// Carries the last iterate and the remaining optimality gap.
class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& msg, std::vector<double> last_iterate, double gap)
        : NumericError(msg), last_iterate(std::move(last_iterate)), gap(gap) {}

    std::vector<double> last_iterate;
    double gap;
};

}  // namespace riskpanel

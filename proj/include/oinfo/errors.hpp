#pragma once

#include <stdexcept>
#include <string>

namespace oinfo {

/// Invalid user input or configuration (bad shapes, inconsistent partitions,
/// unknown options, missing files). The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical failure (non-PD matrix, non-finite loss or activation).
/// The CLI maps it to exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public NumericError {
public:
    NotPositiveDefinite(std::size_t pivot, double value)
        : NumericError("matrix is not positive definite (pivot " + std::to_string(pivot) +
                       ", value " + std::to_string(value) + ")"),
          pivot_(pivot), value_(value) {}

    std::size_t pivot() const { return pivot_; }
    double value() const { return value_; }

private:
    std::size_t pivot_;
    double value_;
};

}  // namespace oinfo

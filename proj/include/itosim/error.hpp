#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace itosim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters, malformed config, dimension mismatches.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Grid sizes that cannot be aggregated or aligned (k does not divide N, ...).
class GridMismatchError : public Error {
public:
    using Error::Error;
};

/// A stepper produced a non-finite state.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t step, const std::string& what)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Input data that cannot support the requested statistic (empty, non-positive errors).
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

}  // namespace itosim

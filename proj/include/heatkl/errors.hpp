#pragma once

#include <stdexcept>
#include <string>

namespace heatkl {

/// Precondition violation: bad dimension, index, parameter or malformed data.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Requested expansion order exceeds the available Taylor data.
class UnsupportedOrder : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure could not reach its tolerance. Carries the best
/// estimate obtained and the achieved error.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double estimate, double achieved)
        : std::runtime_error(what), estimate_(estimate), achieved_(achieved) {}

    double estimate() const noexcept { return estimate_; }
    double achieved() const noexcept { return achieved_; }

private:
    double estimate_;
    double achieved_;
};

/// Least-squares design matrix is rank deficient.
class ConditioningError : public std::runtime_error {
public:
    ConditioningError(const std::string& what, double condition)
        : std::runtime_error(what), condition_(condition) {}

    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

}  // namespace heatkl

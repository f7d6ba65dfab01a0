#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace surropt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SequenceExhausted : public Error {
public:
    using Error::Error;
};

class SimulatorError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

void require_dim(const Vector& v, Eigen::Index expected, const char* what);
bool all_finite(const Vector& v);

/// Per-dimension box constraints x_min <= x <= x_max.
class BoundsSpec {
public:
    BoundsSpec() = default;
    BoundsSpec(Vector x_min, Vector x_max);

    static BoundsSpec unit(std::size_t dim);

    std::size_t dim() const { return static_cast<std::size_t>(x_min_.size()); }
    const Vector& x_min() const { return x_min_; }
    const Vector& x_max() const { return x_max_; }
    Vector range() const { return x_max_ - x_min_; }

    Vector to_unit(const Vector& x) const;
    Vector from_unit(const Vector& u) const;

    bool contains(const Vector& x, double unit_tolerance = 0.0) const;
    /// Largest bound violation of x, measured in unit-scaled coordinates.
    double max_violation(const Vector& x) const;

    BoundsSpec without(std::size_t dim_index) const;

private:
    Vector x_min_;
    Vector x_max_;
};

} // namespace surropt

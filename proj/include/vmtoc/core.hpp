#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace vmtoc {

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

using Point2d = Point2<double>;
using Matrix2d = Matrix2<double>;

/// A requested quantity does not exist for the given parameters
/// (no fixed point, radius outside the admissible ball, invalid model).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A realized control intensity left its admissible range.
class InvalidControl : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// No admissible noise amplitude makes the expected log contraction negative.
class NoWindow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No control intensity in [0,1) brings the norm bound below the target rate.
class Unstabilizable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <typename Scalar>
bool all_finite(const Point2<Scalar>& p)
{
    return p.allFinite();
}

} // namespace vmtoc

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "vmtoc/core.hpp"

namespace vmtoc {

enum class NormKind { LInf, L1, L2Spectral };

inline std::string to_string(NormKind norm)
{
    switch (norm) {
    case NormKind::LInf: return "linf";
    case NormKind::L1: return "l1";
    case NormKind::L2Spectral: return "spectral";
    }
    return "?";
}

/// Eigenvalues (larger first) of a symmetric 2x2 matrix; only the upper
/// triangle is read.
template <typename Derived>
std::pair<typename Derived::Scalar, typename Derived::Scalar>
sym_eigenvalues(const Eigen::MatrixBase<Derived>& s)
{
    EIGEN_STATIC_ASSERT_MATRIX_SPECIFIC_SIZE(Derived, 2, 2);
    using Scalar = typename Derived::Scalar;
    using std::hypot;
    const Scalar mid = (s(0, 0) + s(1, 1)) / Scalar(2);
    const Scalar rad = hypot((s(0, 0) - s(1, 1)) / Scalar(2), s(0, 1));
    return {mid + rad, mid - rad};
}

template <typename Derived>
typename Derived::Scalar induced_norm(const Eigen::MatrixBase<Derived>& m, NormKind norm)
{
    EIGEN_STATIC_ASSERT_MATRIX_SPECIFIC_SIZE(Derived, 2, 2);
    using Scalar = typename Derived::Scalar;
    using std::abs;
    using std::sqrt;
    switch (norm) {
    case NormKind::LInf:
        return std::max(abs(m(0, 0)) + abs(m(0, 1)), abs(m(1, 0)) + abs(m(1, 1)));
    case NormKind::L1:
        return std::max(abs(m(0, 0)) + abs(m(1, 0)), abs(m(0, 1)) + abs(m(1, 1)));
    case NormKind::L2Spectral: {
        const Matrix2<Scalar> gram = m.transpose() * m;
        const Scalar top = sym_eigenvalues(gram).first;
        return sqrt(std::max(top, Scalar(0)));
    }
    }
    return Scalar(0);
}

/// Vector norm matching induced_norm.
template <typename Derived>
typename Derived::Scalar vector_norm(const Eigen::MatrixBase<Derived>& v, NormKind norm)
{
    switch (norm) {
    case NormKind::LInf: return v.template lpNorm<Eigen::Infinity>();
    case NormKind::L1: return v.template lpNorm<1>();
    case NormKind::L2Spectral: return v.norm();
    }
    return 0;
}

/// Both eigenvalues strictly inside the unit circle: |tr| < 1 + det < 2.
template <typename Derived>
bool trace_det_stable(const Eigen::MatrixBase<Derived>& m)
{
    EIGEN_STATIC_ASSERT_MATRIX_SPECIFIC_SIZE(Derived, 2, 2);
    using std::abs;
    const auto tr = m(0, 0) + m(1, 1);
    const auto det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return abs(tr) < 1 + det && det < 1;
}

} // namespace vmtoc

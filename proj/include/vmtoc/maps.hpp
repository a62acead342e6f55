#pragma once

#include <cmath>
#include <string>

#include "vmtoc/core.hpp"

namespace vmtoc {

enum class MapKind { Henon, Lozi };

/// Selects the sign in the equilibrium formulas. Plus is the equilibrium
/// with x* > 0 for both maps.
enum class Branch { Plus, Minus };

template <typename Scalar = double>
struct MapParams {
    MapKind kind = MapKind::Henon;
    Scalar a = Scalar(1.4);
    Scalar b = Scalar(0.3);
};

inline std::string to_string(MapKind kind)
{
    return kind == MapKind::Henon ? "henon" : "lozi";
}

inline std::string to_string(Branch branch)
{
    return branch == Branch::Plus ? "plus" : "minus";
}

/// One step of the uncontrolled map. No validation: non-finite results are
/// passed through for the caller to classify.
template <typename Scalar>
Point2<Scalar> map_step(const MapParams<Scalar>& params, const Point2<Scalar>& p)
{
    using std::abs;
    const Scalar x = p.x();
    const Scalar shape = params.kind == MapKind::Henon ? x * x : abs(x);
    return Point2<Scalar>(p.y() + Scalar(1) - params.a * shape, params.b * x);
}

template <typename Scalar>
Point2<Scalar> fixed_point(const MapParams<Scalar>& params, Branch branch)
{
    using std::sqrt;
    const Scalar a = params.a;
    const Scalar b = params.b;
    if (!(a > Scalar(0)) || !(b > Scalar(0)))
        throw DomainError("map coefficients must satisfy a > 0 and b > 0");

    Scalar x{};
    if (params.kind == MapKind::Henon) {
        // a x^2 + (1 - b) x - 1 = 0, roots taken in the cancellation-free form
        const Scalar lin = Scalar(1) - b;
        const Scalar disc = Scalar(4) * a + lin * lin;
        if (disc < Scalar(0))
            throw DomainError("Henon fixed point requires 4a + (b-1)^2 >= 0");
        const Scalar root = sqrt(disc);
        const Scalar q = lin >= Scalar(0) ? -(lin + root) / Scalar(2) : (root - lin) / Scalar(2);
        const Scalar r1 = q / a;
        const Scalar r2 = Scalar(-1) / q;
        const Scalar pos = r1 > r2 ? r1 : r2;
        const Scalar neg = r1 > r2 ? r2 : r1;
        x = branch == Branch::Plus ? pos : neg;
    } else {
        const Scalar lin = Scalar(1) - b;
        if (!(-a < lin && lin < a))
            throw DomainError("Lozi fixed points require -a < 1 - b < a");
        const Scalar denom = branch == Branch::Plus ? Scalar(1) + a - b : Scalar(1) - a - b;
        if (denom == Scalar(0))
            throw DomainError("Lozi fixed point denominator 1 +- a - b vanishes");
        x = Scalar(1) / denom;
    }
    return Point2<Scalar>(x, b * x);
}

/// Jacobian of the map at p. For Lozi the one-sided derivative from the
/// right is used at the kink x = 0.
template <typename Scalar>
Matrix2<Scalar> jacobian(const MapParams<Scalar>& params, const Point2<Scalar>& p)
{
    Matrix2<Scalar> j;
    const Scalar d11 = params.kind == MapKind::Henon
        ? Scalar(-2) * params.a * p.x()
        : (p.x() >= Scalar(0) ? -params.a : params.a);
    j << d11, Scalar(1), params.b, Scalar(0);
    return j;
}

/// Entrywise bound A with |F(X) - X*| <= A |X - X*| on the closed ball of
/// radius R (max-norm) around the chosen equilibrium.
template <typename Scalar>
Matrix2<Scalar> lipschitz_matrix(const MapParams<Scalar>& params, Branch branch, Scalar radius)
{
    using std::abs;
    const Point2<Scalar> star = fixed_point(params, branch);
    if (!(radius >= Scalar(0)))
        throw DomainError("radius must be non-negative");
    if (!(radius < abs(star.x())))
        throw DomainError("radius must be smaller than |x*|");

    const Scalar a11 = params.kind == MapKind::Henon
        ? params.a * (Scalar(2) * abs(star.x()) + radius)
        : params.a;
    Matrix2<Scalar> m;
    m << a11, Scalar(1), params.b, Scalar(0);
    return m;
}

} // namespace vmtoc

#pragma once

#include <cmath>

namespace vmtoc {

namespace detail {

template <typename F>
double simpson_step(F& f, double a, double fa, double b, double fb, double m, double fm, double whole, double tol,
                    int depth)
{
    const double lm = (a + m) / 2.0;
    const double rm = (m + b) / 2.0;
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_step(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 48)
{
    const double m = (a + b) / 2.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

} // namespace vmtoc

#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "vmtoc/linalg2.hpp"
#include "vmtoc/rng.hpp"

using namespace vmtoc;

namespace {

Matrix2d mat(double a, double b, double c, double d)
{
    Matrix2d m;
    m << a, b, c, d;
    return m;
}

struct Uniform {
    RngState s;
    double operator()(double lo, double hi)
    {
        const auto [n, z] = next_rand(s);
        s = n;
        return lo + (hi - lo) * static_cast<double>(z >> 11) * 0x1.0p-53;
    }
};

} // namespace

TEST_CASE("induced norms on reference matrices")
{
    const Matrix2d m = mat(-1.4, 1, 0.3, 0);
    CHECK(induced_norm(m, NormKind::LInf) == doctest::Approx(2.4));
    CHECK(induced_norm(m, NormKind::L1) == doctest::Approx(1.7));
    CHECK(induced_norm(mat(2, 0, 0, 3), NormKind::L2Spectral) == doctest::Approx(3.0));
    CHECK(induced_norm(Matrix2d::Zero(), NormKind::L2Spectral) == 0.0);
}

TEST_CASE("induced norms accept Eigen expressions")
{
    const Matrix2d m = mat(1, 2, 3, 4);
    CHECK(induced_norm(2.0 * m, NormKind::LInf) == doctest::Approx(14.0));
    CHECK(induced_norm(m.transpose(), NormKind::L1) == doctest::Approx(induced_norm(m, NormKind::LInf)));
}

TEST_CASE("symmetric eigenvalues")
{
    const auto [hi, lo] = sym_eigenvalues(mat(2, 1, 1, 2));
    CHECK(lo == doctest::Approx(1.0));
    CHECK(hi == doctest::Approx(3.0));
    // Nearly equal diagonal with tiny coupling keeps both roots accurate.
    const auto [h2, l2] = sym_eigenvalues(mat(1, 1e-9, 1e-9, 1));
    CHECK(h2 - l2 == doctest::Approx(2e-9).epsilon(1e-6));
}

TEST_CASE("spectral norm dominates and approaches sampled stretch")
{
    Uniform u{RngState{42}};
    for (int trial = 0; trial < 200; ++trial) {
        const Matrix2d m = mat(u(-2, 2), u(-2, 2), u(-2, 2), u(-2, 2));
        const double norm = induced_norm(m, NormKind::L2Spectral);
        double best = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const double t = 2 * std::numbers::pi * k / 1000.0;
            best = std::max(best, (m * Eigen::Vector2d(std::cos(t), std::sin(t))).norm());
        }
        CHECK(best <= norm * (1 + 1e-12));
        CHECK(best >= 0.99 * norm);
    }
}

TEST_CASE("trace-determinant test on reference matrices")
{
    CHECK(trace_det_stable(Matrix2d::Zero()));
    CHECK(trace_det_stable(mat(-2 * 0.4 * 1.4 * 0.631354, 0.4, 0.3, 0)));
    CHECK_FALSE(trace_det_stable(mat(2, 0, 0, 0)));
    // Eigenvalue exactly on the unit circle is not stable.
    CHECK_FALSE(trace_det_stable(mat(1, 0, 0, 0)));
    CHECK_FALSE(trace_det_stable(mat(0, -1, 1, 0)));
}

TEST_CASE("trace-determinant agrees with eigenvalue moduli")
{
    Uniform u{RngState{7}};
    int compared = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const Matrix2d m = mat(u(-2, 2), u(-2, 2), u(-2, 2), u(-2, 2));
        const double rho = Eigen::EigenSolver<Matrix2d>(m, false).eigenvalues().cwiseAbs().maxCoeff();
        if (std::abs(rho - 1.0) < 1e-10)
            continue;
        CHECK(trace_det_stable(m) == (rho < 1.0));
        ++compared;
    }
    CHECK(compared > 9990);
}

TEST_CASE("norm axioms")
{
    Uniform u{RngState{11}};
    for (int trial = 0; trial < 10000; ++trial) {
        const Matrix2d m = mat(u(-3, 3), u(-3, 3), u(-3, 3), u(-3, 3));
        const Matrix2d n = mat(u(-3, 3), u(-3, 3), u(-3, 3), u(-3, 3));
        const Eigen::Vector2d v(u(-1, 1), u(-1, 1));
        for (NormKind k : {NormKind::LInf, NormKind::L1, NormKind::L2Spectral}) {
            REQUIRE(vector_norm(Eigen::Vector2d(m * v), k) <=
                    induced_norm(m, k) * vector_norm(v, k) * (1 + 1e-12));
            REQUIRE(induced_norm(Matrix2d(m * n), k) <= induced_norm(m, k) * induced_norm(n, k) * (1 + 1e-12));
        }
    }
}

TEST_CASE("norm names")
{
    CHECK(to_string(NormKind::LInf) == "linf");
    CHECK(to_string(NormKind::L1) == "l1");
    CHECK(to_string(NormKind::L2Spectral) == "spectral");
}

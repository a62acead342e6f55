#include <doctest.h>

#include <cmath>

#include "vmtoc/stability.hpp"

using namespace vmtoc;

namespace {

const MapParamsd kHenon{MapKind::Henon, 1.4, 0.3};
const MapParamsd kLozi{MapKind::Lozi, 1.4, 0.3};

bool locally_stable(const MapParamsd& p, double alpha, double beta)
{
    const Matrix2d j = jacobian(p, fixed_point(p, Branch::Plus));
    return trace_det_stable(controlled(j, alpha, beta));
}

/// Brute-force expectation over Bernoulli atoms, independent of the closed forms.
double bernoulli_mean(const NuModel& m)
{
    double sum = 0.0;
    for (double s1 : {-1.0, 1.0})
        for (double s2 : {-1.0, 1.0})
            sum += std::log(m.c + m.p * s1 + m.q * s2);
    return sum / 4.0;
}

/// Midpoint rule with many cells, used as an oracle for uniform noise.
double midpoint_mean(const NuModel& m, int cells)
{
    auto inner = [&](double z1) {
        if (m.dist2 == NoiseDist::BernoulliPM1)
            return 0.5 * (std::log(m.c + m.p * z1 - m.q) + std::log(m.c + m.p * z1 + m.q));
        double s = 0.0;
        for (int j = 0; j < cells; ++j) {
            const double z2 = -1.0 + (j + 0.5) * 2.0 / cells;
            s += std::log(m.c + m.p * z1 + m.q * z2);
        }
        return s / cells;
    };
    if (m.dist1 == NoiseDist::BernoulliPM1)
        return 0.5 * (inner(-1.0) + inner(1.0));
    double s = 0.0;
    for (int i = 0; i < cells; ++i)
        s += inner(-1.0 + (i + 0.5) * 2.0 / cells);
    return s / cells;
}

} // namespace

TEST_CASE("local thresholds")
{
    CHECK(std::abs(local_threshold(kHenon, Branch::Plus, 0.0) - 0.51639) < 1e-4);
    CHECK(std::abs(local_threshold(kHenon, Branch::Plus, 0.9) - 0.44376) < 1e-4);
    CHECK(std::abs(local_threshold(kLozi, Branch::Plus, 0.0) - 0.411765) < 1e-5);
    CHECK(std::abs(local_threshold(kLozi, Branch::Plus, 0.9) - 0.3007) < 1e-3);
}

TEST_CASE("local threshold separates stable from unstable control")
{
    for (const auto& p : {kHenon, kLozi}) {
        for (double beta : {0.0, 0.5, 0.9}) {
            const double a = local_threshold(p, Branch::Plus, beta);
            CHECK(locally_stable(p, a + 1e-3, beta));
            CHECK_FALSE(locally_stable(p, a - 1e-3, beta));
        }
    }
}

TEST_CASE("norm thresholds")
{
    CHECK(std::abs(norm_threshold(kHenon, Branch::Plus, 0.01, 0.0, NormKind::LInf) - 0.641) < 2e-3);
    CHECK(std::abs(norm_threshold(kHenon, Branch::Plus, 0.36, 0.0, NormKind::LInf) - 0.694) < 2e-3);
    // The quoted l1 values follow from the linearisation at X* (R -> 0).
    CHECK(std::abs(norm_threshold(kHenon, Branch::Plus, 0.0, 0.0, NormKind::L1) - 0.6041) < 2e-3);
    CHECK(std::abs(norm_threshold(kHenon, Branch::Plus, 0.0, 0.9, NormKind::L1) - 0.4513) < 2e-3);
    // At R = 0.01 the l1 column sums give 1 - 0.7/(a(2x*+R)), i.e. slightly larger.
    const double k1 = 1.4 * (2 * fixed_point(kHenon, Branch::Plus).x() + 0.01);
    CHECK(norm_threshold(kHenon, Branch::Plus, 0.01, 0.0, NormKind::L1) == doctest::Approx(1 - 0.7 / k1));

    CHECK(std::abs(norm_threshold(kLozi, Branch::Plus, 0.0, 0.0, NormKind::LInf) - 0.584) < 1e-3);
    CHECK(norm_threshold(kLozi, Branch::Plus, 0.0, 0.0, NormKind::L1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(norm_threshold(kLozi, Branch::Plus, 0.0, 0.0, NormKind::L2Spectral) - 0.44) < 5e-3);
    CHECK(std::abs(norm_threshold(kLozi, Branch::Plus, 0.0, 0.9, NormKind::L1) - 0.31) < 5e-3);
    CHECK(std::abs(norm_threshold(kLozi, Branch::Plus, 0.0, 0.9, NormKind::L2Spectral) - 0.42) < 5e-3);
}

TEST_CASE("norm threshold separates contraction from expansion")
{
    for (const auto& p : {kHenon, kLozi}) {
        for (NormKind k : {NormKind::LInf, NormKind::L1, NormKind::L2Spectral}) {
            for (double beta : {0.0, 0.5, 0.9}) {
                for (double r : {0.0, 0.1, 0.3}) {
                    const double a = norm_threshold(p, Branch::Plus, r, beta, k);
                    const Matrix2d lip = lipschitz_matrix(p, Branch::Plus, r);
                    if (a + 1e-3 < 1.0)
                        CHECK(induced_norm(controlled(lip, a + 1e-3, beta), k) < 1.0);
                    if (a - 1e-3 > 0.0)
                        CHECK(induced_norm(controlled(lip, a - 1e-3, beta), k) >= 1.0);
                }
            }
        }
    }
}

TEST_CASE("thresholds are monotone in beta and R")
{
    for (const auto& p : {kHenon, kLozi}) {
        double prev_local = 1.0;
        for (int i = 0; i <= 18; ++i) {
            const double beta = 0.05 * i;
            const double local = local_threshold(p, Branch::Plus, beta);
            CHECK(local <= prev_local + 1e-12);
            prev_local = local;
        }
        for (NormKind k : {NormKind::LInf, NormKind::L1, NormKind::L2Spectral}) {
            for (int i = 0; i <= 9; ++i) {
                const double beta = 0.1 * i;
                double prev = 0.0;
                for (int j = 0; j <= 10; ++j) {
                    const double r = 0.04 * j;
                    const double t = norm_threshold(p, Branch::Plus, r, beta, k);
                    CHECK(t >= prev - 1e-9);
                    CHECK(t <= norm_threshold(p, Branch::Plus, r, std::max(0.0, beta - 0.1), k) + 1e-9);
                    prev = t;
                }
            }
        }
    }
}

TEST_CASE("guaranteed-rate thresholds")
{
    const double base = norm_threshold(kLozi, Branch::Plus, 0.0, 0.0, NormKind::LInf);
    const double strict = norm_threshold(kLozi, Branch::Plus, 0.0, 0.0, NormKind::LInf, 0.9);
    CHECK(strict > base);
    CHECK(strict == doctest::Approx(1 - 0.9 / 2.4));
    CHECK_THROWS_AS(norm_threshold(kLozi, Branch::Plus, 0.0, 0.0, NormKind::LInf, 0.0), DomainError);
}

TEST_CASE("one contraction step obeys the norm bound")
{
    RngState s{99};
    auto u = [&](double lo, double hi) { return lo + (hi - lo) * 0.5 * (sample_noise(NoiseDist::UniformM1P1, s) + 1); };
    for (int i = 0; i < 10000; ++i) {
        const MapParamsd& p = (i % 2) ? kHenon : kLozi;
        const NormKind k = std::array{NormKind::LInf, NormKind::L1, NormKind::L2Spectral}[i % 3];
        const Point2d star = fixed_point(p, Branch::Plus);
        const double r = u(0.0, 0.9) * std::abs(star.x());
        const double beta = u(0.0, 0.9);
        const double alpha = u(norm_threshold(p, Branch::Plus, r, beta, k), 1.0);
        const double nu = induced_norm(controlled(lipschitz_matrix(p, Branch::Plus, r), alpha, beta), k);
        Point2d e(u(-r, r), u(-r, r));
        if (vector_norm(e, k) > r)
            e *= r / vector_norm(e, k);
        const Point2d next = vmtoc_step(p, star, alpha, beta, Point2d(star + e));
        REQUIRE(vector_norm(Point2d(next - star), k) <= nu * vector_norm(e, k) + 1e-12);
    }
}

TEST_CASE("per-row control and bounded noise")
{
    const auto a = per_row_control(2.4, 0.3, 0.99);
    CHECK(a.d1 == doctest::Approx(0.5875));
    CHECK(a.d2 == 0.0);
    const auto b = per_row_control(0.5, 0.5, 0.9);
    CHECK(b.d1 == 0.0);
    CHECK(b.d2 == 0.0);
    const auto c = per_row_control(1.0, 1.0, 0.5);
    CHECK(c.d1 == doctest::Approx(0.5));
    CHECK(c.d2 == doctest::Approx(0.5));

    CHECK(bounded_noise_safe(0.7, 0.05, 0.6));
    CHECK_FALSE(bounded_noise_safe(0.7, 0.15, 0.6));
    CHECK_FALSE(bounded_noise_safe(0.5, 0.0, 0.6));
}

TEST_CASE("contraction models")
{
    const auto m = build_nu_model(kHenon, Branch::Plus, 0.0, NormKind::LInf, {0.44, 0.4279}, {0.0, 0.0});
    CHECK(m.c == doctest::Approx(2.7677 * 0.56).epsilon(1e-4));
    CHECK(m.p == doctest::Approx(-2.7677 * 0.4279).epsilon(1e-4));
    CHECK(m.q == 0.0);
    CHECK(m.regime_ok);

    const auto lz = build_nu_model(kLozi, Branch::Plus, 0.0, NormKind::LInf, {0.3, 0.1}, {0.2, 0.1});
    CHECK(1 - 0.2 + 0.1 <= 8 * (1 - 0.3 - 0.1));
    CHECK(lz.regime_ok);

    const auto flat = build_nu_model(kLozi, Branch::Plus, 0.0, NormKind::L1, {0.3, 0.0}, {0.2, 0.0});
    CHECK(flat.p == 0.0);
    CHECK(flat.q == 0.0);

    CHECK_THROWS_AS(build_nu_model(kLozi, Branch::Plus, 0.0, NormKind::L2Spectral, {0.3, 0.0}, {0.2, 0.0}),
                    DomainError);
}

TEST_CASE("expected log contraction reference values")
{
    const auto b = build_nu_model(kHenon, Branch::Plus, 0.0, NormKind::L1, {0.4, 0.2862}, {0.8, 0.0});
    CHECK(std::abs(expected_log_nu(b) - std::log(0.9999)) < 5e-4);
    const auto u = build_nu_model(kHenon, Branch::Plus, 0.0, NormKind::L1, {0.44, 0.2862, NoiseDist::UniformM1P1},
                                  {0.9, 0.0});
    CHECK(std::abs(expected_log_nu(u) + 0.0251) < 1e-3);
    const auto lz = build_nu_model(kLozi, Branch::Plus, 0.0, NormKind::L1, {0.27, 0.2}, {0.9, 0.55});
    CHECK(std::abs(expected_log_nu(lz) - 0.25 * std::log(0.9936)) < 5e-4);
}

TEST_CASE("closed forms against independent oracles")
{
    const std::vector<NuModel> models = {
        {1.5, 0.4, 0.0, NoiseDist::BernoulliPM1, NoiseDist::BernoulliPM1},
        {1.5, 0.4, -0.3, NoiseDist::BernoulliPM1, NoiseDist::BernoulliPM1},
        {1.2, -0.5, 0.0, NoiseDist::UniformM1P1, NoiseDist::BernoulliPM1},
        {1.2, 0.5, 0.2, NoiseDist::UniformM1P1, NoiseDist::BernoulliPM1},
        {1.2, 0.5, 0.2, NoiseDist::BernoulliPM1, NoiseDist::UniformM1P1},
        {2.0, 0.9, -0.6, NoiseDist::UniformM1P1, NoiseDist::UniformM1P1},
        {1.0, 1e-6, 0.0, NoiseDist::UniformM1P1, NoiseDist::BernoulliPM1},
        {1.0, 1e-3, 0.5, NoiseDist::UniformM1P1, NoiseDist::UniformM1P1},
    };
    for (const auto& m : models) {
        const double closed = expected_log_nu(m, {ExpectationKind::ClosedForm});
        const double quad = expected_log_nu(m, {ExpectationKind::Quadrature});
        CHECK(std::abs(closed - quad) < 1e-9);
        const double oracle = (m.dist1 == NoiseDist::BernoulliPM1 && m.dist2 == NoiseDist::BernoulliPM1)
            ? bernoulli_mean(m)
            : midpoint_mean(m, 2000);
        CHECK(std::abs(closed - oracle) < 1e-6);
        // Jensen: E ln nu <= ln E nu = ln c.
        CHECK(closed < std::log(m.c));
    }
}

TEST_CASE("Monte Carlo agrees with the closed form")
{
    const std::vector<NuModel> models = {
        build_nu_model(kHenon, Branch::Plus, 0.0, NormKind::L1, {0.4, 0.2862}, {0.8, 0.0}),
        build_nu_model(kHenon, Branch::Plus, 0.0, NormKind::L1, {0.44, 0.2862, NoiseDist::UniformM1P1}, {0.9, 0.0}),
        build_nu_model(kLozi, Branch::Plus, 0.0, NormKind::L1, {0.27, 0.2}, {0.9, 0.55}),
        build_nu_model(kHenon, Branch::Plus, 0.0, NormKind::LInf, {0.44, 0.4279}, {0.0, 0.0}),
    };
    for (const auto& m : models) {
        const double closed = expected_log_nu(m);
        const auto est = sample_log_nu(m, 1'000'000, 0);
        CHECK(std::abs(est.mean - closed) <= 4 * est.std_error);
        CHECK(expected_log_nu(m, {ExpectationKind::MonteCarlo, 1'000'000, 0}) == est.mean);
    }
}

TEST_CASE("expected_log_nu rejects non-positive contraction factors")
{
    const NuModel bad{1.0, 0.7, 0.4};
    CHECK_THROWS_AS(expected_log_nu(bad), DomainError);
    NuModel off = build_nu_model(kHenon, Branch::Plus, 0.0, NormKind::LInf, {0.3, 0.25}, {0.0, 0.0});
    off.regime_ok = false;
    CHECK_THROWS_AS(expected_log_nu(off), DomainError);
}

TEST_CASE("minimum noise amplitude")
{
    MinNoiseQuery q;
    q.params = kHenon;
    q.alpha1 = 0.44;
    const double ell = min_noise_for_stability(q);
    CHECK(std::abs(ell - 0.4279) < 1e-3);

    // Independent scan: first grid amplitude with a negative Bernoulli log-mean.
    const double k = lipschitz_matrix(kHenon, Branch::Plus, 0.0).row(0).sum();
    double first = -1.0;
    for (int i = 0; i < 56000 && first < 0; ++i) {
        const double l = i * 1e-5;
        const double c = k * (1 - 0.44);
        if (0.5 * std::log((c - k * l) * (c + k * l)) < 0)
            first = l;
    }
    CHECK(std::abs(first - ell) < 2e-5);

    q.alpha1 = 0.43;
    CHECK_THROWS_AS(min_noise_for_stability(q), NoWindow);
    for (int i = 0; i < 4300; ++i) {
        const double l = i * 1e-4;
        const double c = k * (1 - 0.43);
        REQUIRE(0.5 * std::log((c - k * l) * (c + k * l)) >= 0);
    }

    MinNoiseQuery q2;
    q2.params = MapParamsd{MapKind::Henon, 2.0, 0.5};
    q2.norm = NormKind::L1;
    q2.alpha1 = 0.45;
    q2.ch2 = {0.8, 0.0};
    CHECK(std::abs(min_noise_for_stability(q2) - 0.416) < 2e-3);
}

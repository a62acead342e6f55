#include <doctest.h>

#include <cmath>

#include "vmtoc/maps.hpp"

using namespace vmtoc;

namespace {

// Reference equilibria from the textbook quadratic / linear formulas,
// evaluated in long double.
long double henon_x_ref(long double a, long double b, bool plus)
{
    const long double disc = std::sqrt(4 * a + (b - 1) * (b - 1));
    return ((b - 1) + (plus ? disc : -disc)) / (2 * a);
}

long double lozi_x_ref(long double a, long double b, bool plus)
{
    return 1 / (1 + (plus ? a : -a) - b);
}

} // namespace

TEST_CASE("map_step evaluates both families pointwise")
{
    const Point2d p(0.3, 0.1);
    const auto h = map_step(MapParams<double>{MapKind::Henon, 1.4, 0.3}, p);
    CHECK(h.x() == doctest::Approx(0.1 + 1 - 1.4 * 0.09).epsilon(1e-15));
    CHECK(h.y() == doctest::Approx(0.09).epsilon(1e-15));

    const auto l = map_step(MapParams<double>{MapKind::Lozi, 1.4, 0.3}, Point2d(-0.5, 0.2));
    CHECK(l.x() == doctest::Approx(0.2 + 1 - 1.4 * 0.5));
    CHECK(l.y() == doctest::Approx(-0.15));
}

TEST_CASE("fixed points match the closed forms")
{
    const MapParams<double> henon{MapKind::Henon, 1.4, 0.3};
    const auto hp = fixed_point(henon, Branch::Plus);
    CHECK(hp.x() == doctest::Approx(0.631354).epsilon(1e-6));
    CHECK(hp.y() == doctest::Approx(0.3 * hp.x()));
    CHECK(std::abs(hp.x() - static_cast<double>(henon_x_ref(1.4L, 0.3L, true))) < 1e-15);
    const auto hm = fixed_point(henon, Branch::Minus);
    CHECK(std::abs(hm.x() - static_cast<double>(henon_x_ref(1.4L, 0.3L, false))) < 1e-15);

    const auto h2 = fixed_point(MapParams<double>{MapKind::Henon, 2.0, 0.5}, Branch::Plus);
    CHECK(std::abs(h2.x() - 0.593) < 1e-3);

    const MapParams<double> lozi{MapKind::Lozi, 1.4, 0.3};
    CHECK(fixed_point(lozi, Branch::Plus).x() == doctest::Approx(1.0 / 2.1));
    CHECK(fixed_point(lozi, Branch::Minus).x() == doctest::Approx(static_cast<double>(lozi_x_ref(1.4L, 0.3L, false))));
}

TEST_CASE("fixed points are fixed across the parameter square")
{
    int checked = 0;
    for (int i = 1; i <= 60; ++i) {
        for (int j = 1; j <= 19; ++j) {
            const double a = 0.05 * i;
            const double b = 0.05 * j;
            for (MapKind kind : {MapKind::Henon, MapKind::Lozi}) {
                for (Branch br : {Branch::Plus, Branch::Minus}) {
                    const MapParams<double> p{kind, a, b};
                    Point2d star;
                    try {
                        star = fixed_point(p, br);
                    } catch (const DomainError&) {
                        continue;
                    }
                    const double scale = std::max(1.0, star.lpNorm<Eigen::Infinity>());
                    CHECK((map_step(p, star) - star).lpNorm<Eigen::Infinity>() < 1e-12 * scale);
                    ++checked;
                }
            }
        }
    }
    CHECK(checked > 2000);
}

TEST_CASE("fixed_point rejects parameters without an equilibrium")
{
    CHECK_THROWS_AS(fixed_point(MapParams<double>{MapKind::Henon, 0.0, 0.3}, Branch::Plus), DomainError);
    CHECK_THROWS_AS(fixed_point(MapParams<double>{MapKind::Henon, 1.4, -0.1}, Branch::Plus), DomainError);
    // Lozi needs -a < 1 - b < a.
    CHECK_THROWS_AS(fixed_point(MapParams<double>{MapKind::Lozi, 0.5, 0.3}, Branch::Plus), DomainError);
}

TEST_CASE("jacobian agrees with central differences")
{
    const MapParams<double> henon{MapKind::Henon, 1.4, 0.3};
    const Point2d p(0.37, -0.2);
    const double h = 1e-6;
    const Matrix2d j = jacobian(henon, p);
    for (int c = 0; c < 2; ++c) {
        Point2d e = Point2d::Zero();
        e(c) = h;
        const Point2d col = (map_step(henon, Point2d(p + e)) - map_step(henon, Point2d(p - e))) / (2 * h);
        CHECK(j(0, c) == doctest::Approx(col(0)).epsilon(1e-8));
        CHECK(j(1, c) == doctest::Approx(col(1)).epsilon(1e-8));
    }

    const MapParams<double> lozi{MapKind::Lozi, 1.4, 0.3};
    CHECK(jacobian(lozi, Point2d(0.5, 0.0))(0, 0) == -1.4);
    CHECK(jacobian(lozi, Point2d(-0.5, 0.0))(0, 0) == 1.4);
}

TEST_CASE("lipschitz_matrix")
{
    const MapParams<double> lozi{MapKind::Lozi, 1.4, 0.3};
    Matrix2d want;
    want << 1.4, 1.0, 0.3, 0.0;
    CHECK(lipschitz_matrix(lozi, Branch::Plus, 0.1) == want);

    const MapParams<double> henon{MapKind::Henon, 1.4, 0.3};
    CHECK(lipschitz_matrix(henon, Branch::Plus, 0.0)(0, 0) == doctest::Approx(1.76779).epsilon(1e-5));
    const Matrix2d r36 = lipschitz_matrix(henon, Branch::Plus, 0.36);
    CHECK(r36(0, 0) == doctest::Approx(1.4 * (2 * 0.631354 + 0.36)).epsilon(1e-6));
    CHECK(r36.row(0).sum() == doctest::Approx(3.2718).epsilon(1e-4));

    CHECK_THROWS_AS(lipschitz_matrix(henon, Branch::Plus, 0.7), DomainError);
    CHECK_THROWS_AS(lipschitz_matrix(henon, Branch::Plus, -0.1), DomainError);
}

TEST_CASE("maps are generic over the scalar type")
{
    const MapParams<long double> p{MapKind::Henon, 1.4L, 0.3L};
    const auto star = fixed_point(p, Branch::Plus);
    CHECK(std::abs(static_cast<double>(star.x() - henon_x_ref(1.4L, 0.3L, true))) < 1e-18);
    const auto f = map_step(p, star);
    CHECK(std::abs(static_cast<double>(f.x() - star.x())) < 1e-17);
}

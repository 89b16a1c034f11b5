#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oseen/profiles.hpp"
#include "oseen/radial_grid.hpp"

using namespace oseen;
namespace pr = oseen::profiles;

TEST_CASE("gaussian profile values and monotonicity") {
    CHECK(pr::gaussian_profile(0.0) == doctest::Approx(0.0795774715459477).epsilon(1e-12));
    double prev = pr::gaussian_profile(0.0);
    for (double r = 0.1; r < 25.0; r += 0.1) {
        double v = pr::gaussian_profile(r);
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(pr::gaussian_profile(40.0) < 1e-170);
}

TEST_CASE("total circulation of G is 1") {
    // adaptive-style check: quadrature of G * 2 pi r on two resolutions
    auto grid = build_grid(200, 30.0);
    auto fine = build_grid(400, 30.0);
    for (const auto& g : {grid, fine}) {
        Eigen::VectorXd f(g->size());
        for (int i = 0; i < g->size(); ++i)
            f(i) = pr::gaussian_profile(g->nodes()(i)) * 2.0 * pr::pi * g->nodes()(i);
        CHECK(g->quad(f) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("phi limits and pointwise values") {
    CHECK(pr::phi(1e-9) == doctest::Approx(1.0 / (8.0 * pr::pi)).epsilon(1e-14));
    CHECK(pr::phi(2.0) ==
          doctest::Approx((1.0 - std::exp(-1.0)) / (8.0 * pr::pi)).epsilon(1e-14));
    CHECK(pr::g(0.0) == doctest::Approx(1.0 / (4.0 * pr::pi)).epsilon(1e-14));
}

TEST_CASE("phi series and direct branches agree on [0.05, 0.5]") {
    for (double r = 0.05; r <= 0.5; r += 0.004) {
        double a = pr::phi_series(r), b = pr::phi_direct(r);
        CHECK(std::abs(a - b) <= 1e-14 * std::abs(a));
    }
}

TEST_CASE("phi is strictly decreasing with sup 1/(8 pi)") {
    double sup = 1.0 / (8.0 * pr::pi);
    double prev = pr::phi(1e-6);
    CHECK(prev <= sup * (1.0 + 1e-13));
    for (double r = 0.01; r < 30.0; r += 0.01) {
        double v = pr::phi(r);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("g/phi identity from the closed forms") {
    for (double r : {0.3, 1.0, 2.7, 5.0, 9.0}) {
        double lhs = pr::g(r) / pr::phi(r);
        double rhs = r * r * std::exp(-r * r / 4.0) / (2.0 * (1.0 - std::exp(-r * r / 4.0)));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
    }
}

TEST_CASE("azimuthal speed: odd symmetry at 0, golden-section maximiser, far field") {
    CHECK(pr::oseen_azimuthal_speed(0.0) == 0.0);

    // golden-section oracle on the closed form
    double a = 1.0, b = 4.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = pr::oseen_azimuthal_speed(x1), f2 = pr::oseen_azimuthal_speed(x2);
    while (b - a > 1e-12) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2; x2 = a + gr * (b - a);
            f2 = pr::oseen_azimuthal_speed(x2);
        } else {
            b = x2; x2 = x1; f2 = f1; x1 = b - gr * (b - a);
            f1 = pr::oseen_azimuthal_speed(x1);
        }
    }
    double rstar = 0.5 * (a + b);
    CHECK(rstar == doctest::Approx(pr::azimuthal_speed_argmax).epsilon(1e-8));
    CHECK(pr::oseen_azimuthal_speed(rstar) ==
          doctest::Approx(pr::azimuthal_speed_max).epsilon(1e-12));
    CHECK(rstar == doctest::Approx(2.2418).epsilon(1e-4));

    // asymptote 1/(2 pi r)
    CHECK(pr::oseen_azimuthal_speed(100.0) ==
          doctest::Approx(1.0 / (2.0 * pr::pi * 100.0)).epsilon(1e-4));
}

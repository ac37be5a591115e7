#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bes/bounds.hpp"
#include "bes/errors.hpp"
#include "bes/rng.hpp"
#include "support/oracles.hpp"

using namespace bes;

TEST_CASE("classical case: n=2, K=1, theta=0") {
    const BoundSet s = eigenvalue_bounds(BoundQuery{.n = 2, .k = 1.0, .theta = 0.0});
    CHECK(s.cheng == 0.25);
    CHECK(s.optimized_eigen == 0.25);
    REQUIRE(s.theorem_1_1.has_value());
    CHECK(*s.theorem_1_1 == 0.25);
}

TEST_CASE("finite-dimension bound") {
    const BoundSet s = eigenvalue_bounds(BoundQuery{.n = 2, .k = 1.0, .theta = 0.0, .m = 4.0});
    REQUIRE(s.theorem_a.has_value());
    CHECK(*s.theorem_a == 0.75);
}

TEST_CASE("comparison-dimension bound and its optimizer coincide at m0 = n + theta/sqrt(K)") {
    const BoundQuery q{.n = 3, .k = 1.0, .theta = 2.0, .m0 = 5.0};
    const BoundSet s = eigenvalue_bounds(q);
    REQUIRE(s.eq_2_3.has_value());
    CHECK(*s.eq_2_3 == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(s.optimized_eigen == doctest::Approx(4.0).epsilon(1e-15));
    REQUIRE(s.k_tilde.has_value());
    CHECK(*s.k_tilde == doctest::Approx(2.0).epsilon(1e-15));

    // brute-force scan confirms the minimum over m0
    double best = 1e300;
    for (double m0 = 3.0 + 1e-3; m0 <= 100.0; m0 += 1e-3)
        best = std::min(best, dimension_tradeoff(3, 1.0, 2.0, m0));
    CHECK(best >= 16.0 - 1e-9);
    CHECK(best == doctest::Approx(16.0).epsilon(1e-6));
}

TEST_CASE("reduction through the effective curvature constant matches the expansion") {
    CounterRng rng(7, 0);
    for (int i = 0; i < 400; ++i) {
        const int n = rng.uniform_int(2, 10);
        const double k = rng.uniform(0.0, 4.0);
        const double theta = rng.uniform(0.0, 4.0);
        const double m0 = n + rng.uniform(1e-3, 30.0);
        const double nm1 = n - 1.0;
        const double k_tilde = k + theta * theta / ((m0 - n) * nm1);
        const double via_tilde = (m0 - 1.0) * nm1 * k_tilde;
        const double expanded = dimension_tradeoff(n, k, theta, m0);
        CHECK(std::abs(via_tilde - expanded) <= 1e-12 * std::max(1.0, expanded));
    }
}

TEST_CASE("optimizer closed form") {
    SUBCASE("generic") {
        const M0Optimum o = optimize_m0(2, 1.0, 1.0);
        CHECK(o.m0_star == doctest::Approx(3.0));
        CHECK(o.f_star == doctest::Approx(4.0));
        CHECK(o.eigen_bound == doctest::Approx(1.0));
        CHECK_FALSE(o.m0_unbounded);
    }
    SUBCASE("zero gradient term reduces to the classical constant") {
        const M0Optimum o = optimize_m0(5, 1.0, 0.0);
        CHECK(o.m0_star == 5.0);
        CHECK(o.f_star == 16.0);
        CHECK(o.eigen_bound == 4.0);
    }
    SUBCASE("flat curvature gives the gradient-only limit") {
        const M0Optimum o = optimize_m0(2, 0.0, 2.0);
        CHECK(o.m0_unbounded);
        CHECK(std::isinf(o.m0_star));
        CHECK(o.f_star == 4.0);
        CHECK(o.eigen_bound == 1.0);
    }
}

TEST_CASE("optimizer agrees with golden-section search") {
    CounterRng rng(11, 2);
    for (int i = 0; i < 200; ++i) {
        const int n = rng.uniform_int(2, 10);
        const double k = rng.uniform(0.01, 4.0);
        const double theta = rng.uniform(0.01, 4.0);
        const M0Optimum o = optimize_m0(n, k, theta);
        const double hi = n + std::max(1e6, 10.0 * theta / std::sqrt(k));
        const double gs = oracles::golden_section_min(
            [&](double m0) { return dimension_tradeoff(n, k, theta, m0); }, n + 1e-9, hi,
            1e-8);
        CHECK(std::abs(gs - o.m0_star) <= 1e-6 * std::max(1.0, o.m0_star));
        CHECK(dimension_tradeoff(n, k, theta, o.m0_star) ==
              doctest::Approx(o.f_star).epsilon(1e-12));
    }
}

TEST_CASE("product identity for the free-parameter substitution") {
    CounterRng rng(13, 5);
    for (int i = 0; i < 1000; ++i) {
        const int n = rng.uniform_int(2, 10);
        const double theta = rng.uniform(1e-3, 4.0);
        const double kfree = rng.uniform(1e-3, 50.0);
        const double m0 = n + kfree * theta;
        const double lhs = dimension_tradeoff(n, 1.0, theta, m0);
        const double rhs = (n - 1.0 + kfree * theta) * (n - 1.0 + theta / kfree);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("lower envelope: F(m0) >= F* with equality only at the minimizer") {
    CounterRng rng(17, 1);
    for (int i = 0; i < 300; ++i) {
        const int n = rng.uniform_int(2, 8);
        const double k = rng.uniform(0.05, 4.0);
        const double theta = rng.uniform(0.05, 4.0);
        const M0Optimum o = optimize_m0(n, k, theta);
        const double m0 = n + rng.uniform(1e-4, 100.0);
        const double f = dimension_tradeoff(n, k, theta, m0);
        CHECK(f >= o.f_star - 1e-10 * std::max(1.0, o.f_star));
        if (std::abs(m0 - o.m0_star) > 1e-3)
            CHECK(f > o.f_star);
    }
}

TEST_CASE("bounds are nondecreasing in K and theta") {
    CounterRng rng(23, 9);
    for (int i = 0; i < 300; ++i) {
        const int n = rng.uniform_int(2, 6);
        const double k = rng.uniform(0.0, 3.0);
        const double theta = rng.uniform(0.0, 3.0);
        const double dk = rng.uniform(0.0, 1.0);
        const double dtheta = rng.uniform(0.0, 1.0);
        const double base = optimize_m0(n, k, theta).eigen_bound;
        CHECK(optimize_m0(n, k + dk, theta).eigen_bound >= base - 1e-14);
        CHECK(optimize_m0(n, k, theta + dtheta).eigen_bound >= base - 1e-14);
        const double m0 = n + 1.0;
        CHECK(dimension_tradeoff(n, k + dk, theta, m0) >=
              dimension_tradeoff(n, k, theta, m0) - 1e-14);
        CHECK(dimension_tradeoff(n, k, theta + dtheta, m0) >=
              dimension_tradeoff(n, k, theta, m0) - 1e-14);
    }
}

TEST_CASE("global gradient bound closed forms") {
    // equality case: lambda = Q/4 makes the square root vanish
    CHECK(global_gradient_bound(2, 1.0, 1.0, 1.0) == doctest::Approx(1.0));
    // harmonic case lambda = 0 returns Q itself
    CHECK(global_gradient_bound(2, 1.0, 0.0, 0.0) == doctest::Approx(1.0));
    CHECK(global_gradient_bound(3, 1.0, 2.0, 0.0, 5.0) == doctest::Approx(16.0));
    CounterRng rng(31, 4);
    for (int i = 0; i < 200; ++i) {
        const int n = rng.uniform_int(2, 6);
        const double k = rng.uniform(0.0, 2.0);
        const double theta = rng.uniform(0.0, 2.0);
        const double f_star = optimize_m0(n, k, theta).f_star;
        CHECK(global_gradient_bound(n, k, theta, 0.0) ==
              doctest::Approx(f_star).epsilon(1e-12));
        CHECK(global_gradient_bound(n, k, theta, f_star / 4.0) ==
              doctest::Approx(f_star / 4.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(global_gradient_bound(2, 1.0, 0.0, 0.5), NumericError);
}

TEST_CASE("localized gradient bound") {
    {
        const BoundQuery q{.n = 2, .k = 0.0, .theta = 0.0, .m0 = 3.0, .lambda = 0.0,
                           .epsilon = 1.0, .radius = 10.0, .c_local = 10.0};
        CHECK(local_gradient_bound(q) == doctest::Approx(0.2));
    }
    {
        const BoundQuery q{.n = 2, .k = 1.0, .theta = 0.0, .m0 = 3.0, .lambda = 0.0,
                           .epsilon = 1.0, .radius = 1e9, .c_local = 10.0};
        CHECK(local_gradient_bound(q) == doctest::Approx(5.0).epsilon(1e-9));
    }
    // epsilon -> 0 with no cutoff/eigenvalue terms recovers the global Q
    {
        const BoundQuery q{.n = 3, .k = 0.7, .theta = 1.3, .m0 = 5.0, .lambda = 0.0,
                           .epsilon = 1e-6, .radius = 1e9, .c_local = 10.0};
        const double expect = dimension_tradeoff(3, 0.7, 1.3, 5.0);
        CHECK(local_gradient_bound(q) == doctest::Approx(expect).epsilon(1e-5));
    }
}

TEST_CASE("soliton arithmetic bounds") {
    CHECK(soliton_bound(SolitonBoundKind::Steady, {.a = 2.0}) == 1.0);
    CHECK(soliton_bound(SolitonBoundKind::Shrinking, {.rho = 1.0, .b = 2.0}) == 1.0);
    CHECK(soliton_bound(SolitonBoundKind::ShrinkingTrace, {.rho = 1.0}) == 2.0);
    CHECK(soliton_bound(SolitonBoundKind::ExpandingGradient,
                        {.n = 2, .rho = -1.0, .c = 1.0}) == 0.0);
    CHECK(soliton_bound(SolitonBoundKind::ExpandingGradient,
                        {.n = 4, .rho = -1.0, .c = 0.0}) == 4.0);
    CHECK_THROWS_AS(soliton_bound(SolitonBoundKind::ExpandingGradient,
                                  {.n = 2, .rho = -1.0, .c = 2.0}),
                    ValidationError);
    CHECK_THROWS_AS(soliton_bound(SolitonBoundKind::Shrinking, {.rho = -1.0, .b = 1.0}),
                    ValidationError);
}

TEST_CASE("query validation") {
    CHECK_THROWS_AS(validate(BoundQuery{.n = 1}), ValidationError);
    CHECK_THROWS_AS(validate(BoundQuery{.n = 2, .k = -1.0}), ValidationError);
    CHECK_THROWS_AS(validate(BoundQuery{.n = 2, .m0 = 2.0}), ValidationError);
    CHECK_THROWS_AS(validate(BoundQuery{.n = 2, .epsilon = 2.0}), ValidationError);
    CHECK_THROWS_AS(eigenvalue_bounds(BoundQuery{.n = 3, .theta = -0.5}), ValidationError);
}

TEST_CASE("envelope relation inside a bound set") {
    CounterRng rng(41, 8);
    for (int i = 0; i < 200; ++i) {
        const int n = rng.uniform_int(2, 7);
        BoundQuery q{.n = n,
                     .k = rng.uniform(0.0, 3.0),
                     .theta = rng.uniform(0.0, 3.0),
                     .m0 = n + rng.uniform(1e-3, 20.0)};
        const BoundSet s = eigenvalue_bounds(q);
        REQUIRE(s.eq_2_3.has_value());
        CHECK(s.optimized_eigen <= *s.eq_2_3 + 1e-12 * std::max(1.0, *s.eq_2_3));
    }
}

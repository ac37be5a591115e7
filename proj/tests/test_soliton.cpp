#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bes/errors.hpp"
#include "bes/soliton.hpp"

using namespace bes;

TEST_CASE("Gaussian model identities are exact") {
    for (int n : {1, 2, 4}) {
        for (double rho : {0.5, 1.0, 2.0}) {
            const auto audits = gaussian_shrinker_audit(n, rho, 0.05, 5.0, 256);
            REQUIRE(audits.size() == 4);
            for (const IdentityAudit &a : audits) {
                CHECK_MESSAGE(a.residual_sup <= 1e-10, a.name, " residual ",
                              a.residual_sup, " (n=", n, ", rho=", rho, ")");
                CHECK(a.pass);
            }
        }
    }
    // one-dimensional arithmetic: 0 + rho = 1 * rho
    const auto one_d = gaussian_shrinker_audit(1, 2.0, 0.1, 3.0, 64);
    CHECK(one_d[0].residual_sup <= 1e-12);
    CHECK_THROWS_AS(gaussian_shrinker_audit(2, -1.0, 0.1, 1.0, 32), ValidationError);
}

TEST_CASE("Gaussian drift spectrum sits at rho below the trace bound") {
    for (double rho : {1.0, 2.0}) {
        const OuSpectrumReport rep = ou_spectrum_check(2, rho);
        CHECK(std::abs(rep.lambda1 - rho) <= 1e-4);
        CHECK(rep.lambda1 <= rep.trace_bound);
        CHECK(rep.closed_form_residual <= 1e-12);
        CHECK(std::abs(rep.lambda2 - 3.0 * rho) <= 3e-3 * rho);
        CHECK(rep.pass);
    }
}

TEST_CASE("drift scaling covariance") {
    for (double rho : {0.5, 1.0, 2.0, 4.0}) {
        const OuSpectrumReport rep = ou_spectrum_check(1, rho);
        CHECK(std::abs(rep.lambda1 / rho - 1.0) <= 1e-3);
    }
}

TEST_CASE("steady linear audit attains the bound by exhaustion") {
    const SteadyLinearReport rep = steady_linear_audit(2, 2.0);
    CHECK(rep.bound == 1.0);
    CHECK(std::abs(rep.extrapolated_lambda - 1.0) <= 3e-3);
    CHECK(rep.norm_residual == 0.0);
    CHECK(rep.pass);

    const SteadyLinearReport zero = steady_linear_audit(2, 0.0);
    CHECK(zero.bound == 0.0);
    CHECK(std::abs(zero.extrapolated_lambda) <= 3e-3);
    CHECK(zero.pass);
}

TEST_CASE("expanding bound chain arithmetic") {
    const ExpandingGradientReport degenerate = expanding_gradient_audit(2, -1.0, 1.0);
    CHECK(degenerate.theta_sq == 0.0);
    CHECK(degenerate.theta == 0.0);
    CHECK(degenerate.chain_ok);

    const ExpandingGradientReport wide = expanding_gradient_audit(4, -1.0, 0.0);
    CHECK(wide.theta_sq == 4.0);
    CHECK(wide.theta == 2.0);
    CHECK(wide.chain_ok);
    CHECK(wide.eigen_bound > 0.0);

    CHECK_THROWS_AS(expanding_gradient_audit(2, -1.0, 2.0), ValidationError);
    CHECK_THROWS_AS(expanding_gradient_audit(2, 1.0, 0.0), ValidationError);
}

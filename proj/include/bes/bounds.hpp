#pragma once

#include <optional>

namespace bes {

// Inputs for the closed-form eigenvalue / gradient bounds. Optional fields
// activate the corresponding outputs.
struct BoundQuery {
    int n = 2;
    double k = 1.0;       // curvature constant K >= 0
    double theta = 0.0;   // gradient bound on the weight, >= 0
    std::optional<double> m0;       // comparison dimension, strictly > n
    std::optional<double> m;        // fixed finite dimension parameter, >= n
    std::optional<double> lambda;   // candidate eigenvalue, >= 0
    std::optional<double> epsilon;  // localization parameter in (0, 2)
    std::optional<double> radius;   // ball radius R > 0
    std::optional<double> c_local;  // cutoff constant for the local estimate
};

void validate(const BoundQuery &q);

struct BoundSet {
    double cheng = 0.0;                    // (n-1)^2/4, the classical reference
    std::optional<double> theorem_a;       // (m-1)(n-1)/4
    std::optional<double> eq_2_3;          // ((m0-1)(n-1)K + (m0-1)theta^2/(m0-n))/4
    std::optional<double> k_tilde;         // K + theta^2/((m0-n)(n-1))
    std::optional<double> theorem_1_1;     // (n-1+theta)^2/4, populated when K = 1
    double optimized_eigen = 0.0;          // ((n-1)sqrt(K)+theta)^2/4
};

BoundSet eigenvalue_bounds(const BoundQuery &q);

/// F(m0) = (m0-1)(n-1)K + (m0-1)theta^2/(m0-n); the eigenvalue bound is F/4.
double dimension_tradeoff(int n, double k, double theta, double m0);

struct M0Optimum {
    double m0_star = 0.0;     // minimizer; boundary value n when theta = 0
    bool m0_unbounded = false; // K = 0 with theta > 0: infimum only as m0 grows
    double f_star = 0.0;      // inf F
    double eigen_bound = 0.0; // f_star / 4
};

/// Minimize F over m0 in (n, infinity). Closed form:
/// m0* = n + theta/sqrt(K) and F* = ((n-1)sqrt(K) + theta)^2 when K,theta > 0.
M0Optimum optimize_m0(int n, double k, double theta);

/// Right-hand side of the global log-gradient estimate,
///   Q/2 - lambda + sqrt(Q^2/4 - Q lambda),
/// with Q = F(m0) when m0 is supplied, else the optimized Q =
/// ((n-1)sqrt(K)+theta)^2. Requires lambda <= Q/4.
double global_gradient_bound(int n, double k, double theta, double lambda,
                             std::optional<double> m0 = std::nullopt);

/// Right-hand side of the ball-localized gradient estimate; the cutoff
/// constant C is caller configuration (the estimate only asserts existence).
double local_gradient_bound(const BoundQuery &q);

enum class SolitonBoundKind { Steady, Shrinking, ShrinkingTrace, ExpandingGradient };

struct SolitonBoundParams {
    int n = 2;
    double a = 0.0;    // steady normalization constant
    double rho = 0.0;  // soliton constant
    double b = 0.0;    // upper bound on the potential (shrinking)
    double c = 0.0;    // lower bound on the potential (expanding)
};

/// Steady: a^2/4. Shrinking with potential <= b: rho*b/2. Shrinking via the
/// trace identity: 2*rho. Expanding with potential >= c (c <= n/2): the
/// gradient bound -n*rho + 2*c*rho on |grad phi|^2 (not an eigenvalue bound).
double soliton_bound(SolitonBoundKind kind, const SolitonBoundParams &p);

} // namespace bes

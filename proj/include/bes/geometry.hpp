#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bes/expr.hpp"

namespace bes {

// One-radial-variable weighted warped product: metric dt^2 + a(t)^2 g_N on
// R x N with weight phi(t). The fiber enters only through a lower Ricci
// bound kappa_N; no fiber metric is ever constructed.
struct WarpedModel {
    std::string name;
    int n = 2;                     // total dimension, n >= 2
    ExprAst warp;                  // a(t) > 0 on the domain
    ExprAst weight;                // phi(t)
    double fiber_ricci_lb = 0.0;   // kappa_N >= 0
    double t_lo = 0.0;
    double t_hi = 1.0;
    Params params;                 // late-bound names; "n" is bound automatically
};

WarpedModel make_model(std::string name, int n, const std::string &warp_src,
                       const std::string &weight_src, double fiber_ricci_lb,
                       double t_lo, double t_hi, Params params = {});

/// Model parameters with the dimension bound under "n".
Params bound_params(const WarpedModel &m);

// Sampled Bakry-Emery curvature data along the radial direction.
//   ric_l_radial        = -(n-1) a''/a + phi''
//   ric_l_tangential_lb = kappa_N/a^2 - (a''/a + (n-2)(a'/a)^2) + (a'/a) phi'
// The tangential entry includes the fiber Hessian term (a'/a) phi' of a
// radial weight; it is part of the tensor and is never dropped.
struct CurvatureProfile {
    int n = 2;
    std::vector<double> grid;
    std::vector<double> ric_l_radial;
    std::vector<double> ric_l_tangential_lb;
    std::vector<double> dphi;

    /// Finite-dimension variant restricted radially:
    /// ric_l_radial - (phi')^2/(m0 - n).
    double ric_mn_radial(std::size_t i, double m0) const;
};

CurvatureProfile curvature_profile(const WarpedModel &model, int samples);

struct CurvatureViolation {
    double t;
    std::string component; // "ric_radial" | "ric_tangential" | "grad_phi"
    double value;
};

// Grid-based certificate of the curvature and drift-gradient hypotheses.
// Without targets it reports the smallest constants valid on the sample
// grid; with targets it records every sampled violation instead.
struct HypothesisCertificate {
    double k_certified = 0.0;      // Ric(L) >= -(n-1) K on the grid
    double theta_certified = 0.0;  // |phi'| <= theta on the grid
    double grid_spacing = 0.0;
    std::vector<CurvatureViolation> violations;
    bool certified = true;
    bool has_targets = false;
    double target_k = 0.0;
    double target_theta = 0.0;
};

HypothesisCertificate certify_hypotheses(const WarpedModel &model, int samples);
HypothesisCertificate certify_hypotheses(const WarpedModel &model, int samples,
                                         double target_k, double target_theta);

struct DriftWeight {
    double drift;    // b(t) = (n-1) a'/a - phi'
    double density;  // w(t) = a(t)^(n-1) e^(-phi(t))
};

/// Radial drift and measure density at t: L f = f'' + b f' on radial
/// functions, and (w f')'/w = f'' + b f' identically.
DriftWeight drift_and_weight(const WarpedModel &model, double t);

/// Jet of ln w(t): value, b(t) = d/dt ln w, and b'(t). Computed in log
/// space so extreme weights neither overflow nor underflow.
Jet2 log_weight_jet(const WarpedModel &model, double t);

/// Uniform grid with `samples` points covering [lo, hi].
std::vector<double> uniform_grid(double lo, double hi, int samples);

} // namespace bes

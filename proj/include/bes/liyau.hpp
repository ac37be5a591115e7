#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bes/geometry.hpp"
#include "bes/solver.hpp"

namespace bes {

// Radial bump used by the localized maximum-principle argument: identically
// 1 on [0,R], cosine-squared on (R,2R), 0 beyond. The shape is C^1 at both
// glue points and admits a closed-form certified constant.
struct CutoffProfile {
    double radius = 1.0; // R
    std::vector<double> grid; // samples of [0, 2R]
    std::vector<double> chi;
    std::vector<double> chi_d1;
    std::vector<double> chi_d2;
    // Smallest C with -C sqrt(chi) <= chi' <= 0 and chi'' >= -C on the grid.
    double certified_c = 0.0;
};

CutoffProfile build_cutoff(double radius, int samples);

double cutoff_chi(double radius, double rho);
double cutoff_chi_d1(double radius, double rho);
double cutoff_chi_d2(double radius, double rho);

struct VerifierConfig {
    double c_cutoff = 64.0;        // configured cutoff constant
    double c7 = 64.0;              // configured quadratic-certificate constant
    double interior_margin = 0.10; // fraction of the interval excluded per side
    double tolerance = 1e-8;
    int cutoff_samples = 10001;
};

struct GradientCheckParams {
    double k = 1.0;
    double theta = 0.0;
    std::optional<double> m0;
    // Bound evaluated at this eigenvalue instead of the discrete one; pass
    // the domain-extrapolated value when the finite-truncation lambda sits
    // above the global bound.
    std::optional<double> lambda_override;
};

// Fields a check does not compute stay NaN and are omitted from reports.
struct LiYauReport {
    static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

    std::string check;
    bool pass = false;
    double tolerance = 0.0;
    double lambda_used = kUnset;
    double max_log_gradient_sq = kUnset; // sup of (ln f)'^2 over the probed region
    double bound_used = kUnset;
    double margin = kUnset;
    double location = kUnset;
    double sigma_r = kUnset;
    double g_max = kUnset;
    double a_value = kUnset;
    std::pair<double, double> quadratic_roots{kUnset, kUnset};
    double discriminant = kUnset;
    double c7_used = kUnset;
    double c7_measured = kUnset;
    double c1_measured = kUnset;
    double c2_measured = kUnset;
    double cutoff_c = kUnset;
    std::string note;
};

/// Global log-gradient estimate against a solver eigenfunction: h = ln f,
/// h' by central differences, sup over the interior band.
LiYauReport check_global_gradient(const WarpedModel &model, const EigenResult &eig,
                                  const GradientCheckParams &params,
                                  const VerifierConfig &cfg);

/// Same check with a closed-form positive eigenfunction; derivatives exact.
LiYauReport check_global_gradient_closed_form(const WarpedModel &model,
                                              const ExprAst &f, double lambda,
                                              double lo, double hi, int samples,
                                              const GradientCheckParams &params,
                                              const VerifierConfig &cfg);

// Radial identity satisfied by h along the flow of L:
//   L(h'^2) = 2[h''^2 + (n-1)(a'/a)^2 h'^2] + 2 Ric(L)_rad h'^2 + 2 h' (Lh)'.
// When `assume_lambda` is set, the last term is replaced by the displayed
// form -2 h' (h'^2)', which presumes Lh = -h'^2 - lambda (h = ln f of an
// eigenfunction); the residual then checks identity and assumption jointly.
double bochner_residual(const WarpedModel &model, const ExprAst &h, double lo,
                        double hi, int samples, DerivMode mode,
                        std::optional<double> assume_lambda = std::nullopt);

/// Finite-difference variant on sampled h values (uniform grid).
double bochner_residual_samples(const WarpedModel &model,
                                const std::vector<double> &grid,
                                const std::vector<double> &h_samples,
                                std::optional<double> assume_lambda = std::nullopt);

/// Pointwise minimum margin of the Hessian refinement inequality
///   2[h''^2+(n-1)(a'/a)^2 h'^2] >= 2 m0/(m0-1) h''^2
///     + 2[(Lh)^2 - 2 h'' Lh]/(m0-1) - 2 theta^2 h'^2/(m0-n)
/// valid for any radial h whenever |phi'| <= theta. With `assume_lambda`,
/// -Lh is replaced by h'^2 + lambda as displayed.
double hessian_refinement_margin(const WarpedModel &model, const ExprAst &h,
                                 double lo, double hi, int samples, double theta,
                                 double m0,
                                 std::optional<double> assume_lambda = std::nullopt);

/// Drift comparison along the forward ray from t0: b(t) must stay below
/// (n-1)sqrt(K) coth(sqrt(K)(t-t0)) + theta (K=0: (n-1)/(t-t0) + theta).
/// Refuses to run unless the radial curvature component and |phi'| certify
/// against (K, theta) - the hypothesis the radial argument consumes.
LiYauReport check_laplacian_comparison(const WarpedModel &model, double t0,
                                       double k, double theta, int samples,
                                       const VerifierConfig &cfg);

struct GCertificateParams {
    double k = 1.0;
    double theta = 0.0;
    double m0 = 3.0;
    double epsilon = 0.1;
    double t0 = 0.0; // ball center; balls are the intervals [t0-R, t0+R]
    std::optional<double> lambda_override;
};

/// Quadratic maximum-principle certificate for G = chi * h'^2: computes
/// sigma(R), A, the discriminant, checks G_max against the upper root, and
/// measures the smallest feasible certificate constant by bisection.
LiYauReport g_certificate(const WarpedModel &model, const EigenResult &eig,
                          const CutoffProfile &cutoff,
                          const GCertificateParams &params,
                          const VerifierConfig &cfg);

} // namespace bes

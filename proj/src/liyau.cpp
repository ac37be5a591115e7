#include "bes/liyau.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bes/bounds.hpp"
#include "bes/errors.hpp"

namespace bes {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct RadialCoeffs {
    double la;      // a'/a
    double ric_rad; // -(n-1) a''/a + phi''
    double b;       // (n-1) a'/a - phi'
    double db;      // b'
    double dphi;    // phi'
};

RadialCoeffs radial_coeffs(const WarpedModel &model, const Params &p, double t) {
    const Jet2 a = eval_d2(model.warp, t, p);
    if (!(a.v > 0.0)) throw NumericError("warp nonpositive at t = " + std::to_string(t));
    const Jet2 phi = eval_d2(model.weight, t, p);
    const double nm1 = model.n - 1.0;
    const double la = a.d1 / a.v;
    const double aa = a.d2 / a.v;
    RadialCoeffs c;
    c.la = la;
    c.ric_rad = -nm1 * aa + phi.d2;
    c.b = nm1 * la - phi.d1;
    c.db = nm1 * (aa - la * la) - phi.d2;
    c.dphi = phi.d1;
    return c;
}

struct Band {
    std::size_t lo, hi; // inclusive index range
};

Band interior_band(const std::vector<double> &grid, double margin_fraction) {
    const double lo = grid.front(), hi = grid.back();
    const double len = hi - lo;
    const double blo = lo + margin_fraction * len;
    const double bhi = hi - margin_fraction * len;
    std::size_t i0 = 0, i1 = grid.size() - 1;
    while (i0 < grid.size() && grid[i0] < blo) ++i0;
    while (i1 > 0 && grid[i1] > bhi) --i1;
    if (i0 + 5 > i1)
        throw ValidationError("interior band too thin for the requested margin");
    return {i0, i1};
}

// h = ln f and its central-difference derivative over [band.lo, band.hi].
// Requires positive, trusted samples across the band (one extra point each
// side for the stencil).
std::vector<double> log_gradient(const EigenResult &eig, Band band) {
    if (band.lo == 0 || band.hi + 1 >= eig.grid.size())
        throw ValidationError("interior band touches the boundary");
    std::vector<double> h(eig.grid.size(), 0.0);
    for (std::size_t i = band.lo - 1; i <= band.hi + 1; ++i) {
        if (!eig.trusted[i] || !(eig.eigenfunction[i] > 0.0))
            throw NumericError(
                "nonpositive or untrusted eigenfunction sample inside the interior band "
                "(band too thin)");
        h[i] = std::log(eig.eigenfunction[i]);
    }
    std::vector<double> hp(eig.grid.size(), kNan);
    const double two_h = 2.0 * eig.h;
    for (std::size_t i = band.lo; i <= band.hi; ++i)
        hp[i] = (h[i + 1] - h[i - 1]) / two_h;
    return hp;
}

} // namespace

double cutoff_chi(double radius, double rho) {
    rho = std::abs(rho);
    if (rho <= radius) return 1.0;
    if (rho >= 2.0 * radius) return 0.0;
    const double u = kPi * (rho - radius) / (2.0 * radius);
    const double c = std::cos(u);
    return c * c;
}

double cutoff_chi_d1(double radius, double rho) {
    rho = std::abs(rho);
    if (rho <= radius || rho >= 2.0 * radius) return 0.0;
    const double u = kPi * (rho - radius) / (2.0 * radius);
    return -(kPi / (2.0 * radius)) * std::sin(2.0 * u);
}

double cutoff_chi_d2(double radius, double rho) {
    rho = std::abs(rho);
    if (rho <= radius || rho >= 2.0 * radius) return 0.0;
    const double u = kPi * (rho - radius) / (2.0 * radius);
    return -(kPi * kPi / (2.0 * radius * radius)) * std::cos(2.0 * u);
}

CutoffProfile build_cutoff(double radius, int samples) {
    if (!(radius > 0.0)) throw ValidationError("cutoff radius must be > 0");
    if (samples < 100) throw ValidationError("cutoff profile needs at least 100 samples");
    CutoffProfile prof;
    prof.radius = radius;
    prof.grid = uniform_grid(0.0, 2.0 * radius, samples);
    const std::size_t m = prof.grid.size();
    prof.chi.resize(m);
    prof.chi_d1.resize(m);
    prof.chi_d2.resize(m);
    double c_needed = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double rho = prof.grid[i];
        prof.chi[i] = cutoff_chi(radius, rho);
        prof.chi_d1[i] = cutoff_chi_d1(radius, rho);
        prof.chi_d2[i] = cutoff_chi_d2(radius, rho);
        if (prof.chi[i] > 0.0)
            c_needed = std::max(c_needed, -prof.chi_d1[i] / std::sqrt(prof.chi[i]));
        c_needed = std::max(c_needed, -prof.chi_d2[i]);
    }
    prof.certified_c = c_needed;
    return prof;
}

LiYauReport check_global_gradient(const WarpedModel &model, const EigenResult &eig,
                                  const GradientCheckParams &params,
                                  const VerifierConfig &cfg) {
    LiYauReport rep;
    rep.check = "global_gradient";
    rep.tolerance = cfg.tolerance;
    rep.lambda_used = params.lambda_override.value_or(eig.lambda);

    const Band band = interior_band(eig.grid, cfg.interior_margin);
    const std::vector<double> hp = log_gradient(eig, band);
    double sup = -1.0, where = eig.grid[band.lo];
    for (std::size_t i = band.lo; i <= band.hi; ++i) {
        const double v = hp[i] * hp[i];
        if (v > sup) {
            sup = v;
            where = eig.grid[i];
        }
    }
    rep.max_log_gradient_sq = sup;
    rep.location = where;
    rep.bound_used =
        global_gradient_bound(model.n, params.k, params.theta, rep.lambda_used, params.m0);
    rep.margin = rep.bound_used - sup;
    rep.pass = rep.margin >= -cfg.tolerance;
    return rep;
}

LiYauReport check_global_gradient_closed_form(const WarpedModel &model,
                                              const ExprAst &f, double lambda,
                                              double lo, double hi, int samples,
                                              const GradientCheckParams &params,
                                              const VerifierConfig &cfg) {
    LiYauReport rep;
    rep.check = "global_gradient_closed_form";
    rep.tolerance = cfg.tolerance;
    rep.lambda_used = params.lambda_override.value_or(lambda);
    const Params p = bound_params(model);
    const std::vector<double> grid = uniform_grid(lo, hi, samples);
    double sup = -1.0, where = lo;
    for (double t : grid) {
        const Jet2 jf = eval_d2(f, t, p);
        if (!(jf.v > 0.0))
            throw NumericError("closed-form eigenfunction nonpositive at t = " +
                               std::to_string(t));
        const double hprime = jf.d1 / jf.v;
        if (hprime * hprime > sup) {
            sup = hprime * hprime;
            where = t;
        }
    }
    rep.max_log_gradient_sq = sup;
    rep.location = where;
    rep.bound_used =
        global_gradient_bound(model.n, params.k, params.theta, rep.lambda_used, params.m0);
    rep.margin = rep.bound_used - sup;
    rep.pass = rep.margin >= -cfg.tolerance;
    return rep;
}

namespace {

double bochner_point(const WarpedModel &model, const RadialCoeffs &c, double h1,
                     double h2, double h3, std::optional<double> assume_lambda) {
    const double nm1 = model.n - 1.0;
    const double gsq_d1 = 2.0 * h1 * h2;
    const double gsq_d2 = 2.0 * h2 * h2 + 2.0 * h1 * h3;
    const double lhs = gsq_d2 + c.b * gsq_d1;
    const double hess2 = h2 * h2 + nm1 * c.la * c.la * h1 * h1;
    double transport;
    if (assume_lambda) {
        transport = -2.0 * h1 * gsq_d1; // displayed form, Lh = -h'^2 - lambda
    } else {
        const double lh_d1 = h3 + c.db * h1 + c.b * h2;
        transport = 2.0 * h1 * lh_d1;
    }
    const double rhs = 2.0 * hess2 + 2.0 * c.ric_rad * h1 * h1 + transport;
    return lhs - rhs;
}

} // namespace

double bochner_residual(const WarpedModel &model, const ExprAst &h, double lo,
                        double hi, int samples, DerivMode mode,
                        std::optional<double> assume_lambda) {
    const Params p = bound_params(model);
    const std::vector<double> grid = uniform_grid(lo, hi, samples);
    if (mode == DerivMode::Fd) {
        std::vector<double> hs(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) hs[i] = eval_value(h, grid[i], p);
        return bochner_residual_samples(model, grid, hs, assume_lambda);
    }
    double sup = 0.0;
    for (double t : grid) {
        const Jet3 jh = eval_d3(h, t, p);
        const RadialCoeffs c = radial_coeffs(model, p, t);
        sup = std::max(sup, std::abs(bochner_point(model, c, jh.d1, jh.d2, jh.d3,
                                                   assume_lambda)));
    }
    return sup;
}

double bochner_residual_samples(const WarpedModel &model,
                                const std::vector<double> &grid,
                                const std::vector<double> &h_samples,
                                std::optional<double> assume_lambda) {
    const std::size_t n = grid.size();
    if (n < 9 || h_samples.size() != n)
        throw ValidationError("finite-difference residual needs >= 9 matching samples");
    const double h = grid[1] - grid[0];
    const Params p = bound_params(model);
    const double nm1 = model.n - 1.0;

    // The two sides must come from different numerical routes: the left one
    // differences the sampled h'^2 array, the right one uses direct stencils
    // on h. (Expanding the left side through h-stencils would cancel the
    // discretization error term by term and test nothing.)
    std::vector<double> hp(n, 0.0), gsq(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        hp[i] = (h_samples[i + 1] - h_samples[i - 1]) / (2.0 * h);
        gsq[i] = hp[i] * hp[i];
    }
    double sup = 0.0;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const double gsq_d1 = (gsq[i + 1] - gsq[i - 1]) / (2.0 * h);
        const double gsq_d2 = (gsq[i + 1] - 2.0 * gsq[i] + gsq[i - 1]) / (h * h);
        const double d2 = (h_samples[i + 1] - 2.0 * h_samples[i] + h_samples[i - 1]) / (h * h);
        const double d3 = (-h_samples[i - 2] + 2.0 * h_samples[i - 1] -
                           2.0 * h_samples[i + 1] + h_samples[i + 2]) /
                          (2.0 * h * h * h);
        const RadialCoeffs c = radial_coeffs(model, p, grid[i]);
        const double lhs = gsq_d2 + c.b * gsq_d1;
        const double hess2 = d2 * d2 + nm1 * c.la * c.la * hp[i] * hp[i];
        const double transport = assume_lambda
                                     ? -2.0 * hp[i] * gsq_d1
                                     : 2.0 * hp[i] * (d3 + c.db * hp[i] + c.b * d2);
        const double rhs = 2.0 * hess2 + 2.0 * c.ric_rad * hp[i] * hp[i] + transport;
        sup = std::max(sup, std::abs(lhs - rhs));
    }
    return sup;
}

double hessian_refinement_margin(const WarpedModel &model, const ExprAst &h,
                                 double lo, double hi, int samples, double theta,
                                 double m0, std::optional<double> assume_lambda) {
    if (!(m0 > model.n)) throw ValidationError("m0 must exceed n");
    if (theta < 0.0) throw ValidationError("theta must be >= 0");
    const Params p = bound_params(model);
    const std::vector<double> grid = uniform_grid(lo, hi, samples);
    const double nm1 = model.n - 1.0;
    double min_margin = std::numeric_limits<double>::infinity();
    for (double t : grid) {
        const Jet2 jh = eval_d2(h, t, p);
        const RadialCoeffs c = radial_coeffs(model, p, t);
        if (std::abs(c.dphi) > theta * (1.0 + 1e-12) + 1e-12)
            throw ValidationError("hypothesis |phi'| <= theta fails at t = " +
                                  std::to_string(t));
        const double h1 = jh.d1, h2 = jh.d2;
        const double neg_lh =
            assume_lambda ? (h1 * h1 + *assume_lambda) : -(h2 + c.b * h1);
        const double lhs = 2.0 * (h2 * h2 + nm1 * c.la * c.la * h1 * h1);
        const double rhs = 2.0 * (m0 / (m0 - 1.0)) * h2 * h2 +
                           2.0 * (neg_lh * neg_lh + 2.0 * h2 * neg_lh) / (m0 - 1.0) -
                           2.0 * theta * theta * h1 * h1 / (m0 - model.n);
        min_margin = std::min(min_margin, lhs - rhs);
    }
    return min_margin;
}

LiYauReport check_laplacian_comparison(const WarpedModel &model, double t0,
                                       double k, double theta, int samples,
                                       const VerifierConfig &cfg) {
    if (t0 < model.t_lo || t0 >= model.t_hi)
        throw ValidationError("t0 must lie inside the model domain");
    // The ray comparison rests on the radial curvature component and the
    // drift-gradient bound; certify exactly that hypothesis before asserting
    // the conclusion.
    {
        const CurvatureProfile prof = curvature_profile(model, samples);
        const double floor_k = -(model.n - 1.0) * k;
        const double slack_k = 1e-12 * std::max(1.0, std::abs(floor_k));
        const double slack_t = 1e-12 * std::max(1.0, theta);
        for (std::size_t i = 0; i < prof.grid.size(); ++i) {
            if (prof.ric_l_radial[i] < floor_k - slack_k ||
                std::abs(prof.dphi[i]) > theta + slack_t)
                throw NumericError(
                    "model not certified for the supplied (K, theta) along the "
                    "radial direction; refusing the comparison check");
        }
    }
    LiYauReport rep;
    rep.check = "laplacian_comparison";
    rep.tolerance = cfg.tolerance;
    const double nm1 = model.n - 1.0;
    const double step = (model.t_hi - t0) / samples;
    double min_margin = std::numeric_limits<double>::infinity();
    double where = t0 + step;
    for (int j = 1; j <= samples; ++j) {
        const double t = t0 + step * j;
        const double rho = t - t0;
        const double lhs = log_weight_jet(model, t).d1;
        const double rhs = k > 0.0
                               ? nm1 * std::sqrt(k) / std::tanh(std::sqrt(k) * rho) + theta
                               : nm1 / rho + theta;
        const double margin = rhs - lhs;
        if (margin < min_margin) {
            min_margin = margin;
            where = t;
        }
    }
    rep.margin = min_margin;
    rep.location = where;
    rep.pass = min_margin >= -cfg.tolerance;
    return rep;
}

LiYauReport g_certificate(const WarpedModel &model, const EigenResult &eig,
                          const CutoffProfile &cutoff,
                          const GCertificateParams &params,
                          const VerifierConfig &cfg) {
    if (!(params.epsilon > 0.0 && params.epsilon < 2.0))
        throw ValidationError("epsilon must satisfy 0 < epsilon < 2");
    if (!(params.m0 > model.n)) throw ValidationError("m0 must exceed n");

    LiYauReport rep;
    rep.check = "g_certificate";
    rep.tolerance = cfg.tolerance;
    rep.cutoff_c = cutoff.certified_c;
    rep.c7_used = cfg.c7;
    rep.lambda_used = params.lambda_override.value_or(eig.lambda);
    const double radius = cutoff.radius;
    const double eps = params.epsilon;
    const double lambda = rep.lambda_used;

    const Band band = interior_band(eig.grid, cfg.interior_margin);
    if (eig.grid[band.lo] > params.t0 - 2.0 * radius ||
        eig.grid[band.hi] < params.t0 + 2.0 * radius)
        throw ValidationError("ball of radius 2R exceeds the trusted interior band");
    const std::vector<double> hp = log_gradient(eig, band);

    double sup_inner = 0.0, sup_outer = 0.0, g_max = 0.0, g_where = params.t0;
    for (std::size_t i = band.lo; i <= band.hi; ++i) {
        const double rho = std::abs(eig.grid[i] - params.t0);
        if (rho > 2.0 * radius) continue;
        const double v = hp[i] * hp[i];
        sup_outer = std::max(sup_outer, v);
        if (rho <= radius) sup_inner = std::max(sup_inner, v);
        const double g = cutoff_chi(radius, rho) * v;
        if (g > g_max) {
            g_max = g;
            g_where = eig.grid[i];
        }
    }
    const double sigma = sup_outer > 0.0 ? sup_inner / sup_outer : 1.0;
    rep.sigma_r = sigma;
    rep.g_max = g_max;
    rep.location = g_where;
    if (eps > 2.0 * sigma * sigma)
        rep.note = "epsilon exceeds 2 sigma(R)^2; quadratic certificate still evaluated";

    const double nm1 = model.n - 1.0;
    const double base_a = -4.0 * lambda * sigma +
                          (2.0 * (params.m0 - 1.0) * nm1 + eps) * params.k +
                          2.0 * (params.m0 - 1.0) * params.theta * params.theta /
                              (params.m0 - model.n);
    const double c_quad =
        4.0 * (2.0 - eps) * lambda * lambda * (2.0 * sigma * sigma - eps);
    auto a_of = [&](double c7) {
        return c7 * (1.0 + 1.0 / eps) / (radius * radius) + base_a;
    };
    auto passes = [&](double c7) {
        const double a = a_of(c7);
        const double disc = a * a - c_quad;
        if (disc < 0.0) return false;
        const double upper = (a + std::sqrt(disc)) / (2.0 * (2.0 - eps));
        return g_max <= upper + cfg.tolerance;
    };

    // Smallest feasible constant, by bisection from an expanding bracket.
    double measured = kNan;
    if (passes(0.0)) {
        measured = 0.0;
    } else {
        double hi = 1.0;
        while (hi < 1e12 && !passes(hi)) hi *= 2.0;
        if (passes(hi)) {
            double lo = 0.0;
            for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                (passes(mid) ? hi : lo) = mid;
            }
            measured = hi;
        } else {
            rep.note += std::string(rep.note.empty() ? "" : "; ") +
                        "certificate infeasible for any constant up to 1e12";
        }
    }
    rep.c7_measured = measured;

    const double a_cfg = a_of(cfg.c7);
    rep.a_value = a_cfg;
    rep.discriminant = a_cfg * a_cfg - c_quad;
    if (rep.discriminant >= 0.0) {
        const double root = std::sqrt(rep.discriminant);
        rep.quadratic_roots = {(a_cfg - root) / (2.0 * (2.0 - eps)),
                               (a_cfg + root) / (2.0 * (2.0 - eps))};
        rep.bound_used = rep.quadratic_roots.second;
        rep.margin = rep.bound_used - g_max;
    } else {
        rep.quadratic_roots = {kNan, kNan};
        rep.bound_used = kNan;
        rep.margin = kNan;
        rep.note += std::string(rep.note.empty() ? "" : "; ") +
                    "negative discriminant at the configured constant: " +
                    std::to_string(rep.discriminant);
    }
    rep.pass = passes(cfg.c7);

    // Measured intermediate constants for this model/cutoff pair: C2 bounds
    // R^2 chi'^2/chi, C1 bounds the drift deficit of L(chi).
    double c2 = 0.0;
    for (std::size_t i = 0; i < cutoff.grid.size(); ++i)
        if (cutoff.chi[i] > 0.0)
            c2 = std::max(c2, radius * radius * cutoff.chi_d1[i] * cutoff.chi_d1[i] /
                                  cutoff.chi[i]);
    rep.c2_measured = c2;
    double c1_deficit = 0.0;
    for (std::size_t i = band.lo; i <= band.hi; ++i) {
        const double t = eig.grid[i];
        const double rho = std::abs(t - params.t0);
        if (rho <= radius || rho >= 2.0 * radius) continue;
        const double sgn = t >= params.t0 ? 1.0 : -1.0;
        const double b = log_weight_jet(model, t).d1;
        const double l_chi =
            cutoff_chi_d2(radius, rho) + cutoff_chi_d1(radius, rho) * sgn * b;
        c1_deficit = std::max(c1_deficit, -l_chi);
    }
    rep.c1_measured =
        c1_deficit / ((std::sqrt(params.k) + params.theta) / radius + 1.0 / (radius * radius));
    return rep;
}

} // namespace bes

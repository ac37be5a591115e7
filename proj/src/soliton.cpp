#include "bes/soliton.hpp"

#include <cmath>
#include <limits>

#include "bes/bounds.hpp"
#include "bes/errors.hpp"

namespace bes {

namespace {

IdentityAudit make_audit(std::string name, double residual, double tol = 1e-10) {
    IdentityAudit a;
    a.name = std::move(name);
    a.residual_sup = residual;
    a.tolerance = tol;
    a.exact_path = true;
    a.pass = residual <= tol;
    return a;
}

} // namespace

std::vector<IdentityAudit> gaussian_shrinker_audit(int n, double rho, double r_lo,
                                                   double r_hi, int samples) {
    if (n < 1) throw ValidationError("ambient dimension must be >= 1");
    if (!(rho > 0.0)) throw ValidationError("shrinking model requires rho > 0");
    if (!(0.0 < r_lo && r_lo < r_hi))
        throw ValidationError("radial window must satisfy 0 < r_lo < r_hi");

    const ExprAst phi = parse("rho*t^2/2");
    const Params p{{"rho", rho}};
    const std::vector<double> grid = uniform_grid(r_lo, r_hi, samples);

    double trace = 0.0, norm = 0.0, eigen = 0.0;
    for (double r : grid) {
        const Jet2 j = eval_d2(phi, r, p);
        const double lap = j.d2 + (n - 1.0) / r * j.d1; // flat radial Laplacian
        const double grad_sq = j.d1 * j.d1;
        // scalar curvature vanishes on the flat model
        trace = std::max(trace, std::abs(lap - n * rho));
        norm = std::max(norm, std::abs(grad_sq - 2.0 * rho * j.v));
        const double drift_lap = lap - grad_sq; // L phi for weight phi itself
        const double shifted = j.v - n / 2.0;
        eigen = std::max(eigen, std::abs(drift_lap + 2.0 * rho * shifted));
    }

    std::vector<IdentityAudit> out;
    out.push_back(make_audit("trace_identity", trace));
    out.push_back(make_audit("normalization", norm));
    out.push_back(make_audit("shifted_eigen_identity", eigen));
    const double bound = soliton_bound(SolitonBoundKind::ShrinkingTrace,
                                       SolitonBoundParams{.n = n, .rho = rho});
    out.push_back(make_audit("trace_bound_equality", std::abs(bound - 2.0 * rho), 0.0));
    return out;
}

OuSpectrumReport ou_spectrum_check(int n, double rho) {
    if (n < 1) throw ValidationError("ambient dimension must be >= 1");
    if (!(rho > 0.0)) throw ValidationError("rho must be > 0");
    OuSpectrumReport rep;
    rep.n = n;
    rep.rho = rho;
    rep.classical_value = rho;
    rep.trace_bound = 2.0 * rho;

    // The drift of the Gaussian potential along one coordinate is -rho*t for
    // any ambient dimension, so a flat-warp line model captures the spectrum.
    const double t_max = 12.0 / std::sqrt(rho);
    const double h = 0.01 / std::sqrt(rho);
    WarpedModel model = make_model("gaussian_line", 2, "1", "rho*t^2/2", 0.0, 0.0,
                                   t_max, {{"rho", rho}});
    rep.table = domain_sweep(model, {0.75 * t_max, t_max}, h, Bc::Dirichlet,
                             Bc::Neumann, SweepAnchor::LeftEdge);
    rep.lambda1 = rep.table.extrapolated;

    const DiscretizedOperator op =
        discretize(model, 0.0, t_max, h, Bc::Dirichlet, Bc::Neumann);
    const auto pairs = smallest_eigenpair(op, 2);
    rep.lambda2 = pairs[1].lambda;

    rep.closed_form_residual =
        residual_of_closed_form(model, parse("t"), rho, 0.0, t_max, 512, DerivMode::Ad);

    rep.pass = std::abs(rep.lambda1 - rho) <= 1e-4 &&
               rep.lambda1 <= rep.trace_bound + 1e-10 &&
               rep.closed_form_residual <= 1e-12;
    return rep;
}

SteadyLinearReport steady_linear_audit(int n, double a_const) {
    if (n < 1) throw ValidationError("ambient dimension must be >= 1");
    if (a_const < 0.0) throw ValidationError("steady normalization requires a >= 0");
    SteadyLinearReport rep;
    rep.n = n;
    rep.a = a_const;
    rep.bound = soliton_bound(SolitonBoundKind::Steady, SolitonBoundParams{.a = a_const});

    WarpedModel model =
        make_model("steady_line", 2, "1", "a*t", 0.0, -30.0, 30.0, {{"a", a_const}});
    // R = 0 and |grad phi| = a identically; the normalization holds exactly.
    double norm = 0.0;
    for (double t : uniform_grid(-30.0, 30.0, 33)) {
        const Jet2 j = eval_d2(model.weight, t, bound_params(model));
        norm = std::max(norm, std::abs(j.d1 * j.d1 - a_const * a_const));
    }
    rep.norm_residual = norm;

    rep.table = domain_sweep(model, {10.0, 20.0, 30.0}, 0.01, Bc::Dirichlet,
                             Bc::Dirichlet, SweepAnchor::Center);
    rep.extrapolated_lambda = rep.table.extrapolated;
    rep.pass = std::abs(rep.extrapolated_lambda - rep.bound) <= 3e-3 && norm == 0.0;
    return rep;
}

ExpandingGradientReport expanding_gradient_audit(int n, double rho, double c_lb) {
    if (n < 1) throw ValidationError("ambient dimension must be >= 1");
    if (!(rho < 0.0)) throw ValidationError("expanding model requires rho < 0");
    ExpandingGradientReport rep;
    rep.n = n;
    rep.rho = rho;
    rep.c_lb = c_lb;
    rep.theta_sq = soliton_bound(SolitonBoundKind::ExpandingGradient,
                                 SolitonBoundParams{.n = n, .rho = rho, .c = c_lb});
    rep.theta = std::sqrt(std::max(0.0, rep.theta_sq));

    // Scalar chain on sample data: for R >= n rho and phi >= c,
    //   -R + 2 rho phi <= -n rho + 2 rho phi <= -n rho + 2 c rho.
    bool ok = true;
    const double slack = 1e-12 * std::max(1.0, std::abs(n * rho));
    for (double dr : {0.0, 0.5, 1.0, 2.0}) {
        for (double dphi : {0.0, 0.5, 1.0, 2.0}) {
            const double r_scalar = n * rho + dr;
            const double phi = c_lb + dphi;
            const double lhs = -r_scalar + 2.0 * rho * phi;
            const double mid = -n * rho + 2.0 * rho * phi;
            ok = ok && lhs <= mid + slack && mid <= rep.theta_sq + slack;
        }
    }
    rep.chain_ok = ok;

    if (n >= 2) {
        const double k = -rho / (n - 1.0);
        rep.eigen_bound = optimize_m0(n, k, rep.theta).eigen_bound;
    } else {
        rep.eigen_bound = std::numeric_limits<double>::quiet_NaN();
    }
    rep.pass = ok;
    return rep;
}

} // namespace bes

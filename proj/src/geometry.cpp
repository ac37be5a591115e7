#include "bes/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "bes/errors.hpp"

namespace bes {

WarpedModel make_model(std::string name, int n, const std::string &warp_src,
                       const std::string &weight_src, double fiber_ricci_lb,
                       double t_lo, double t_hi, Params params) {
    if (n < 2) throw ValidationError("model dimension must satisfy n >= 2");
    if (!(t_lo < t_hi)) throw ValidationError("model domain must satisfy t_lo < t_hi");
    if (fiber_ricci_lb < 0.0)
        throw ValidationError("fiber Ricci lower bound must be >= 0");
    WarpedModel m;
    m.name = std::move(name);
    m.n = n;
    m.warp = parse(warp_src);
    m.weight = parse(weight_src);
    m.fiber_ricci_lb = fiber_ricci_lb;
    m.t_lo = t_lo;
    m.t_hi = t_hi;
    m.params = std::move(params);
    return m;
}

Params bound_params(const WarpedModel &m) {
    Params p = m.params;
    p["n"] = static_cast<double>(m.n);
    return p;
}

std::vector<double> uniform_grid(double lo, double hi, int samples) {
    if (samples < 2) throw ValidationError("grid needs at least 2 samples");
    std::vector<double> g(static_cast<std::size_t>(samples));
    const double h = (hi - lo) / (samples - 1);
    for (int i = 0; i < samples; ++i) g[static_cast<std::size_t>(i)] = lo + h * i;
    g.back() = hi;
    return g;
}

double CurvatureProfile::ric_mn_radial(std::size_t i, double m0) const {
    if (!(m0 > n)) throw ValidationError("m0 must exceed n");
    return ric_l_radial[i] - dphi[i] * dphi[i] / (m0 - n);
}

namespace {

struct RadialData {
    double a, da, dda;
    double phi, dphi, ddphi;
};

RadialData radial_data(const WarpedModel &model, const Params &p, double t) {
    const Jet2 a = eval_d2(model.warp, t, p);
    if (!(a.v > 0.0))
        throw NumericError("warp nonpositive at t = " + std::to_string(t));
    const Jet2 phi = eval_d2(model.weight, t, p);
    return {a.v, a.d1, a.d2, phi.v, phi.d1, phi.d2};
}

} // namespace

CurvatureProfile curvature_profile(const WarpedModel &model, int samples) {
    if (samples < 2) throw ValidationError("curvature profile needs samples >= 2");
    const Params p = bound_params(model);
    CurvatureProfile out;
    out.n = model.n;
    out.grid = uniform_grid(model.t_lo, model.t_hi, samples);
    const std::size_t m = out.grid.size();
    out.ric_l_radial.resize(m);
    out.ric_l_tangential_lb.resize(m);
    out.dphi.resize(m);
    const double nm1 = model.n - 1.0;
    const double nm2 = model.n - 2.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double t = out.grid[i];
        const RadialData d = radial_data(model, p, t);
        const double aa = d.dda / d.a;    // a''/a
        const double la = d.da / d.a;     // a'/a
        out.ric_l_radial[i] = -nm1 * aa + d.ddphi;
        out.ric_l_tangential_lb[i] =
            model.fiber_ricci_lb / (d.a * d.a) - (aa + nm2 * la * la) + la * d.dphi;
        out.dphi[i] = d.dphi;
    }
    return out;
}

namespace {

HypothesisCertificate certify_impl(const WarpedModel &model, int samples,
                                   std::optional<double> target_k,
                                   std::optional<double> target_theta) {
    const CurvatureProfile prof = curvature_profile(model, samples);
    HypothesisCertificate cert;
    cert.grid_spacing = (model.t_hi - model.t_lo) / (samples - 1);
    const double nm1 = model.n - 1.0;

    double min_component = std::numeric_limits<double>::infinity();
    double max_dphi = 0.0;
    for (std::size_t i = 0; i < prof.grid.size(); ++i) {
        min_component = std::min(min_component,
                                 std::min(prof.ric_l_radial[i], prof.ric_l_tangential_lb[i]));
        max_dphi = std::max(max_dphi, std::abs(prof.dphi[i]));
    }
    cert.k_certified = std::max(0.0, -min_component / nm1);
    cert.theta_certified = max_dphi;

    if (target_k && target_theta) {
        cert.has_targets = true;
        cert.target_k = *target_k;
        cert.target_theta = *target_theta;
        // Small relative slack so exact-equality targets do not flicker.
        const double floor_k = -nm1 * *target_k;
        const double slack_k = 1e-12 * std::max(1.0, std::abs(floor_k));
        const double slack_t = 1e-12 * std::max(1.0, *target_theta);
        for (std::size_t i = 0; i < prof.grid.size(); ++i) {
            const double t = prof.grid[i];
            if (prof.ric_l_radial[i] < floor_k - slack_k)
                cert.violations.push_back({t, "ric_radial", prof.ric_l_radial[i]});
            if (prof.ric_l_tangential_lb[i] < floor_k - slack_k)
                cert.violations.push_back({t, "ric_tangential", prof.ric_l_tangential_lb[i]});
            if (std::abs(prof.dphi[i]) > *target_theta + slack_t)
                cert.violations.push_back({t, "grad_phi", prof.dphi[i]});
        }
        cert.certified = cert.violations.empty();
    }
    return cert;
}

} // namespace

HypothesisCertificate certify_hypotheses(const WarpedModel &model, int samples) {
    return certify_impl(model, samples, std::nullopt, std::nullopt);
}

HypothesisCertificate certify_hypotheses(const WarpedModel &model, int samples,
                                         double target_k, double target_theta) {
    if (target_k < 0.0 || target_theta < 0.0)
        throw ValidationError("certification targets must be >= 0");
    return certify_impl(model, samples, target_k, target_theta);
}

DriftWeight drift_and_weight(const WarpedModel &model, double t) {
    if (t < model.t_lo || t > model.t_hi)
        throw ValidationError("t outside model domain");
    const Params p = bound_params(model);
    const RadialData d = radial_data(model, p, t);
    const double nm1 = model.n - 1.0;
    DriftWeight dw;
    dw.drift = nm1 * d.da / d.a - d.dphi;
    dw.density = std::pow(d.a, nm1) * std::exp(-d.phi);
    return dw;
}

Jet2 log_weight_jet(const WarpedModel &model, double t) {
    const Params p = bound_params(model);
    const RadialData d = radial_data(model, p, t);
    const double nm1 = model.n - 1.0;
    const double la = d.da / d.a;
    Jet2 j;
    j.v = nm1 * std::log(d.a) - d.phi;
    j.d1 = nm1 * la - d.dphi;
    j.d2 = nm1 * (d.dda / d.a - la * la) - d.ddphi;
    return j;
}

} // namespace bes

#include "bes/sweep.hpp"

#include <cmath>
#include <cstdio>

#include "bes/bounds.hpp"
#include "bes/geometry.hpp"
#include "bes/rng.hpp"
#include "bes/solver.hpp"

namespace bes {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// "+1.25" / "-1.25", for splicing into expression text.
std::string signed_fmt(double v) {
    return (v < 0.0 ? "" : "+") + fmt(v);
}

} // namespace

std::vector<TheoremSweepRow> theorem_inequality_sweep(std::uint64_t seed, int count,
                                                      const std::vector<double> &t_list,
                                                      double h, double tolerance) {
    std::vector<TheoremSweepRow> rows;
    const double t_max = t_list.back();
    const double reach = t_max + 2.0;
    for (int i = 0; i < count; ++i) {
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        TheoremSweepRow row;
        row.index = i;
        row.n = rng.uniform_int(2, 4);

        std::string warp;
        if (rng.next_double() < 0.5) {
            const double c = rng.uniform(-1.2, 1.2);
            warp = "exp(" + fmt(c) + "*t)";
        } else {
            const double s = rng.uniform(0.3, 1.0);
            const double d = rng.uniform(-1.0, 1.0);
            warp = "cosh(" + fmt(s) + "*t" + signed_fmt(d) + ")";
        }
        const double p = rng.uniform(-1.5, 1.5);
        const double q = rng.uniform(-1.0, 1.0);
        const std::string weight = fmt(p) + "*t" + signed_fmt(q) + "*tanh(t)";
        row.warp = warp;
        row.weight = weight;

        const WarpedModel model =
            make_model("sweep_" + std::to_string(i), row.n, warp, weight, 0.0, -reach, reach);
        const HypothesisCertificate cert = certify_hypotheses(model, 4001);
        row.k_certified = cert.k_certified;
        row.theta_certified = cert.theta_certified;
        row.bound = optimize_m0(row.n, row.k_certified, row.theta_certified).eigen_bound;

        const ConvergenceTable table =
            domain_sweep(model, t_list, h, Bc::Dirichlet, Bc::Dirichlet, SweepAnchor::Center);
        row.lambda_extrapolated = table.extrapolated;
        row.margin = row.bound - row.lambda_extrapolated;
        row.pass = row.lambda_extrapolated <= row.bound + tolerance;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace bes

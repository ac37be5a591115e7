#include "bes/report.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "bes/bounds.hpp"
#include "bes/errors.hpp"
#include "bes/liyau.hpp"
#include "bes/soliton.hpp"
#include "bes/solver.hpp"
#include "bes/sweep.hpp"

namespace bes {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char *kSchema = "bes.bundle.v1";
constexpr const char *kVersion = "0.1.0";

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)> &fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto &th : pool) th.join();
}

std::string describe_error() {
    try {
        throw;
    } catch (const ValidationError &e) {
        return std::string("validation: ") + e.what();
    } catch (const NumericError &e) {
        return std::string("numeric: ") + e.what();
    } catch (const EvalError &e) {
        return std::string("eval: ") + e.what();
    } catch (const ParseError &e) {
        return std::string("parse: ") + e.what();
    } catch (const std::exception &e) {
        return e.what();
    }
}

Json violations_json(const HypothesisCertificate &cert) {
    Json arr = Json::array();
    for (const CurvatureViolation &v : cert.violations)
        arr.push_back(Json{{"t", v.t}, {"component", v.component}, {"value", v.value}});
    return arr;
}

Json certificate_json(const HypothesisCertificate &cert) {
    Json o{{"K_certified", cert.k_certified},
           {"theta_certified", cert.theta_certified},
           {"grid_spacing", cert.grid_spacing},
           {"status", cert.certified ? "certified" : "violated"}};
    if (cert.has_targets) {
        o["target_K"] = cert.target_k;
        o["target_theta"] = cert.target_theta;
        o["violations"] = violations_json(cert);
    }
    return o;
}

Json table_json(const ConvergenceTable &table) {
    Json rows = Json::array();
    for (const SweepRow &r : table.rows)
        rows.push_back(Json{{"T", r.half_width}, {"h", r.h}, {"lambda", r.lambda}});
    Json o{{"rows", std::move(rows)},
           {"extrapolated", table.extrapolated},
           {"extrapolated_h", table.extrapolated_h}};
    if (table.fitted_rate) o["fitted_rate"] = *table.fitted_rate;
    return o;
}

Json liyau_json(const LiYauReport &r) {
    Json o{{"check", r.check}, {"pass", r.pass}, {"tolerance", r.tolerance}};
    // JSON has no NaN; non-finite diagnostics are omitted rather than nulled
    // so bundles reload exactly.
    auto put = [&](const char *key, double v) {
        if (std::isfinite(v)) o[key] = v;
    };
    put("lambda", r.lambda_used);
    put("sup_log_gradient_sq", r.max_log_gradient_sq);
    put("bound", r.bound_used);
    put("margin", r.margin);
    put("location", r.location);
    put("sigma_R", r.sigma_r);
    put("G_max", r.g_max);
    put("A", r.a_value);
    put("root_lo", r.quadratic_roots.first);
    put("root_hi", r.quadratic_roots.second);
    put("discriminant", r.discriminant);
    put("C7_used", r.c7_used);
    put("C7_measured", r.c7_measured);
    put("C1_measured", r.c1_measured);
    put("C2_measured", r.c2_measured);
    put("cutoff_C", r.cutoff_c);
    if (!r.note.empty()) o["note"] = r.note;
    return o;
}

struct SolveArtifact {
    bool ok = false;
    ConvergenceTable table;
    EigenResult eig;
    double lo = 0.0, hi = 0.0;
};

struct AuditRow {
    std::string kind, name;
    int n = 0;
    double rho = std::numeric_limits<double>::quiet_NaN();
    double a = std::numeric_limits<double>::quiet_NaN();
    double b = std::numeric_limits<double>::quiet_NaN();
    double c = std::numeric_limits<double>::quiet_NaN();
    double value = std::numeric_limits<double>::quiet_NaN();
    double reference = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();
    bool pass = false;
};

Json audit_row_json(const AuditRow &r) {
    Json o{{"kind", r.kind}, {"name", r.name}, {"n", r.n}};
    auto put = [&](const char *k, double v) {
        if (std::isfinite(v)) o[k] = v;
    };
    put("rho", r.rho);
    put("a", r.a);
    put("b", r.b);
    put("c", r.c);
    put("value", r.value);
    put("reference", r.reference);
    put("residual", r.residual);
    o["pass"] = r.pass;
    return o;
}

std::vector<AuditRow> run_soliton_unit(const SolitonSpecCfg &s) {
    std::vector<AuditRow> rows;
    auto base = [&](std::string name) {
        AuditRow r;
        r.kind = s.kind;
        r.name = std::move(name);
        r.n = s.n;
        return r;
    };
    if (s.kind == "gaussian_shrinker") {
        for (const IdentityAudit &a : gaussian_shrinker_audit(s.n, s.rho, 0.05, 5.0, 256)) {
            AuditRow r = base(a.name);
            r.rho = s.rho;
            r.residual = a.residual_sup;
            r.pass = a.pass;
            rows.push_back(std::move(r));
        }
    } else if (s.kind == "ou") {
        const OuSpectrumReport rep = ou_spectrum_check(s.n, s.rho);
        AuditRow r1 = base("first_odd_eigenvalue");
        r1.rho = s.rho;
        r1.value = rep.lambda1;
        r1.reference = rep.classical_value;
        r1.residual = std::abs(rep.lambda1 - rep.classical_value);
        r1.pass = r1.residual <= 1e-4;
        rows.push_back(r1);
        AuditRow r2 = base("trace_bound");
        r2.rho = s.rho;
        r2.value = rep.lambda1;
        r2.reference = rep.trace_bound;
        r2.pass = rep.lambda1 <= rep.trace_bound + 1e-10;
        rows.push_back(r2);
        AuditRow r3 = base("second_odd_eigenvalue_diagnostic");
        r3.rho = s.rho;
        r3.value = rep.lambda2;
        r3.reference = 3.0 * s.rho;
        r3.residual = std::abs(rep.lambda2 - 3.0 * s.rho);
        r3.pass = true; // diagnostic only
        rows.push_back(r3);
        AuditRow r4 = base("linear_eigenfunction_residual");
        r4.rho = s.rho;
        r4.residual = rep.closed_form_residual;
        r4.pass = rep.closed_form_residual <= 1e-12;
        rows.push_back(r4);
    } else if (s.kind == "steady") {
        const SteadyLinearReport rep = steady_linear_audit(s.n, s.a);
        AuditRow r1 = base("spectrum_bottom");
        r1.a = s.a;
        r1.value = rep.extrapolated_lambda;
        r1.reference = rep.bound;
        r1.residual = std::abs(rep.extrapolated_lambda - rep.bound);
        r1.pass = r1.residual <= 3e-3;
        rows.push_back(r1);
        AuditRow r2 = base("normalization");
        r2.a = s.a;
        r2.residual = rep.norm_residual;
        r2.pass = rep.norm_residual == 0.0;
        rows.push_back(r2);
    } else if (s.kind == "shrinking") {
        const double bound = soliton_bound(SolitonBoundKind::Shrinking,
                                           SolitonBoundParams{.rho = s.rho, .b = s.b});
        AuditRow r1 = base("eigen_bound");
        r1.rho = s.rho;
        r1.b = s.b;
        r1.value = bound;
        r1.pass = true;
        rows.push_back(r1);
        // rho*b/2 equals theta^2/4 with theta = sqrt(2 rho b)
        const double theta = std::sqrt(2.0 * s.rho * s.b);
        AuditRow r2 = base("theta_reduction");
        r2.rho = s.rho;
        r2.b = s.b;
        r2.value = theta * theta / 4.0;
        r2.reference = bound;
        r2.residual = std::abs(theta * theta / 4.0 - bound);
        r2.pass = r2.residual <= 1e-12 * std::max(1.0, bound);
        rows.push_back(r2);
    } else if (s.kind == "expanding") {
        const ExpandingGradientReport rep = expanding_gradient_audit(s.n, s.rho, s.c);
        AuditRow r1 = base("gradient_bound_sq");
        r1.rho = s.rho;
        r1.c = s.c;
        r1.value = rep.theta_sq;
        r1.pass = rep.chain_ok;
        rows.push_back(r1);
        AuditRow r2 = base("implied_eigen_bound");
        r2.rho = s.rho;
        r2.c = s.c;
        r2.value = rep.eigen_bound;
        r2.pass = rep.pass;
        rows.push_back(r2);
    } else {
        throw ValidationError("unknown soliton kind '" + s.kind + "'");
    }
    return rows;
}

} // namespace

ReportBundle run_pipeline(const RunConfig &cfg, int jobs) {
    ReportBundle bundle;
    Json &doc = bundle.doc;
    doc["schema"] = kSchema;
    doc["run_hash"] = "";
    doc["seed"] = cfg.seed;
    doc["versions"] = Json{{"bes", kVersion}, {"bundle", 1}};
    doc["inputs_echo"] = config_to_json(cfg);

    Json failures = Json::array();
    auto record_failure = [&](const std::string &unit, const std::string &error) {
        failures.push_back(Json{{"unit", unit}, {"error", error}});
        ++bundle.unit_failures;
    };

    // certify
    std::map<std::string, bool> cert_gate; // model -> targeted certification ok
    {
        std::vector<Json> slots(cfg.certify.size());
        std::vector<std::string> errors(cfg.certify.size());
        parallel_for(cfg.certify.size(), jobs, [&](std::size_t i) {
            const CertifySpec &spec = cfg.certify[i];
            try {
                const WarpedModel model = build_model(cfg.resolve_model(spec.model));
                const HypothesisCertificate cert =
                    spec.target_k
                        ? certify_hypotheses(model, spec.samples, *spec.target_k,
                                             *spec.target_theta)
                        : certify_hypotheses(model, spec.samples);
                Json o = certificate_json(cert);
                o["model"] = spec.model;
                o["samples"] = spec.samples;
                o["unit"] = "certify[" + std::to_string(i) + "]";
                o["status_unit"] = "ok";
                slots[i] = std::move(o);
            } catch (...) {
                errors[i] = describe_error();
            }
        });
        Json arr = Json::array();
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (!errors[i].empty()) {
                record_failure("certify[" + std::to_string(i) + "]", errors[i]);
                cert_gate[cfg.certify[i].model] = false;
                continue;
            }
            const bool ok = slots[i].at("status").get<std::string>() == "certified";
            auto it = cert_gate.find(cfg.certify[i].model);
            cert_gate[cfg.certify[i].model] = (it == cert_gate.end() ? true : it->second) && ok;
            arr.push_back(std::move(slots[i]));
        }
        doc["certificates"] = std::move(arr);
    }

    // bounds
    {
        Json arr = Json::array();
        for (std::size_t i = 0; i < cfg.bounds.size(); ++i) {
            const BoundQuerySpec &b = cfg.bounds[i];
            try {
                BoundQuery q{b.n,      b.k,      b.theta,   b.m0,     b.m,
                             b.lambda, b.epsilon, b.radius, b.c_local};
                const BoundSet set = eigenvalue_bounds(q);
                Json o{{"n", b.n}, {"K", b.k}, {"theta", b.theta}};
                if (b.m0) o["m0"] = *b.m0;
                o["cheng"] = set.cheng;
                if (set.theorem_a) o["theorem_a"] = *set.theorem_a;
                if (set.eq_2_3) o["eq_2_3"] = *set.eq_2_3;
                if (set.k_tilde) o["K_tilde"] = *set.k_tilde;
                if (set.theorem_1_1) o["theorem_1_1"] = *set.theorem_1_1;
                o["optimized"] = set.optimized_eigen;
                const M0Optimum opt = optimize_m0(b.n, b.k, b.theta);
                o["m0_star"] = opt.m0_unbounded ? Json("inf") : Json(opt.m0_star);
                o["F_star"] = opt.f_star;
                if (b.lambda)
                    o["global_gradient_bound"] =
                        global_gradient_bound(b.n, b.k, b.theta, *b.lambda, b.m0);
                if (b.epsilon && b.radius && b.m0) {
                    // the localized estimate only asserts such a constant
                    // exists; 64 is the default working value
                    BoundQuery ql = q;
                    if (!ql.c_local) ql.c_local = 64.0;
                    o["local_gradient_bound"] = local_gradient_bound(ql);
                }
                arr.push_back(std::move(o));
            } catch (...) {
                record_failure("bounds[" + std::to_string(i) + "]", describe_error());
            }
        }
        doc["bounds"] = std::move(arr);
    }

    // solve
    std::map<std::string, SolveArtifact> artifacts; // keyed by model; first wins
    {
        std::vector<Json> slots(cfg.solve.size());
        std::vector<std::string> errors(cfg.solve.size());
        std::vector<SolveArtifact> arts(cfg.solve.size());
        parallel_for(cfg.solve.size(), jobs, [&](std::size_t i) {
            const SolveSpec &spec = cfg.solve[i];
            try {
                const WarpedModel model = build_model(cfg.resolve_model(spec.model));
                Bc bl = Bc::Dirichlet, br = Bc::Dirichlet;
                SweepAnchor anchor = SweepAnchor::Center;
                int index = 0;
                if (spec.strategy == SolveStrategy::OddSector) {
                    anchor = SweepAnchor::CenterRight;
                    br = Bc::Neumann;
                } else if (spec.strategy == SolveStrategy::NeumannSecond) {
                    bl = br = Bc::Neumann;
                    index = 1;
                }
                SolveArtifact art;
                art.table =
                    domain_sweep(model, spec.t_list, spec.h, bl, br, anchor, index);
                const double t_max = spec.t_list.back();
                const double center = 0.5 * (model.t_lo + model.t_hi);
                art.lo = anchor == SweepAnchor::Center ? center - t_max
                         : anchor == SweepAnchor::CenterRight ? center
                                                              : model.t_lo;
                art.hi = anchor == SweepAnchor::LeftEdge ? model.t_lo + t_max
                         : anchor == SweepAnchor::CenterRight ? center + t_max
                                                              : center + t_max;
                const DiscretizedOperator op = discretize(model, art.lo, art.hi, spec.h, bl, br);
                const int count = std::max(spec.count, index + 1);
                art.eig = smallest_eigenpair(op, count)[static_cast<std::size_t>(index)];
                art.ok = true;
                arts[i] = std::move(art);

                Json o{{"model", spec.model},
                       {"strategy", spec.strategy == SolveStrategy::Dirichlet ? "dirichlet"
                                    : spec.strategy == SolveStrategy::OddSector
                                        ? "odd_sector"
                                        : "neumann_second"},
                       {"unit", "solve[" + std::to_string(i) + "]"}};
                o.update(table_json(arts[i].table));
                o["lambda_at_largest_T"] = arts[i].eig.lambda;
                o["residual_sup"] = arts[i].eig.residual_sup;
                slots[i] = std::move(o);
            } catch (...) {
                errors[i] = describe_error();
            }
        });
        Json arr = Json::array();
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (!errors[i].empty()) {
                record_failure("solve[" + std::to_string(i) + "]", errors[i]);
                continue;
            }
            arr.push_back(std::move(slots[i]));
            if (!artifacts.count(cfg.solve[i].model))
                artifacts[cfg.solve[i].model] = std::move(arts[i]);
        }
        doc["convergence"] = std::move(arr);
    }

    // verify
    {
        std::vector<std::vector<Json>> slots(cfg.verify.size());
        std::vector<std::string> errors(cfg.verify.size());
        std::vector<std::string> skips(cfg.verify.size());
        parallel_for(cfg.verify.size(), jobs, [&](std::size_t i) {
            const VerifySpec &spec = cfg.verify[i];
            try {
                const auto gate = cert_gate.find(spec.model);
                if (gate != cert_gate.end() && !gate->second) {
                    skips[i] = "model failed targeted certification";
                    return;
                }
                const WarpedModel model = build_model(cfg.resolve_model(spec.model));
                const double t0 = spec.t0.value_or(0.5 * (model.t_lo + model.t_hi));
                VerifierConfig vcfg;
                vcfg.c_cutoff = spec.c_cutoff;
                vcfg.c7 = spec.c7;
                vcfg.interior_margin = spec.interior_margin;
                vcfg.tolerance = spec.tolerance;
                vcfg.cutoff_samples = spec.cutoff_samples;
                const SolveArtifact *art = nullptr;
                if (const auto it = artifacts.find(spec.model); it != artifacts.end())
                    art = &it->second;

                for (const std::string &check : spec.checks) {
                    Json o;
                    try {
                        if (check == "cutoff") {
                            const CutoffProfile prof =
                                build_cutoff(spec.radius, spec.cutoff_samples);
                            double slack = std::numeric_limits<double>::infinity();
                            for (std::size_t s = 0; s < prof.grid.size(); ++s) {
                                if (prof.chi[s] > 0.0)
                                    slack = std::min(slack, prof.certified_c *
                                                                std::sqrt(prof.chi[s]) +
                                                                prof.chi_d1[s]);
                                slack = std::min(slack, prof.chi_d2[s] + prof.certified_c);
                                slack = std::min(slack, -prof.chi_d1[s]);
                            }
                            o = Json{{"check", "cutoff"},
                                     {"R", spec.radius},
                                     {"cutoff_C", prof.certified_c},
                                     {"constraint_slack", slack},
                                     {"pass", slack >= -1e-12}};
                        } else if (check == "global_gradient") {
                            GradientCheckParams params{spec.k, spec.theta, spec.m0, {}};
                            if (spec.lambda_override)
                                params.lambda_override = spec.lambda_override;
                            LiYauReport rep;
                            if (spec.f_expr) {
                                if (!params.lambda_override && art)
                                    params.lambda_override = art->table.extrapolated;
                                if (!params.lambda_override)
                                    throw ValidationError(
                                        "closed-form gradient check needs lambda");
                                rep = check_global_gradient_closed_form(
                                    model, parse(*spec.f_expr), *params.lambda_override,
                                    model.t_lo, model.t_hi, 2001, params, vcfg);
                            } else {
                                if (!art)
                                    throw ValidationError(
                                        "gradient check needs a solve unit for model '" +
                                        spec.model + "'");
                                if (!params.lambda_override && spec.use_extrapolated_lambda)
                                    params.lambda_override = art->table.extrapolated;
                                rep = check_global_gradient(model, art->eig, params, vcfg);
                            }
                            o = liyau_json(rep);
                        } else if (check == "bochner") {
                            if (!spec.h_expr)
                                throw ValidationError("bochner check needs h_expr");
                            const double res = bochner_residual(
                                model, parse(*spec.h_expr), model.t_lo, model.t_hi, 2001,
                                DerivMode::Ad, spec.lambda_override);
                            o = Json{{"check", "bochner"},
                                     {"residual", res},
                                     {"pass", res <= 1e-10}};
                        } else if (check == "hessian") {
                            if (!spec.h_expr)
                                throw ValidationError("hessian check needs h_expr");
                            if (!spec.m0)
                                throw ValidationError("hessian check needs m0");
                            const double margin = hessian_refinement_margin(
                                model, parse(*spec.h_expr), model.t_lo, model.t_hi, 2001,
                                spec.theta, *spec.m0, spec.lambda_override);
                            o = Json{{"check", "hessian"},
                                     {"margin", margin},
                                     {"pass", margin >= -1e-10}};
                        } else if (check == "comparison") {
                            const LiYauReport rep = check_laplacian_comparison(
                                model, t0, spec.k, spec.theta, 2000, vcfg);
                            o = liyau_json(rep);
                        } else if (check == "g_certificate") {
                            if (!art)
                                throw ValidationError(
                                    "g_certificate needs a solve unit for model '" +
                                    spec.model + "'");
                            if (!spec.m0)
                                throw ValidationError("g_certificate needs m0");
                            const CutoffProfile prof =
                                build_cutoff(spec.radius, spec.cutoff_samples);
                            GCertificateParams params;
                            params.k = spec.k;
                            params.theta = spec.theta;
                            params.m0 = *spec.m0;
                            params.epsilon = spec.epsilon;
                            params.t0 = t0;
                            params.lambda_override = spec.lambda_override;
                            o = liyau_json(g_certificate(model, art->eig, prof, params, vcfg));
                            o["R"] = spec.radius;
                        }
                    } catch (...) {
                        o = Json{{"check", check}, {"pass", false},
                                 {"error", describe_error()}};
                    }
                    o["model"] = spec.model;
                    o["unit"] = "verify[" + std::to_string(i) + "]";
                    slots[i].push_back(std::move(o));
                }
            } catch (...) {
                errors[i] = describe_error();
            }
        });
        Json arr = Json::array();
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (!errors[i].empty()) {
                record_failure("verify[" + std::to_string(i) + "]", errors[i]);
                continue;
            }
            if (!skips[i].empty()) {
                arr.push_back(Json{{"unit", "verify[" + std::to_string(i) + "]"},
                                   {"model", cfg.verify[i].model},
                                   {"check", "all"},
                                   {"status", "skipped"},
                                   {"reason", skips[i]}});
                continue;
            }
            for (Json &o : slots[i]) {
                if (o.contains("error"))
                    record_failure(o.at("unit").get<std::string>() + "/" +
                                       o.at("check").get<std::string>(),
                                   o.at("error").get<std::string>());
                arr.push_back(std::move(o));
            }
        }
        doc["liyau"] = std::move(arr);
    }

    // soliton audits
    {
        std::vector<std::vector<AuditRow>> slots(cfg.soliton.size());
        std::vector<std::string> errors(cfg.soliton.size());
        parallel_for(cfg.soliton.size(), jobs, [&](std::size_t i) {
            try {
                slots[i] = run_soliton_unit(cfg.soliton[i]);
            } catch (...) {
                errors[i] = describe_error();
            }
        });
        Json arr = Json::array();
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (!errors[i].empty()) {
                record_failure("soliton[" + std::to_string(i) + "]", errors[i]);
                continue;
            }
            for (const AuditRow &r : slots[i]) {
                Json o = audit_row_json(r);
                o["unit"] = "soliton[" + std::to_string(i) + "]";
                arr.push_back(std::move(o));
            }
        }
        doc["audits"] = std::move(arr);
    }

    // randomized sweeps (seeded)
    {
        Json arr = Json::array();
        for (std::size_t i = 0; i < cfg.sweeps.size(); ++i) {
            const SweepSpec &s = cfg.sweeps[i];
            try {
                for (const TheoremSweepRow &row :
                     theorem_inequality_sweep(cfg.seed, s.count, s.t_list, s.h)) {
                    arr.push_back(Json{{"index", row.index},
                                       {"n", row.n},
                                       {"warp", row.warp},
                                       {"weight", row.weight},
                                       {"K_certified", row.k_certified},
                                       {"theta_certified", row.theta_certified},
                                       {"lambda", row.lambda_extrapolated},
                                       {"bound", row.bound},
                                       {"margin", row.margin},
                                       {"pass", row.pass},
                                       {"unit", "sweeps[" + std::to_string(i) + "]"}});
                }
            } catch (...) {
                record_failure("sweeps[" + std::to_string(i) + "]", describe_error());
            }
        }
        doc["sweeps"] = std::move(arr);
    }

    doc["failures"] = std::move(failures);
    doc["run_hash"] = bundle_hash(doc);
    return bundle;
}

std::string bundle_hash(const Json &doc) {
    Json copy = doc;
    copy["run_hash"] = "";
    const std::string text = copy.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string fmt_number(const Json &v) {
    if (v.is_null()) return {};
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    const double d = v.get<double>();
    if (std::isnan(d)) return {};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

std::string cell(const Json &row, const std::string &key) {
    if (!row.contains(key)) return {};
    return fmt_number(row.at(key));
}

RenderedTable build_table(const std::string &name, const Json &rows,
                          const std::vector<std::pair<std::string, std::string>> &columns) {
    RenderedTable t;
    t.name = name;
    for (const auto &c : columns) t.header.push_back(c.first);
    for (const Json &row : rows) {
        std::vector<std::string> r;
        for (const auto &c : columns) r.push_back(cell(row, c.second));
        t.rows.push_back(std::move(r));
    }
    return t;
}

} // namespace

std::vector<RenderedTable> render_tables(const ReportBundle &bundle) {
    const Json &doc = bundle.doc;
    std::vector<RenderedTable> tables;
    tables.push_back(build_table("certificates", doc.at("certificates"),
                                 {{"model", "model"},
                                  {"samples", "samples"},
                                  {"K_certified", "K_certified"},
                                  {"theta_certified", "theta_certified"},
                                  {"grid_spacing", "grid_spacing"},
                                  {"target_K", "target_K"},
                                  {"target_theta", "target_theta"},
                                  {"status", "status"}}));
    tables.push_back(build_table("bounds", doc.at("bounds"),
                                 {{"n", "n"},
                                  {"K", "K"},
                                  {"theta", "theta"},
                                  {"m0", "m0"},
                                  {"cheng", "cheng"},
                                  {"eq_2_3", "eq_2_3"},
                                  {"optimized", "optimized"}}));
    // convergence rows are flattened: one line per (model, T)
    {
        RenderedTable t;
        t.name = "convergence";
        t.header = {"model", "strategy", "T", "h", "lambda", "extrapolated",
                    "extrapolated_h", "fitted_rate"};
        for (const Json &unit : doc.at("convergence")) {
            for (const Json &row : unit.at("rows")) {
                t.rows.push_back({cell(unit, "model"), cell(unit, "strategy"),
                                  cell(row, "T"), cell(row, "h"), cell(row, "lambda"),
                                  cell(unit, "extrapolated"), cell(unit, "extrapolated_h"),
                                  cell(unit, "fitted_rate")});
            }
        }
        tables.push_back(std::move(t));
    }
    tables.push_back(build_table("liyau", doc.at("liyau"),
                                 {{"model", "model"},
                                  {"check", "check"},
                                  {"lambda", "lambda"},
                                  {"bound", "bound"},
                                  {"sup_log_gradient_sq", "sup_log_gradient_sq"},
                                  {"margin", "margin"},
                                  {"residual", "residual"},
                                  {"sigma_R", "sigma_R"},
                                  {"G_max", "G_max"},
                                  {"A", "A"},
                                  {"discriminant", "discriminant"},
                                  {"C7_used", "C7_used"},
                                  {"C7_measured", "C7_measured"},
                                  {"cutoff_C", "cutoff_C"},
                                  {"pass", "pass"},
                                  {"status", "status"},
                                  {"note", "note"}}));
    tables.push_back(build_table("audits", doc.at("audits"),
                                 {{"kind", "kind"},
                                  {"name", "name"},
                                  {"n", "n"},
                                  {"rho", "rho"},
                                  {"a", "a"},
                                  {"b", "b"},
                                  {"c", "c"},
                                  {"value", "value"},
                                  {"reference", "reference"},
                                  {"residual", "residual"},
                                  {"pass", "pass"}}));
    tables.push_back(build_table("sweeps", doc.at("sweeps"),
                                 {{"index", "index"},
                                  {"n", "n"},
                                  {"warp", "warp"},
                                  {"weight", "weight"},
                                  {"K_certified", "K_certified"},
                                  {"theta_certified", "theta_certified"},
                                  {"lambda", "lambda"},
                                  {"bound", "bound"},
                                  {"margin", "margin"},
                                  {"pass", "pass"}}));
    tables.push_back(build_table("failures", doc.at("failures"),
                                 {{"unit", "unit"}, {"error", "error"}}));
    return tables;
}

namespace {

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

} // namespace

std::string table_to_csv(const RenderedTable &table) {
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += csv_field(table.header[i]);
    }
    out += "\r\n";
    for (const auto &row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += csv_field(row[i]);
        }
        out += "\r\n";
    }
    return out;
}

void emit_json(const ReportBundle &bundle, std::ostream &out) {
    out << bundle.doc.dump(2) << '\n';
}

void emit_markdown(const ReportBundle &bundle, std::ostream &out) {
    out << "# bes report\n\n";
    out << "run hash: `" << bundle.doc.at("run_hash").get<std::string>() << "`  \n";
    out << "seed: " << bundle.doc.at("seed") << "\n";
    for (const RenderedTable &t : render_tables(bundle)) {
        if (t.rows.empty()) continue;
        out << "\n## " << t.name << "\n\n|";
        for (const std::string &h : t.header) out << ' ' << h << " |";
        out << "\n|";
        for (std::size_t i = 0; i < t.header.size(); ++i) out << " --- |";
        out << '\n';
        for (const auto &row : t.rows) {
            out << '|';
            for (const std::string &c : row) out << ' ' << (c.empty() ? " " : c) << " |";
            out << '\n';
        }
    }
}

std::vector<std::string> emit_to_directory(const ReportBundle &bundle,
                                           const std::string &directory,
                                           const std::string &format) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec) throw IoError("cannot create output directory '" + directory + "'");
    std::vector<std::string> written;
    auto write_file = [&](const std::string &name, const std::string &content) {
        const fs::path p = fs::path(directory) / name;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw IoError("cannot write '" + p.string() + "'");
        out << content;
        if (!out) throw IoError("write failed for '" + p.string() + "'");
        written.push_back(p.string());
    };

    if (format == "json") {
        write_file("bundle.json", bundle.doc.dump(2) + "\n");
    } else if (format == "csv") {
        for (const RenderedTable &t : render_tables(bundle))
            write_file(t.name + ".csv", table_to_csv(t));
    } else if (format == "md") {
        std::ostringstream md;
        emit_markdown(bundle, md);
        write_file("report.md", md.str());
    } else {
        throw ValidationError("unknown output format '" + format + "'");
    }

    // Timestamp sidecar, deliberately outside the hashed artifacts.
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    Json meta{{"generated_at", stamp}, {"run_hash", bundle.doc.at("run_hash")}};
    write_file("run_meta.json", meta.dump(2) + "\n");
    return written;
}

ReportBundle load_bundle(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open bundle '" + path + "'");
    ReportBundle b;
    try {
        in >> b.doc;
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError(std::string("bundle parse error: ") + e.what());
    }
    if (!b.doc.is_object() || !b.doc.contains("schema") ||
        b.doc.at("schema") != kSchema)
        throw ValidationError("not a bes bundle (schema mismatch)");
    if (b.doc.contains("failures")) b.unit_failures = static_cast<int>(b.doc.at("failures").size());
    return b;
}

} // namespace bes

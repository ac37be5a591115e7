#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bes/geometry.hpp"

namespace bes {

struct ModelSpec {
    std::string name;
    int n = 2;
    std::string warp;
    std::string weight;
    double fiber_ricci_lb = 0.0;
    double t_lo = 0.0;
    double t_hi = 1.0;
    Params params;
};

struct CertifySpec {
    std::string model;
    int samples = 1001;
    std::optional<double> target_k;
    std::optional<double> target_theta;
};

struct BoundQuerySpec {
    int n = 2;
    double k = 1.0;
    double theta = 0.0;
    std::optional<double> m0, m, lambda, epsilon, radius, c_local;
};

enum class SolveStrategy { Dirichlet, OddSector, NeumannSecond };

struct SolveSpec {
    std::string model;
    std::vector<double> t_list;
    double h = 0.01;
    SolveStrategy strategy = SolveStrategy::Dirichlet;
    int count = 1;
};

struct VerifySpec {
    std::string model;
    std::vector<std::string> checks;
    double k = 1.0;
    double theta = 0.0;
    std::optional<double> m0;
    double epsilon = 0.5;
    double radius = 10.0;
    double c7 = 64.0;
    double c_cutoff = 64.0;
    int cutoff_samples = 10001;
    double interior_margin = 0.10;
    double tolerance = 1e-8;
    std::optional<double> t0;
    std::optional<std::string> h_expr; // closed-form ln f for identity checks
    std::optional<std::string> f_expr; // closed-form f for the gradient check
    std::optional<double> lambda_override;
    bool use_extrapolated_lambda = true;
};

struct SolitonSpecCfg {
    std::string kind; // gaussian_shrinker | ou | steady | shrinking | expanding
    int n = 2;
    double rho = 0.0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

struct SweepSpec {
    std::string type = "theorem_inequality";
    int count = 20;
    std::vector<double> t_list{8.0, 16.0, 24.0};
    double h = 0.02;
};

struct OutputSpec {
    std::string format = "md"; // csv | md | json
    std::string directory;     // empty: write to stdout (md/json only)
};

struct RunConfig {
    std::uint64_t seed = 0;
    std::vector<ModelSpec> models;
    std::vector<CertifySpec> certify;
    std::vector<BoundQuerySpec> bounds;
    std::vector<SolveSpec> solve;
    std::vector<VerifySpec> verify;
    std::vector<SolitonSpecCfg> soliton;
    std::vector<SweepSpec> sweeps;
    OutputSpec output;

    const ModelSpec &resolve_model(const std::string &name) const;
};

/// Load and fully validate a config file; the format is chosen by extension
/// (.json or .toml). Unknown keys are hard errors.
RunConfig load_config(const std::string &path);

/// Validate a config presented as JSON (shared by both file formats).
RunConfig config_from_json(const nlohmann::ordered_json &doc);

/// Normalized echo of a config (defaults applied), used in report bundles.
nlohmann::ordered_json config_to_json(const RunConfig &cfg);

/// Build the runtime model for a spec (parses the expressions).
WarpedModel build_model(const ModelSpec &spec);

} // namespace bes

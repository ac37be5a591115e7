#include "bes/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "bes/bounds.hpp"
#include "bes/errors.hpp"
#include "bes/tomllite.hpp"

namespace bes {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string &where, const std::string &what) {
    throw ValidationError("config: " + where + ": " + what);
}

void check_keys(const Json &obj, const std::string &where,
                const std::set<std::string> &allowed) {
    if (!obj.is_object()) bad(where, "expected an object");
    for (const auto &item : obj.items())
        if (!allowed.count(item.key())) bad(where, "unknown key '" + item.key() + "'");
}

double get_number(const Json &obj, const std::string &where, const std::string &key) {
    if (!obj.contains(key)) bad(where, "missing required field '" + key + "'");
    const Json &v = obj.at(key);
    if (!v.is_number()) bad(where, "field '" + key + "' must be a number");
    return v.get<double>();
}

double get_number_or(const Json &obj, const std::string &where, const std::string &key,
                     double fallback) {
    if (!obj.contains(key)) return fallback;
    const Json &v = obj.at(key);
    if (!v.is_number()) bad(where, "field '" + key + "' must be a number");
    return v.get<double>();
}

std::optional<double> get_opt_number(const Json &obj, const std::string &where,
                                     const std::string &key) {
    if (!obj.contains(key)) return std::nullopt;
    const Json &v = obj.at(key);
    if (!v.is_number()) bad(where, "field '" + key + "' must be a number");
    return v.get<double>();
}

int get_int_or(const Json &obj, const std::string &where, const std::string &key,
               int fallback) {
    if (!obj.contains(key)) return fallback;
    const Json &v = obj.at(key);
    if (!v.is_number_integer()) bad(where, "field '" + key + "' must be an integer");
    return v.get<int>();
}

std::string get_string(const Json &obj, const std::string &where, const std::string &key) {
    if (!obj.contains(key)) bad(where, "missing required field '" + key + "'");
    const Json &v = obj.at(key);
    if (!v.is_string()) bad(where, "field '" + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> get_number_list(const Json &obj, const std::string &where,
                                    const std::string &key) {
    if (!obj.contains(key)) bad(where, "missing required field '" + key + "'");
    const Json &v = obj.at(key);
    if (!v.is_array() || v.empty()) bad(where, "field '" + key + "' must be a nonempty array");
    std::vector<double> out;
    for (const Json &x : v) {
        if (!x.is_number()) bad(where, "field '" + key + "' must contain numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

ModelSpec parse_model(const Json &obj, const std::string &where) {
    check_keys(obj, where,
               {"name", "n", "warp", "weight", "fiber_ricci_lb", "domain", "params"});
    ModelSpec m;
    m.name = get_string(obj, where, "name");
    m.n = get_int_or(obj, where, "n", 0);
    if (m.n < 2) bad(where, "n must be an integer >= 2");
    m.warp = get_string(obj, where, "warp");
    m.weight = get_string(obj, where, "weight");
    m.fiber_ricci_lb = get_number_or(obj, where, "fiber_ricci_lb", 0.0);
    if (m.fiber_ricci_lb < 0.0) bad(where, "fiber_ricci_lb must be >= 0");
    const std::vector<double> dom = get_number_list(obj, where, "domain");
    if (dom.size() != 2 || !(dom[0] < dom[1]))
        bad(where, "domain must be [lo, hi] with lo < hi");
    m.t_lo = dom[0];
    m.t_hi = dom[1];
    if (obj.contains("params")) {
        const Json &p = obj.at("params");
        if (!p.is_object()) bad(where, "params must be an object");
        for (const auto &item : p.items()) {
            if (!item.value().is_number()) bad(where, "params values must be numbers");
            m.params[item.key()] = item.value().get<double>();
        }
    }
    return m;
}

CertifySpec parse_certify(const Json &obj, const std::string &where) {
    check_keys(obj, where, {"model", "samples", "target_K", "target_theta"});
    CertifySpec c;
    c.model = get_string(obj, where, "model");
    c.samples = get_int_or(obj, where, "samples", 1001);
    if (c.samples < 2) bad(where, "samples must be >= 2");
    c.target_k = get_opt_number(obj, where, "target_K");
    c.target_theta = get_opt_number(obj, where, "target_theta");
    if (c.target_k.has_value() != c.target_theta.has_value())
        bad(where, "target_K and target_theta must be given together");
    if (c.target_k && (*c.target_k < 0.0 || *c.target_theta < 0.0))
        bad(where, "certification targets must be >= 0");
    return c;
}

BoundQuerySpec parse_bound(const Json &obj, const std::string &where) {
    check_keys(obj, where, {"n", "K", "theta", "m0", "m", "lambda", "epsilon", "R", "C_local"});
    BoundQuerySpec b;
    b.n = get_int_or(obj, where, "n", 0);
    if (b.n < 2) bad(where, "n must be an integer >= 2");
    b.k = get_number_or(obj, where, "K", 1.0);
    b.theta = get_number_or(obj, where, "theta", 0.0);
    b.m0 = get_opt_number(obj, where, "m0");
    b.m = get_opt_number(obj, where, "m");
    b.lambda = get_opt_number(obj, where, "lambda");
    b.epsilon = get_opt_number(obj, where, "epsilon");
    b.radius = get_opt_number(obj, where, "R");
    b.c_local = get_opt_number(obj, where, "C_local");
    // Reuse the library-side validation for the numeric constraints.
    BoundQuery q{b.n, b.k, b.theta, b.m0, b.m, b.lambda, b.epsilon, b.radius, b.c_local};
    try {
        validate(q);
    } catch (const ValidationError &e) {
        bad(where, e.what());
    }
    return b;
}

SolveSpec parse_solve(const Json &obj, const std::string &where) {
    check_keys(obj, where, {"model", "T_list", "h", "strategy", "count"});
    SolveSpec s;
    s.model = get_string(obj, where, "model");
    s.t_list = get_number_list(obj, where, "T_list");
    for (std::size_t i = 0; i < s.t_list.size(); ++i) {
        if (!(s.t_list[i] > 0.0)) bad(where, "T_list entries must be > 0");
        if (i > 0 && !(s.t_list[i] > s.t_list[i - 1]))
            bad(where, "T_list must be strictly increasing");
    }
    s.h = get_number(obj, where, "h");
    if (!(s.h > 0.0)) bad(where, "h must be > 0");
    const std::string strat =
        obj.contains("strategy") ? get_string(obj, where, "strategy") : "dirichlet";
    if (strat == "dirichlet") s.strategy = SolveStrategy::Dirichlet;
    else if (strat == "odd_sector") s.strategy = SolveStrategy::OddSector;
    else if (strat == "neumann_second") s.strategy = SolveStrategy::NeumannSecond;
    else bad(where, "strategy must be dirichlet | odd_sector | neumann_second");
    s.count = get_int_or(obj, where, "count", 1);
    if (s.count < 1) bad(where, "count must be >= 1");
    return s;
}

VerifySpec parse_verify(const Json &obj, const std::string &where) {
    check_keys(obj, where,
               {"model", "checks", "K", "theta", "m0", "epsilon", "R", "C7", "C_cutoff",
                "cutoff_samples", "interior_margin", "tolerance", "t0", "h_expr",
                "f_expr", "lambda", "use_extrapolated_lambda"});
    VerifySpec v;
    v.model = get_string(obj, where, "model");
    if (!obj.contains("checks") || !obj.at("checks").is_array() || obj.at("checks").empty())
        bad(where, "checks must be a nonempty array of strings");
    for (const Json &c : obj.at("checks")) {
        if (!c.is_string()) bad(where, "checks must contain strings");
        const std::string name = c.get<std::string>();
        static const std::set<std::string> known{"cutoff", "global_gradient", "bochner",
                                                 "hessian", "comparison", "g_certificate"};
        if (!known.count(name)) bad(where, "unknown check '" + name + "'");
        v.checks.push_back(name);
    }
    v.k = get_number_or(obj, where, "K", 1.0);
    if (v.k < 0.0) bad(where, "K must be >= 0");
    v.theta = get_number_or(obj, where, "theta", 0.0);
    if (v.theta < 0.0) bad(where, "theta must be >= 0");
    v.m0 = get_opt_number(obj, where, "m0");
    v.epsilon = get_number_or(obj, where, "epsilon", 0.5);
    if (!(v.epsilon > 0.0 && v.epsilon < 2.0))
        bad(where, "epsilon must satisfy 0 < epsilon < 2");
    v.radius = get_number_or(obj, where, "R", 10.0);
    if (!(v.radius > 0.0)) bad(where, "R must be > 0");
    v.c7 = get_number_or(obj, where, "C7", 64.0);
    v.c_cutoff = get_number_or(obj, where, "C_cutoff", 64.0);
    v.cutoff_samples = get_int_or(obj, where, "cutoff_samples", 10001);
    v.interior_margin = get_number_or(obj, where, "interior_margin", 0.10);
    if (!(v.interior_margin >= 0.0 && v.interior_margin < 0.5))
        bad(where, "interior_margin must lie in [0, 0.5)");
    v.tolerance = get_number_or(obj, where, "tolerance", 1e-8);
    v.t0 = get_opt_number(obj, where, "t0");
    if (obj.contains("h_expr")) v.h_expr = get_string(obj, where, "h_expr");
    if (obj.contains("f_expr")) v.f_expr = get_string(obj, where, "f_expr");
    v.lambda_override = get_opt_number(obj, where, "lambda");
    if (obj.contains("use_extrapolated_lambda")) {
        if (!obj.at("use_extrapolated_lambda").is_boolean())
            bad(where, "use_extrapolated_lambda must be a boolean");
        v.use_extrapolated_lambda = obj.at("use_extrapolated_lambda").get<bool>();
    }
    return v;
}

SolitonSpecCfg parse_soliton(const Json &obj, const std::string &where) {
    check_keys(obj, where, {"kind", "n", "rho", "a", "b", "c"});
    SolitonSpecCfg s;
    s.kind = get_string(obj, where, "kind");
    static const std::set<std::string> kinds{"gaussian_shrinker", "ou", "steady",
                                             "shrinking", "expanding"};
    if (!kinds.count(s.kind))
        bad(where, "kind must be gaussian_shrinker | ou | steady | shrinking | expanding");
    s.n = get_int_or(obj, where, "n", 2);
    if (s.n < 1) bad(where, "n must be >= 1");
    s.rho = get_number_or(obj, where, "rho", 0.0);
    s.a = get_number_or(obj, where, "a", 0.0);
    s.b = get_number_or(obj, where, "b", 0.0);
    s.c = get_number_or(obj, where, "c", 0.0);
    if (s.kind == "gaussian_shrinker" || s.kind == "ou" || s.kind == "shrinking") {
        if (!(s.rho > 0.0)) bad(where, "kind '" + s.kind + "' requires rho > 0");
    }
    if (s.kind == "shrinking" && !(s.b > 0.0)) bad(where, "shrinking requires b > 0");
    if (s.kind == "expanding") {
        if (!(s.rho < 0.0)) bad(where, "expanding requires rho < 0");
        if (s.c > s.n / 2.0) bad(where, "expanding requires c <= n/2");
    }
    if (s.kind == "steady" && s.a < 0.0) bad(where, "steady requires a >= 0");
    return s;
}

SweepSpec parse_sweep(const Json &obj, const std::string &where) {
    check_keys(obj, where, {"type", "count", "T_list", "h"});
    SweepSpec s;
    if (obj.contains("type")) s.type = get_string(obj, where, "type");
    if (s.type != "theorem_inequality") bad(where, "unknown sweep type '" + s.type + "'");
    s.count = get_int_or(obj, where, "count", 20);
    if (s.count < 1) bad(where, "count must be >= 1");
    if (obj.contains("T_list")) s.t_list = get_number_list(obj, where, "T_list");
    s.h = get_number_or(obj, where, "h", 0.02);
    if (!(s.h > 0.0)) bad(where, "h must be > 0");
    return s;
}

} // namespace

const ModelSpec &RunConfig::resolve_model(const std::string &name) const {
    for (const ModelSpec &m : models)
        if (m.name == name) return m;
    throw ValidationError("config references unknown model '" + name + "'");
}

RunConfig config_from_json(const Json &doc) {
    if (!doc.is_object()) throw ValidationError("config: top level must be an object");
    check_keys(doc, "top level",
               {"seed", "models", "certify", "bounds", "solve", "verify", "soliton",
                "sweeps", "output"});
    RunConfig cfg;
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_integer())
            throw ValidationError("config: seed must be an integer");
        cfg.seed = doc.at("seed").get<std::uint64_t>();
    }
    auto each = [&](const char *key, auto parser, auto &list) {
        if (!doc.contains(key)) return;
        const Json &arr = doc.at(key);
        if (!arr.is_array())
            throw ValidationError(std::string("config: ") + key + " must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i)
            list.push_back(parser(arr[i], std::string(key) + "[" + std::to_string(i) + "]"));
    };
    each("models", parse_model, cfg.models);
    each("certify", parse_certify, cfg.certify);
    each("bounds", parse_bound, cfg.bounds);
    each("solve", parse_solve, cfg.solve);
    each("verify", parse_verify, cfg.verify);
    each("soliton", parse_soliton, cfg.soliton);
    each("sweeps", parse_sweep, cfg.sweeps);
    if (doc.contains("output")) {
        const Json &o = doc.at("output");
        check_keys(o, "output", {"format", "directory"});
        if (o.contains("format")) {
            cfg.output.format = get_string(o, "output", "format");
            if (cfg.output.format != "csv" && cfg.output.format != "md" &&
                cfg.output.format != "json")
                throw ValidationError("config: output.format must be csv | md | json");
        }
        if (o.contains("directory")) cfg.output.directory = get_string(o, "output", "directory");
    }

    // Cross references and expression syntax are validated up front.
    std::set<std::string> names;
    for (const ModelSpec &m : cfg.models) {
        if (!names.insert(m.name).second)
            throw ValidationError("config: duplicate model name '" + m.name + "'");
        build_model(m);
    }
    for (const CertifySpec &c : cfg.certify) cfg.resolve_model(c.model);
    for (const SolveSpec &s : cfg.solve) cfg.resolve_model(s.model);
    for (const VerifySpec &v : cfg.verify) {
        cfg.resolve_model(v.model);
        if (v.h_expr) parse(*v.h_expr);
        if (v.f_expr) parse(*v.f_expr);
    }
    return cfg;
}

RunConfig load_config(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    Json doc;
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        try {
            doc = Json::parse(text);
        } catch (const nlohmann::json::parse_error &e) {
            throw ValidationError(std::string("config: JSON parse error: ") + e.what());
        }
    } else if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml") {
        doc = toml_to_json(text);
    } else {
        throw ValidationError("config file must end in .json or .toml");
    }
    return config_from_json(doc);
}

WarpedModel build_model(const ModelSpec &spec) {
    return make_model(spec.name, spec.n, spec.warp, spec.weight, spec.fiber_ricci_lb,
                      spec.t_lo, spec.t_hi, spec.params);
}

namespace {

Json params_json(const Params &p) {
    Json o = Json::object();
    for (const auto &kv : p) o[kv.first] = kv.second;
    return o;
}

template <class T>
void put_opt(Json &o, const char *key, const std::optional<T> &v) {
    if (v) o[key] = *v;
}

} // namespace

Json config_to_json(const RunConfig &cfg) {
    Json doc = Json::object();
    doc["seed"] = cfg.seed;
    doc["models"] = Json::array();
    for (const ModelSpec &m : cfg.models) {
        Json o{{"name", m.name},
               {"n", m.n},
               {"warp", m.warp},
               {"weight", m.weight},
               {"fiber_ricci_lb", m.fiber_ricci_lb},
               {"domain", Json::array({m.t_lo, m.t_hi})},
               {"params", params_json(m.params)}};
        doc["models"].push_back(std::move(o));
    }
    doc["certify"] = Json::array();
    for (const CertifySpec &c : cfg.certify) {
        Json o{{"model", c.model}, {"samples", c.samples}};
        put_opt(o, "target_K", c.target_k);
        put_opt(o, "target_theta", c.target_theta);
        doc["certify"].push_back(std::move(o));
    }
    doc["bounds"] = Json::array();
    for (const BoundQuerySpec &b : cfg.bounds) {
        Json o{{"n", b.n}, {"K", b.k}, {"theta", b.theta}};
        put_opt(o, "m0", b.m0);
        put_opt(o, "m", b.m);
        put_opt(o, "lambda", b.lambda);
        put_opt(o, "epsilon", b.epsilon);
        put_opt(o, "R", b.radius);
        put_opt(o, "C_local", b.c_local);
        doc["bounds"].push_back(std::move(o));
    }
    doc["solve"] = Json::array();
    for (const SolveSpec &s : cfg.solve) {
        const char *strat = s.strategy == SolveStrategy::Dirichlet      ? "dirichlet"
                            : s.strategy == SolveStrategy::OddSector    ? "odd_sector"
                                                                        : "neumann_second";
        doc["solve"].push_back(Json{{"model", s.model},
                                    {"T_list", s.t_list},
                                    {"h", s.h},
                                    {"strategy", strat},
                                    {"count", s.count}});
    }
    doc["verify"] = Json::array();
    for (const VerifySpec &v : cfg.verify) {
        Json o{{"model", v.model},
               {"checks", v.checks},
               {"K", v.k},
               {"theta", v.theta},
               {"epsilon", v.epsilon},
               {"R", v.radius},
               {"C7", v.c7},
               {"C_cutoff", v.c_cutoff},
               {"cutoff_samples", v.cutoff_samples},
               {"interior_margin", v.interior_margin},
               {"tolerance", v.tolerance},
               {"use_extrapolated_lambda", v.use_extrapolated_lambda}};
        put_opt(o, "m0", v.m0);
        put_opt(o, "t0", v.t0);
        put_opt(o, "h_expr", v.h_expr);
        put_opt(o, "f_expr", v.f_expr);
        put_opt(o, "lambda", v.lambda_override);
        doc["verify"].push_back(std::move(o));
    }
    doc["soliton"] = Json::array();
    for (const SolitonSpecCfg &s : cfg.soliton)
        doc["soliton"].push_back(Json{{"kind", s.kind},
                                      {"n", s.n},
                                      {"rho", s.rho},
                                      {"a", s.a},
                                      {"b", s.b},
                                      {"c", s.c}});
    doc["sweeps"] = Json::array();
    for (const SweepSpec &s : cfg.sweeps)
        doc["sweeps"].push_back(
            Json{{"type", s.type}, {"count", s.count}, {"T_list", s.t_list}, {"h", s.h}});
    doc["output"] = Json{{"format", cfg.output.format}, {"directory", cfg.output.directory}};
    return doc;
}

} // namespace bes

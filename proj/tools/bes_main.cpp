// bes: eigenvalue bounds, curvature certification, radial spectral solves and
// gradient-estimate verification on weighted warped-product models.
//
// Subcommands run one pipeline phase each; `run` executes everything in the
// config in dependency order, `report` re-emits a stored bundle.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "bes/config.hpp"
#include "bes/errors.hpp"
#include "bes/report.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kNumeric = 2, kIo = 3 };

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string format;
    std::string bundle_path;
    long long seed = -1;
    int jobs = 1;
};

void add_common(CLI::App *cmd, CommonArgs &args, bool needs_config) {
    if (needs_config)
        cmd->add_option("--config", args.config_path, "config file (.json or .toml)")
            ->required();
    cmd->add_option("--out", args.out_dir, "output directory (default: stdout)");
    cmd->add_option("--format", args.format, "csv | md | json (default from config)");
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--jobs", args.jobs, "parallel workers for independent units")
        ->check(CLI::PositiveNumber);
}

int emit(const bes::ReportBundle &bundle, const bes::RunConfig &cfg,
         const CommonArgs &args) {
    std::string format = !args.format.empty() ? args.format : cfg.output.format;
    std::string dir = !args.out_dir.empty() ? args.out_dir : cfg.output.directory;
    if (dir.empty()) {
        if (format == "csv") {
            std::cerr << "error: csv output needs --out DIR\n";
            return kValidation;
        }
        if (format == "json")
            bes::emit_json(bundle, std::cout);
        else
            bes::emit_markdown(bundle, std::cout);
    } else {
        for (const std::string &f : bes::emit_to_directory(bundle, dir, format))
            std::cerr << "wrote " << f << "\n";
    }
    return bundle.unit_failures == 0 ? kOk : kNumeric;
}

int run_phase(const CommonArgs &args, const std::string &phase) {
    bes::RunConfig cfg = bes::load_config(args.config_path);
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    if (phase != "run") {
        // Keep only the requested unit list (solves stay for verify).
        if (phase != "bounds") cfg.bounds.clear();
        if (phase != "certify" && phase != "verify") cfg.certify.clear();
        if (phase != "solve" && phase != "verify") cfg.solve.clear();
        if (phase != "verify") cfg.verify.clear();
        if (phase != "soliton") cfg.soliton.clear();
        cfg.sweeps.clear();
    }
    const bes::ReportBundle bundle = bes::run_pipeline(cfg, args.jobs);
    return emit(bundle, cfg, args);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"eigenvalue bounds and gradient estimates for radial drift operators"};
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App *certify = app.add_subcommand("certify", "curvature/gradient certification");
    CLI::App *bounds = app.add_subcommand("bounds", "closed-form bound evaluation");
    CLI::App *solve = app.add_subcommand("solve", "spectral solves with domain exhaustion");
    CLI::App *verify = app.add_subcommand("verify", "gradient-estimate verification");
    CLI::App *soliton = app.add_subcommand("soliton", "soliton identity audits");
    CLI::App *run = app.add_subcommand("run", "full pipeline");
    for (CLI::App *cmd : {certify, bounds, solve, verify, soliton, run})
        add_common(cmd, args, true);

    CLI::App *report = app.add_subcommand("report", "re-emit a stored bundle");
    report->add_option("--bundle", args.bundle_path, "bundle.json from a previous run")
        ->required();
    report->add_option("--out", args.out_dir, "output directory (default: stdout)");
    report->add_option("--format", args.format, "csv | md | json")->default_val("md");

    CLI11_PARSE(app, argc, argv);

    try {
        if (report->parsed()) {
            const bes::ReportBundle bundle = bes::load_bundle(args.bundle_path);
            bes::RunConfig dummy;
            dummy.output.format = "md";
            return emit(bundle, dummy, args);
        }
        for (const auto &[cmd, phase] :
             {std::pair{certify, "certify"}, {bounds, "bounds"}, {solve, "solve"},
              {verify, "verify"}, {soliton, "soliton"}, {run, "run"}})
            if (cmd->parsed()) return run_phase(args, phase);
        std::cerr << "error: no subcommand\n";
        return kValidation;
    } catch (const bes::ValidationError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const bes::ParseError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const bes::EvalError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    } catch (const bes::NumericError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    } catch (const bes::IoError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    }
}

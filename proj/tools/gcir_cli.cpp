// gcir: run, validate and inspect generalized CIR verification experiments.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gcir/config.hpp"
#include "gcir/experiments.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kViolated = 1;
constexpr int kUsage = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw gcir::ValidationError("--config", "cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            if (item.empty() || item[0] == '-') throw std::invalid_argument(item);
            seeds.push_back(std::stoull(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw gcir::ValidationError("--seed", "expected N or N,M,... with non-negative integers");
        }
    }
    if (seeds.empty()) throw gcir::ValidationError("--seed", "no seed given");
    return seeds;
}

struct RunOptions {
    std::string config_path;
    std::string seeds;
    std::string out_dir;
    std::string experiment;
    std::optional<double> scale_constant;
    std::optional<std::uint32_t> paths;
    std::optional<std::uint32_t> steps;
};

gcir::ExperimentConfig load(const RunOptions& opt) {
    gcir::ExperimentConfig cfg = gcir::parse_config(read_file(opt.config_path));
    if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
    if (!opt.experiment.empty()) cfg.experiment = gcir::experiment_from_string(opt.experiment);
    if (opt.scale_constant) cfg.scale_constant = *opt.scale_constant;
    if (opt.paths) cfg.sim.n_paths = *opt.paths;
    if (opt.steps) cfg.sim.n_steps = *opt.steps;
    gcir::validate_config(cfg);
    return cfg;
}

int report_config_error(const std::exception& e) {
    if (const auto* p = dynamic_cast<const gcir::ParseError*>(&e)) {
        std::cerr << "parse error (line " << p->line() << (p->field().empty() ? "" : ", field " + p->field())
                  << "): " << p->what() << '\n';
    } else if (const auto* v = dynamic_cast<const gcir::ValidationError*>(&e)) {
        std::cerr << "invalid configuration: " << v->field() << ": " << v->reason() << '\n';
    } else {
        std::cerr << "error: " << e.what() << '\n';
    }
    return kUsage;
}

int do_run(const RunOptions& opt) {
    gcir::ExperimentConfig base;
    std::vector<std::uint64_t> seeds;
    try {
        base = load(opt);
        seeds = opt.seeds.empty() ? std::vector<std::uint64_t>{base.sim.seed} : parse_seeds(opt.seeds);
    } catch (const std::exception& e) {
        return report_config_error(e);
    }
    int status = kPass;
    for (std::uint64_t seed : seeds) {
        gcir::ExperimentConfig cfg = base;
        cfg.sim.seed = seed;
        const auto dir = gcir::make_run_dir(cfg.out_dir, seed);
        const auto outcome = gcir::run_experiment(cfg, dir, std::cerr);
        std::size_t violated = 0;
        for (const auto& r : outcome.reports) violated += r.verdict == gcir::Verdict::Violated;
        std::cout << dir.string() << ": " << outcome.reports.size() << " checks, " << violated << " violated";
        if (outcome.failed) std::cout << ", aborted: " << outcome.failure;
        std::cout << '\n';
        if (outcome.failed || violated > 0) status = kViolated;
    }
    return status;
}

int do_validate(const std::string& config_path) {
    try {
        RunOptions opt;
        opt.config_path = config_path;
        const auto cfg = load(opt);
        std::cout << gcir::config_to_json(cfg) << '\n';
        return kPass;
    } catch (const std::exception& e) {
        return report_config_error(e);
    }
}

int do_report(const std::string& dir) {
    try {
        gcir::print_run_report(dir, std::cout);
        return kPass;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized CIR diffusion: Harnack, log-Harnack, intrinsic-gradient and super Poincare checks"};
    app.footer(gcir::config_defaults_help() +
               "\nExit codes: 0 all checks pass, 1 a check is Violated or the run aborted, 2 usage or "
               "configuration error.\nGCIR_THREADS caps the number of worker threads; results do not depend on it.");
    app.require_subcommand(1);

    RunOptions run_opt;
    auto* run = app.add_subcommand("run", "Run an experiment and write artifacts to <out>/<timestamp>_seed<N>");
    run->add_option("--config", run_opt.config_path, "JSON configuration file")->required();
    run->add_option("--seed", run_opt.seeds, "Seed, or a comma-separated list for one run per seed");
    run->add_option("--out", run_opt.out_dir, "Output directory (overrides output.dir)");
    run->add_option("--experiment", run_opt.experiment,
                    "simulate|coupling|harnack|log-harnack|gradient|measure|isoperimetric|super-poincare|"
                    "optimality|all");
    run->add_option("--scale-constant", run_opt.scale_constant,
                    "Debug: multiply the inequality constants by X (0.5 must make the Harnack check fail)");
    run->add_option("--paths", run_opt.paths, "Monte Carlo paths (overrides sim.n_paths)");
    run->add_option("--steps", run_opt.steps, "Time steps (overrides sim.n_steps)");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Parse and validate a configuration, print it with defaults");
    validate->add_option("--config", validate_path, "JSON configuration file")->required();

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Pretty-print the results of a run directory");
    report->add_option("dir", report_dir, "Run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    if (*run) return do_run(run_opt);
    if (*validate) return do_validate(validate_path);
    if (*report) return do_report(report_dir);
    return kUsage;
}

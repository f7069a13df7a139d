#pragma once

// Experiment orchestration: runs the configured checks, writes CSV/JSON
// artifacts into a run directory and collects the verdicts.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gcir/config.hpp"
#include "gcir/inequalities.hpp"

namespace gcir {

inline constexpr std::string_view kVersion = "1.0.0";

struct RunOutcome {
    std::filesystem::path dir;
    std::vector<VerificationReport> reports;
    bool failed = false;  // an error aborted the run
    std::string failure;

    [[nodiscard]] bool violated() const { return any_violated(reports); }
};

// <out_dir>/<UTC timestamp>_seed<N>, made unique with a numeric suffix.
[[nodiscard]] std::filesystem::path make_run_dir(const std::string& out_dir, std::uint64_t seed);

// Runs cfg.experiment into `dir` (created if missing). Errors are caught,
// recorded in a FAILED marker next to whatever was already written, and
// reported through RunOutcome::failed. `log` receives progress lines.
RunOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                          std::ostream& log);

// Individual experiments, exposed for tests. Each appends to `reports`.
void run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                  std::vector<VerificationReport>& reports);
void run_coupling(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                  std::vector<VerificationReport>& reports);
// Harnack, log-Harnack and gradient checks over plans x horizons x functions,
// reusing one pair of ensembles per (plan, horizon).
void run_harnack_type(const ExperimentConfig& cfg, bool harnack, bool log_harnack, bool gradient,
                      std::vector<VerificationReport>& reports);
void run_measure(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                 std::vector<VerificationReport>& reports);
void run_isoperimetric(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                       std::vector<VerificationReport>& reports);
void run_super_poincare(const ExperimentConfig& cfg, std::vector<VerificationReport>& reports);
void run_optimality(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                    std::vector<VerificationReport>& reports);

// Human-readable summary of a run directory.
void print_run_report(const std::filesystem::path& dir, std::ostream& out);

}  // namespace gcir

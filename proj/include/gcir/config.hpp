#pragma once

// JSON experiment configuration: parsing, defaults and validation.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gcir/simulation.hpp"

namespace gcir {

enum class Experiment {
    Simulate,
    Coupling,
    Harnack,
    LogHarnack,
    Gradient,
    Measure,
    Isoperimetric,
    SuperPoincare,
    Optimality,
    All,
};

std::string_view to_string(Experiment e);
// Throws ValidationError on an unknown name.
Experiment experiment_from_string(std::string_view name);

// Malformed document: syntax error or a value of the wrong JSON type.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::string field, const std::string& what)
        : std::runtime_error(what), line_(line), field_(std::move(field)) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

// Well-formed document whose values are not acceptable.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string field, std::string reason)
        : std::runtime_error(field + ": " + reason), field_(std::move(field)), reason_(std::move(reason)) {}
    [[nodiscard]] const std::string& field() const noexcept { return field_; }
    [[nodiscard]] const std::string& reason() const noexcept { return reason_; }

private:
    std::string field_;
    std::string reason_;
};

struct PlanSpec {
    double x = 0.0;
    double y = 0.0;
    double p = 2.0;
};

struct ExperimentConfig {
    double alpha = 0.0;
    double delta = 0.0;
    double h = 0.0;
    SimConfig sim;
    Experiment experiment = Experiment::All;

    // simulate
    double start = 2.0;
    std::vector<double> occupation_eps{1e-1, 1e-2, 1e-3, 1e-4};
    // coupling / Harnack-type checks
    std::vector<PlanSpec> plans{{0.5, 1.0, 2.0}, {1.0, 2.0, 2.0}, {0.5, 2.0, 2.0}};
    std::vector<double> horizons{1.0, 2.0};
    std::vector<std::string> functions;  // empty: built-in family
    double scale_constant = 1.0;         // debug multiplier on the inequality constants
    // measure / isoperimetric / super Poincare
    std::vector<double> r_grid{1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4};
    std::vector<double> k_ladder{1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10};
    std::vector<double> super_poincare_r{0.5, 0.1, 0.02};
    // optimality
    std::vector<double> lambdas{0.75, 0.99};
    double probe_eps = 0.1;
    double probe_bound = 1e6;
    // output
    std::string out_dir = "runs";
    bool write_paths = false;
};

// Parses a JSON document. A manifest written by a previous run is accepted
// too: its "config" member is used. Defaults fill omitted fields; every
// value is then validated.
[[nodiscard]] ExperimentConfig parse_config(std::string_view text);

// Throws ValidationError naming the first offending field.
void validate_config(const ExperimentConfig& config);

// Full configuration as JSON text, re-readable by parse_config.
[[nodiscard]] std::string config_to_json(const ExperimentConfig& config, int indent = 2);

// Default table printed by --help.
[[nodiscard]] std::string config_defaults_help();

}  // namespace gcir

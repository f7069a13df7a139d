#include "gcir/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "gcir/model.hpp"

namespace gcir {

namespace {

using json = nlohmann::json;

struct ExperimentName {
    Experiment value;
    std::string_view name;
};

constexpr std::array<ExperimentName, 10> kExperiments{{
    {Experiment::Simulate, "simulate"},
    {Experiment::Coupling, "coupling"},
    {Experiment::Harnack, "harnack"},
    {Experiment::LogHarnack, "log-harnack"},
    {Experiment::Gradient, "gradient"},
    {Experiment::Measure, "measure"},
    {Experiment::Isoperimetric, "isoperimetric"},
    {Experiment::SuperPoincare, "super-poincare"},
    {Experiment::Optimality, "optimality"},
    {Experiment::All, "all"},
}};

std::size_t line_at(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

// Line of the first occurrence of "key" in the source; 0 when absent.
std::size_t line_of_key(std::string_view text, const std::string& key) {
    const std::string needle = '"' + key + '"';
    const auto pos = text.find(needle);
    return pos == std::string_view::npos ? 0 : line_at(text, pos);
}

// Last object key that starts before `offset`, for locating syntax errors.
std::string key_before(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    std::string last;
    std::size_t i = 0;
    while (i < offset) {
        if (text[i] != '"') {
            ++i;
            continue;
        }
        const auto end = text.find('"', i + 1);
        if (end == std::string_view::npos || end >= offset) break;
        auto next = text.find_first_not_of(" \t\r\n", end + 1);
        if (next != std::string_view::npos && text[next] == ':') last = std::string(text.substr(i + 1, end - i - 1));
        i = end + 1;
    }
    return last;
}

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    [[noreturn]] void type_error(const std::string& path, const std::string& key,
                                 const std::string& expected) const {
        throw ParseError(line_of_key(text_, key), path, path + ": expected " + expected);
    }

    void check_keys(const json& obj, const std::string& prefix,
                    std::initializer_list<std::string_view> allowed) const {
        for (const auto& item : obj.items()) {
            if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
                throw ValidationError(prefix + item.key(), "unknown field");
            }
        }
    }

    const json& object(const json& parent, const std::string& key, const std::string& path) const {
        const json& v = parent.at(key);
        if (!v.is_object()) type_error(path, key, "an object");
        return v;
    }

    double number(const json& parent, const std::string& key, const std::string& path, double fallback) const {
        if (!parent.contains(key)) return fallback;
        const json& v = parent.at(key);
        if (!v.is_number()) type_error(path, key, "a number");
        return v.get<double>();
    }

    double required_number(const json& parent, const std::string& key, const std::string& path) const {
        if (!parent.contains(key)) throw ValidationError(path, "required field is missing");
        return number(parent, key, path, 0.0);
    }

    std::uint64_t unsigned_integer(const json& parent, const std::string& key, const std::string& path,
                                   std::uint64_t fallback) const {
        if (!parent.contains(key)) return fallback;
        const json& v = parent.at(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer()) {
            throw ValidationError(path, "must be non-negative");
        }
        type_error(path, key, "an integer");
    }

    std::string string(const json& parent, const std::string& key, const std::string& path,
                       const std::string& fallback) const {
        if (!parent.contains(key)) return fallback;
        const json& v = parent.at(key);
        if (!v.is_string()) type_error(path, key, "a string");
        return v.get<std::string>();
    }

    bool boolean(const json& parent, const std::string& key, const std::string& path, bool fallback) const {
        if (!parent.contains(key)) return fallback;
        const json& v = parent.at(key);
        if (!v.is_boolean()) type_error(path, key, "true or false");
        return v.get<bool>();
    }

    std::vector<double> numbers(const json& parent, const std::string& key, const std::vector<double>& fallback) const {
        if (!parent.contains(key)) return fallback;
        const json& v = parent.at(key);
        if (!v.is_array()) type_error(key, key, "an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) type_error(key + "[" + std::to_string(i) + "]", key, "a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

private:
    std::string_view text_;
};

std::uint32_t narrow_count(std::uint64_t v, const std::string& field) {
    if (v > 0xFFFFFFFFull) throw ValidationError(field, "too large");
    return static_cast<std::uint32_t>(v);
}

void require(bool ok, const std::string& field, const std::string& reason) {
    if (!ok) throw ValidationError(field, reason);
}

bool harnack_type(Experiment e) {
    return e == Experiment::Coupling || e == Experiment::Harnack || e == Experiment::LogHarnack ||
           e == Experiment::Gradient || e == Experiment::All;
}

}  // namespace

std::string_view to_string(Experiment e) {
    for (const auto& entry : kExperiments) {
        if (entry.value == e) return entry.name;
    }
    return "unknown";
}

Experiment experiment_from_string(std::string_view name) {
    for (const auto& entry : kExperiments) {
        if (entry.name == name) return entry.value;
    }
    std::string names;
    for (const auto& entry : kExperiments) names += (names.empty() ? "" : "|") + std::string(entry.name);
    throw ValidationError("experiment", "unknown experiment '" + std::string(name) + "' (expected " + names + ")");
}

ExperimentConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
        throw ParseError(line_at(text, offset), key_before(text, offset),
                         "malformed JSON at line " + std::to_string(line_at(text, offset)) + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError(1, "", "configuration must be a JSON object");
    if (doc.contains("config") && doc.at("config").is_object()) doc = doc.at("config");

    const Reader rd(text);
    rd.check_keys(doc, "",
                  {"model", "sim", "experiment", "start", "occupation_eps", "plans", "horizons",
                   "functions", "scale_constant", "r_grid", "k_ladder", "super_poincare_r", "lambdas",
                   "probe_eps", "probe_bound", "output"});

    ExperimentConfig cfg;
    if (!doc.contains("model")) throw ValidationError("model", "required field is missing");
    const json& model = rd.object(doc, "model", "model");
    rd.check_keys(model, "model.", {"alpha", "delta", "h"});
    cfg.alpha = rd.required_number(model, "alpha", "alpha");
    cfg.delta = rd.required_number(model, "delta", "delta");
    cfg.h = rd.required_number(model, "h", "h");

    if (doc.contains("sim")) {
        const json& sim = rd.object(doc, "sim", "sim");
        rd.check_keys(sim, "sim.", {"T", "n_steps", "n_paths", "seed", "scheme", "substeps"});
        cfg.sim.horizon = rd.number(sim, "T", "sim.T", cfg.sim.horizon);
        cfg.sim.n_steps = narrow_count(rd.unsigned_integer(sim, "n_steps", "sim.n_steps", cfg.sim.n_steps), "sim.n_steps");
        cfg.sim.n_paths = narrow_count(rd.unsigned_integer(sim, "n_paths", "sim.n_paths", cfg.sim.n_paths), "sim.n_paths");
        cfg.sim.seed = rd.unsigned_integer(sim, "seed", "sim.seed", cfg.sim.seed);
        cfg.sim.substeps = narrow_count(rd.unsigned_integer(sim, "substeps", "sim.substeps", cfg.sim.substeps), "sim.substeps");
        try {
            cfg.sim.scheme = scheme_from_string(rd.string(sim, "scheme", "sim.scheme", "reflected"));
        } catch (const Error& e) {
            throw ValidationError("sim.scheme", e.what());
        }
    }

    cfg.experiment = experiment_from_string(rd.string(doc, "experiment", "experiment", "all"));
    cfg.start = rd.number(doc, "start", "start", cfg.start);
    cfg.occupation_eps = rd.numbers(doc, "occupation_eps", cfg.occupation_eps);
    if (doc.contains("plans")) {
        const json& plans = doc.at("plans");
        if (!plans.is_array()) rd.type_error("plans", "plans", "an array of {x, y, p} objects");
        cfg.plans.clear();
        for (std::size_t i = 0; i < plans.size(); ++i) {
            const std::string path = "plans[" + std::to_string(i) + "]";
            if (!plans[i].is_object()) rd.type_error(path, "plans", "an object");
            rd.check_keys(plans[i], path + ".", {"x", "y", "p"});
            PlanSpec spec;
            spec.x = rd.required_number(plans[i], "x", path + ".x");
            spec.y = rd.required_number(plans[i], "y", path + ".y");
            spec.p = rd.number(plans[i], "p", path + ".p", spec.p);
            cfg.plans.push_back(spec);
        }
    }
    cfg.horizons = rd.numbers(doc, "horizons", cfg.horizons);
    if (doc.contains("functions")) {
        const json& fs = doc.at("functions");
        if (!fs.is_array()) rd.type_error("functions", "functions", "an array of strings");
        for (std::size_t i = 0; i < fs.size(); ++i) {
            if (!fs[i].is_string()) rd.type_error("functions[" + std::to_string(i) + "]", "functions", "a string");
            cfg.functions.push_back(fs[i].get<std::string>());
        }
    }
    cfg.scale_constant = rd.number(doc, "scale_constant", "scale_constant", cfg.scale_constant);
    cfg.r_grid = rd.numbers(doc, "r_grid", cfg.r_grid);
    cfg.k_ladder = rd.numbers(doc, "k_ladder", cfg.k_ladder);
    cfg.super_poincare_r = rd.numbers(doc, "super_poincare_r", cfg.super_poincare_r);
    cfg.lambdas = rd.numbers(doc, "lambdas", cfg.lambdas);
    cfg.probe_eps = rd.number(doc, "probe_eps", "probe_eps", cfg.probe_eps);
    cfg.probe_bound = rd.number(doc, "probe_bound", "probe_bound", cfg.probe_bound);
    if (doc.contains("output")) {
        const json& out = rd.object(doc, "output", "output");
        rd.check_keys(out, "output.", {"dir", "paths_csv"});
        cfg.out_dir = rd.string(out, "dir", "output.dir", cfg.out_dir);
        cfg.write_paths = rd.boolean(out, "paths_csv", "output.paths_csv", cfg.write_paths);
    }
    validate_config(cfg);
    return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
    try {
        (void)ModelParams::validate(cfg.alpha, cfg.delta, cfg.h);
    } catch (const ParamError& e) {
        const auto& v = e.violations().front();
        throw ValidationError(v.field, v.reason);
    }
    require(cfg.sim.horizon > 0.0 && std::isfinite(cfg.sim.horizon), "sim.T", "must be > 0");
    require(cfg.sim.n_steps > 0, "sim.n_steps", "must be positive");
    require(cfg.sim.n_paths >= 2, "sim.n_paths", "must be at least 2");
    require(cfg.sim.substeps > 0, "sim.substeps", "must be positive");
    if (harnack_type(cfg.experiment)) {
        require(cfg.alpha >= 0.5 * cfg.h, "alpha", "Harnack-type experiments require alpha >= h/2");
        require(cfg.delta > 0.5 * cfg.h, "delta", "Harnack-type experiments require delta > h/2");
    }
    require(cfg.start >= 0.0, "start", "must be non-negative");
    for (std::size_t i = 0; i < cfg.occupation_eps.size(); ++i) {
        require(cfg.occupation_eps[i] > 0.0, "occupation_eps[" + std::to_string(i) + "]", "must be > 0");
    }
    require(!cfg.plans.empty(), "plans", "must not be empty");
    for (std::size_t i = 0; i < cfg.plans.size(); ++i) {
        const std::string path = "plans[" + std::to_string(i) + "]";
        require(cfg.plans[i].x >= 0.0, path + ".x", "must be non-negative");
        require(cfg.plans[i].y >= 0.0, path + ".y", "must be non-negative");
        require(cfg.plans[i].p > 1.0, path + ".p", "must be > 1");
    }
    require(!cfg.horizons.empty(), "horizons", "must not be empty");
    for (std::size_t i = 0; i < cfg.horizons.size(); ++i) {
        require(cfg.horizons[i] > 0.0 && std::isfinite(cfg.horizons[i]),
                "horizons[" + std::to_string(i) + "]", "must be > 0");
    }
    for (std::size_t i = 0; i < cfg.functions.size(); ++i) {
        require(!cfg.functions[i].empty(), "functions[" + std::to_string(i) + "]", "must not be empty");
    }
    require(cfg.scale_constant > 0.0, "scale_constant", "must be > 0");
    for (std::size_t i = 0; i < cfg.r_grid.size(); ++i) {
        require(cfg.r_grid[i] > 0.0 && cfg.r_grid[i] < 1.0, "r_grid[" + std::to_string(i) + "]", "must lie in (0,1)");
    }
    for (std::size_t i = 0; i < cfg.k_ladder.size(); ++i) {
        require(cfg.k_ladder[i] > 0.0 && cfg.k_ladder[i] < 1.0, "k_ladder[" + std::to_string(i) + "]", "must lie in (0,1)");
    }
    for (std::size_t i = 0; i < cfg.super_poincare_r.size(); ++i) {
        require(cfg.super_poincare_r[i] > 0.0, "super_poincare_r[" + std::to_string(i) + "]", "must be > 0");
    }
    for (std::size_t i = 0; i < cfg.lambdas.size(); ++i) {
        require(cfg.lambdas[i] > 0.0 && cfg.lambdas[i] < 1.0, "lambdas[" + std::to_string(i) + "]", "must lie in (0,1)");
    }
    require(cfg.probe_eps > 0.0, "probe_eps", "must be > 0");
    require(cfg.probe_bound >= 0.0, "probe_bound", "must be >= 0");
    require(!cfg.out_dir.empty(), "output.dir", "must not be empty");
}

std::string config_to_json(const ExperimentConfig& cfg, int indent) {
    json doc;
    doc["model"] = {{"alpha", cfg.alpha}, {"delta", cfg.delta}, {"h", cfg.h}};
    doc["sim"] = {{"T", cfg.sim.horizon},
                  {"n_steps", cfg.sim.n_steps},
                  {"n_paths", cfg.sim.n_paths},
                  {"seed", cfg.sim.seed},
                  {"scheme", std::string(to_string(cfg.sim.scheme))},
                  {"substeps", cfg.sim.substeps}};
    doc["experiment"] = std::string(to_string(cfg.experiment));
    doc["start"] = cfg.start;
    doc["occupation_eps"] = cfg.occupation_eps;
    doc["plans"] = json::array();
    for (const auto& p : cfg.plans) doc["plans"].push_back({{"x", p.x}, {"y", p.y}, {"p", p.p}});
    doc["horizons"] = cfg.horizons;
    doc["functions"] = cfg.functions;
    doc["scale_constant"] = cfg.scale_constant;
    doc["r_grid"] = cfg.r_grid;
    doc["k_ladder"] = cfg.k_ladder;
    doc["super_poincare_r"] = cfg.super_poincare_r;
    doc["lambdas"] = cfg.lambdas;
    doc["probe_eps"] = cfg.probe_eps;
    doc["probe_bound"] = cfg.probe_bound;
    doc["output"] = {{"dir", cfg.out_dir}, {"paths_csv", cfg.write_paths}};
    return doc.dump(indent);
}

std::string config_defaults_help() {
    const ExperimentConfig d;
    std::ostringstream os;
    os << "Config defaults (JSON; only model.alpha, model.delta, model.h are required):\n"
       << "  sim.T=" << d.sim.horizon << "  sim.n_steps=" << d.sim.n_steps << "  sim.n_paths=" << d.sim.n_paths
       << "  sim.seed=" << d.sim.seed << "  sim.scheme=reflected|absorbed  sim.substeps=1\n"
       << "  experiment=all  start=2  occupation_eps=[0.1,0.01,0.001,0.0001]\n"
       << "  plans=[{x:0.5,y:1,p:2},{x:1,y:2,p:2},{x:0.5,y:2,p:2}]  horizons=[1,2]\n"
       << "  functions=[] (built-in family)  scale_constant=1\n"
       << "  r_grid=[0.1 .. 1e-4]  k_ladder=[1e-4 .. 1e-10]  super_poincare_r=[0.5,0.1,0.02]\n"
       << "  lambdas=[0.75,0.99]  probe_eps=0.1  probe_bound=1e6\n"
       << "  output.dir=runs  output.paths_csv=false\n";
    return os.str();
}

}  // namespace gcir

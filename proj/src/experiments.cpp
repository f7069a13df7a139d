#include "gcir/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "gcir/coupling.hpp"
#include "gcir/measure.hpp"
#include "gcir/parallel.hpp"

namespace gcir {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

ModelParams params_of(const ExperimentConfig& cfg) {
    return ModelParams::validate(cfg.alpha, cfg.delta, cfg.h);
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// value <= limit, exact comparison.
VerificationReport upper_bound_check(std::string id, std::string kind, double value, double limit) {
    VerificationReport r;
    r.check_id = std::move(id);
    r.kind = std::move(kind);
    r.lhs = value;
    r.rhs = limit;
    r.slack = limit - value;
    r.verdict = value <= limit ? Verdict::Holds : Verdict::Violated;
    return r;
}

// |estimate - exact| within z_threshold standard errors.
VerificationReport two_sided_check(std::string id, std::string kind, double estimate, double exact,
                                   double std_error) {
    VerificationReport r;
    r.check_id = std::move(id);
    r.kind = std::move(kind);
    r.lhs = estimate;
    r.rhs = exact;
    r.slack = exact - estimate;
    r.std_error = std_error;
    const double gap = std::abs(estimate - exact);
    r.z = std_error > 0.0 ? gap / std_error : (gap > 0.0 ? INFINITY : 0.0);
    r.verdict = r.z > 4.0 ? Verdict::Violated : (gap == 0.0 ? Verdict::Holds : Verdict::HoldsWithinError);
    return r;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::InvalidConfig, "output.dir", "cannot write " + path.string());
    out.precision(17);
    return out;
}

std::vector<TestFunction> harnack_functions(const ExperimentConfig& cfg, const ModelParams& params) {
    if (cfg.functions.empty()) return harnack_family(params);
    std::vector<TestFunction> out;
    for (const auto& id : cfg.functions) out.push_back(find_harnack_function(params, id));
    return out;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
    return os.str();
}

// JSON has no infinities; non-finite values are written as strings.
json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

std::string number_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    std::ostringstream os;
    os << std::setprecision(6) << v.get<double>();
    return os.str();
}

json reports_json(const std::vector<VerificationReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) {
        arr.push_back({{"check_id", r.check_id},
                       {"kind", r.kind},
                       {"lhs", number(r.lhs)},
                       {"rhs", number(r.rhs)},
                       {"slack", number(r.slack)},
                       {"std_error", number(r.std_error)},
                       {"z", number(r.z)},
                       {"verdict", std::string(to_string(r.verdict))},
                       {"note", r.note}});
    }
    return arr;
}

}  // namespace

fs::path make_run_dir(const std::string& out_dir, std::uint64_t seed) {
    const fs::path base = fs::path(out_dir) / (utc_timestamp() + "_seed" + std::to_string(seed));
    fs::path dir = base;
    for (int i = 1; fs::exists(dir); ++i) dir = base.string() + "_" + std::to_string(i);
    return dir;
}

void run_simulate(const ExperimentConfig& cfg, const fs::path& dir,
                  std::vector<VerificationReport>& reports) {
    const auto params = params_of(cfg);
    const auto& sim = cfg.sim;
    std::vector<double> terminal;
    double min_value = INFINITY;
    const double stored = static_cast<double>(sim.n_paths) * (sim.n_steps + 1.0);
    if (cfg.write_paths && stored <= 5e7) {
        const auto ensemble = simulate_ensemble(params, cfg.start, sim);
        auto out = open_out(dir / "paths.csv");
        write_paths_csv(out, ensemble);
        for (std::size_t i = 0; i < ensemble.n_paths; ++i) terminal.push_back(ensemble.terminal(i));
        min_value = *std::min_element(ensemble.values.begin(), ensemble.values.end());
    } else {
        terminal = simulate_terminal(params, cfg.start, sim);
        min_value = *std::min_element(terminal.begin(), terminal.end());
    }
    const auto est = MCEstimate::from_samples(terminal);
    const double exact = affine_mean(params, cfg.start, sim.horizon);
    reports.push_back(two_sided_check("affine-mean:x0=" + fmt(cfg.start), "affine-mean", est.mean, exact,
                                      est.std_error));
    reports.push_back(upper_bound_check("positivity:x0=" + fmt(cfg.start), "positivity", -min_value, 0.0));

    const auto profile = occupation_time_profile(params, cfg.start, sim, cfg.occupation_eps);
    auto out = open_out(dir / "occupation.csv");
    out << "eps,mean,std_error\n";
    for (std::size_t i = 0; i < profile.size(); ++i) {
        out << cfg.occupation_eps[i] << ',' << profile[i].mean << ',' << profile[i].std_error << '\n';
    }
    std::vector<std::size_t> order(profile.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return cfg.occupation_eps[a] > cfg.occupation_eps[b]; });
    for (std::size_t k = 1; k < order.size(); ++k) {
        const auto& wide = profile[order[k - 1]];
        const auto& narrow = profile[order[k]];
        reports.push_back(upper_bound_check("occupation-monotone:eps=" + fmt(cfg.occupation_eps[order[k]]),
                                            "occupation", narrow.mean, wide.mean));
    }
}

void run_coupling(const ExperimentConfig& cfg, const fs::path& dir,
                  std::vector<VerificationReport>& reports) {
    const auto params = params_of(cfg);
    bool first = true;
    for (const auto& spec : cfg.plans) {
        const auto plan = TransportPlan::make(spec.x, spec.y, cfg.sim.horizon, spec.p);
        const std::string tag = ":x=" + fmt(plan.x()) + ":y=" + fmt(plan.y()) + ":T=" + fmt(plan.horizon());
        const auto ensemble = simulate_coupled_pair(params, plan, cfg.sim);
        if (first) {
            auto out = open_out(dir / "coupling.csv");
            write_coupling_csv(out, ensemble);
            first = false;
        }
        const auto mean = ensemble.weight_mean();
        reports.push_back(two_sided_check("martingale" + tag, "martingale", mean.mean, 1.0, mean.std_error));
        const double q = spec.p / (spec.p - 1.0);
        const auto moment = ensemble.weight_moment(q);
        VerificationReport m;
        m.check_id = "girsanov-moment" + tag + ":p=" + fmt(spec.p);
        m.kind = "girsanov-moment";
        m.lhs = moment.mean;
        m.rhs = girsanov_moment_bound(params, plan);
        m.slack = m.rhs - m.lhs;
        m.std_error = moment.std_error;
        m.verdict = mc_verdict(m.lhs, m.rhs, m.std_error, m.z);
        reports.push_back(m);
        auto coupled = upper_bound_check("coupled-fraction" + tag, "coupled-fraction", 0.95,
                                         ensemble.fraction_coupled());
        coupled.note = "required fraction vs observed";
        reports.push_back(coupled);

        const auto contraction = contraction_statistics(params, plan.x(), plan.y(), plan.horizon(), cfg.sim);
        auto c = upper_bound_check("contraction" + tag, "contraction", 0.99, contraction.fraction_contracting);
        c.note = contraction.note.empty() ? "worst ratio " + fmt(contraction.worst_ratio) + " vs rate " +
                                                fmt(contraction.rate)
                                          : contraction.note;
        reports.push_back(c);
    }
}

void run_harnack_type(const ExperimentConfig& cfg, bool harnack, bool log_harnack, bool gradient,
                      std::vector<VerificationReport>& reports) {
    const auto params = params_of(cfg);
    const auto functions = harnack_functions(cfg, params);
    for (const auto& spec : cfg.plans) {
        for (double horizon : cfg.horizons) {
            const auto plan = TransportPlan::make(spec.x, spec.y, horizon, spec.p);
            if (harnack || log_harnack) {
                const auto samples = paired_terminal(params, plan.x(), plan.y(), horizon, cfg.sim);
                for (const auto& f : functions) {
                    if (harnack && f.nonnegative) {
                        reports.push_back(verify_harnack(params, plan, f, samples, cfg.scale_constant));
                    }
                    if (log_harnack && f.inf_positive) {
                        reports.push_back(verify_log_harnack(params, plan, f, samples, cfg.scale_constant));
                    }
                }
            }
            if (gradient) {
                const double x = plan.x();
                const auto samples =
                    paired_terminal(params, x, intrinsic_neighbour(params, x), horizon, cfg.sim);
                for (const auto& f : functions) {
                    if (!f.smooth || !f.bounded) continue;
                    reports.push_back(verify_gradient_estimate(params, x, horizon, f, samples, cfg.scale_constant));
                }
            }
        }
    }
}

void run_measure(const ExperimentConfig& cfg, const fs::path& dir,
                 std::vector<VerificationReport>& reports) {
    const auto params = params_of(cfg);
    const auto ctx = normalize(params);

    json summary = {{"alpha", params.alpha()},
                    {"delta", params.delta()},
                    {"h", params.h()},
                    {"Gamma0", ctx.gamma0()},
                    {"log_Gamma0", ctx.log_gamma0()},
                    {"Z", ctx.z()},
                    {"log_Z", ctx.log_z()},
                    {"Z_split", std::exp(ctx.log_z_split())},
                    {"x0_mode", ctx.x0_mode()},
                    {"head_mass_at_mode", ctx.head_mass_at_mode()},
                    {"tail_mass_at_mode", ctx.tail_mass_at_mode()},
                    {"lemma_crossover", ctx.lemma_crossover()},
                    {"r_bar", ctx.r_bar()}};
    {
        auto out = open_out(dir / "measure.json");
        out << summary.dump(2) << '\n';
    }

    reports.push_back(upper_bound_check("normalization", "measure",
                                        std::abs(mu_integral(ctx, [](double) { return 1.0; }) - 1.0), 1e-8));
    reports.push_back(upper_bound_check("dual-normalizer", "measure",
                                        std::abs(std::expm1(ctx.log_z_split() - ctx.log_z())), 1e-8));
    const double x0 = ctx.x0_mode();
    const double residual =
        std::abs(2.0 * params.delta() * x0 + params.h() * std::pow(x0, 2.0 * params.h() - 1.0) - 2.0 * params.alpha());
    reports.push_back(upper_bound_check("mode-residual", "measure", residual, 1e-12));
    double worst_flux = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double x = std::pow(10.0, -3.0 + 5.0 * i / 49.0);
        const double h = params.h();
        const double flux = h * std::pow(x, 2.0 * h - 1.0) +
                            0.5 * std::pow(x, 2.0 * h) * log_density_derivative(params, x) -
                            (params.alpha() - params.delta() * x);
        worst_flux = std::max(worst_flux, std::abs(flux));
    }
    reports.push_back(upper_bound_check("stationarity", "measure", worst_flux, 1e-8));

    if (!cfg.r_grid.empty()) {
        const auto table = build_rate_table(ctx, cfg.r_grid);
        auto out = open_out(dir / "rate_table.csv");
        write_rate_table_csv(out, table);
        std::vector<RateRow> rows = table.rows;
        std::sort(rows.begin(), rows.end(), [](const RateRow& a, const RateRow& b) { return a.r < b.r; });
        for (std::size_t i = 1; i < rows.size(); ++i) {
            reports.push_back(upper_bound_check("beta-monotone:r=" + fmt(rows[i].r), "rate-table",
                                                rows[i].beta_iso.log_value, rows[i - 1].beta_iso.log_value));
        }
        for (const auto& row : rows) {
            auto r = upper_bound_check("beta-exponential-fit:r=" + fmt(row.r), "rate-table",
                                       row.beta_iso.log_value, row.beta_exp_fit.log_value * (1.0 + 1e-12));
            r.note = "log beta_iso vs C*(1+1/r), C*=" + fmt(table.fit.c_dominating);
            reports.push_back(r);
        }
    }
}

void run_isoperimetric(const ExperimentConfig& cfg, const fs::path& dir,
                       std::vector<VerificationReport>& reports) {
    const auto params = params_of(cfg);
    const auto ctx = normalize(params);

    // Boundary measure: closed form against the neighbourhood quotient.
    for (int i = 0; i < 10; ++i) {
        const double x = std::pow(10.0, -0.5 + 1.5 * i / 9.0);
        const double exact = boundary_measure_tail(ctx, x);
        const double fd = boundary_measure_fd(ctx, x, 1e-4);
        reports.push_back(upper_bound_check("boundary-fd:x=" + fmt(x), "boundary", std::abs(fd / exact - 1.0), 1e-2));
    }

    std::vector<double> ladder = cfg.k_ladder;
    std::sort(ladder.begin(), ladder.end(), std::greater<>());
    ladder.erase(std::remove_if(ladder.begin(), ladder.end(), [&](double r) { return r >= ctx.r_bar(); }),
                 ladder.end());
    std::vector<double> ks(ladder.size());
    std::vector<double> xs(ladder.size());
    parallel_for(ladder.size(), [&](std::size_t i) {
        xs[i] = tail_quantile_log(ctx, std::log(ladder[i]));
        ks[i] = isoperimetric_k(ctx, ladder[i]);
    });
    const double scale = std::sqrt((1.0 - params.h()) / params.delta());
    auto out = open_out(dir / "k_ladder.csv");
    out << "r,x_r,k,ratio_sqrt_log,ratio_corrected\n";
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        const double base = scale * std::sqrt(std::log(1.0 / ladder[i]));
        out << ladder[i] << ',' << xs[i] << ',' << ks[i] << ',' << ks[i] / base << ','
            << ks[i] / (2.0 * params.delta() * base) << '\n';
        if (i > 0) {
            reports.push_back(upper_bound_check("k-increasing:r=" + fmt(ladder[i]), "isoperimetric",
                                                ks[i - 1], ks[i] * (1.0 - 1e-12)));
        }
    }
    {
        // Deep in the tail, where the limit constant dominates the lower-order terms.
        constexpr double kDeepLogR = -1e4;
        const double corrected = isoperimetric_k_log(ctx, kDeepLogR) /
                                 (2.0 * params.delta() * scale * std::sqrt(-kDeepLogR));
        auto a = upper_bound_check("k-asymptote:log_r=-1e4", "isoperimetric", std::abs(corrected - 1.0), 1e-2);
        a.note = "k / (2 delta sqrt((1-h)/delta) sqrt(log 1/r))";
        reports.push_back(a);
    }

    for (double r : {1e-4, 1e-6, 1e-8}) {
        if (r >= ctx.r_bar()) continue;
        const auto q = quantiles(ctx, r);
        auto c = upper_bound_check("head-vs-tail:r=" + fmt(r), "isoperimetric", boundary_measure_tail(ctx, q.x2),
                                   boundary_measure_head(ctx, q.x1));
        if (c.lhs >= c.rhs) c.verdict = Verdict::Violated;
        reports.push_back(c);
    }
    if (1e-6 < ctx.r_bar()) {
        const auto probe = split_minimizer_probe(ctx, 1e-6, 200);
        reports.push_back(upper_bound_check("split-minimizer:r=1e-06", "isoperimetric",
                                            (probe.tail_only_value - probe.min_over_splits) / probe.tail_only_value,
                                            1e-10));
    }
}

void run_super_poincare(const ExperimentConfig& cfg, std::vector<VerificationReport>& reports) {
    const auto params = params_of(cfg);
    const auto ctx = normalize(params);
    std::vector<TestFunction> functions;
    if (cfg.functions.empty()) {
        functions = super_poincare_family(ctx);
    } else {
        for (const auto& id : cfg.functions) functions.push_back(find_test_function(ctx, id));
    }
    for (double r : cfg.super_poincare_r) {
        const auto beta = beta_isoperimetric(ctx, r);
        for (const auto& f : functions) {
            auto rep = verify_super_poincare_log(ctx, f, r, beta.log_value);
            if (beta.clamped) rep.note = "k^{-1} clamped at r_bar";
            reports.push_back(rep);
        }
    }
    for (double n : {1.0, 2.0, 4.0, 8.0}) {
        const auto f = clipped_distance(params, n);
        reports.push_back(upper_bound_check("dirichlet-clipped:n=" + fmt(n), "dirichlet", dirichlet_form(ctx, f),
                                            0.5 + 1e-6));
    }
    reports.push_back(upper_bound_check("dirichlet-distance", "dirichlet",
                                        std::abs(dirichlet_form(ctx, distance_from_origin(params)) - 0.5), 1e-9));
}

void run_optimality(const ExperimentConfig& cfg, const fs::path& dir,
                    std::vector<VerificationReport>& reports) {
    const auto params = params_of(cfg);
    const auto ctx = normalize(params);
    auto out = open_out(dir / "optimality.csv");
    out << "lambda,eps,bound,exponent,r_star,log_mass_r_star,log_mass_2r_star,found\n";
    for (double lambda : cfg.lambdas) {
        const auto probe = optimality_divergence_probe(ctx, lambda, cfg.probe_eps, cfg.probe_bound);
        out << lambda << ',' << cfg.probe_eps << ',' << cfg.probe_bound << ',' << probe.exponent << ','
            << probe.r_star << ',' << probe.log_mass_at_r << ',' << probe.log_mass_at_2r << ','
            << (probe.found ? 1 : 0) << '\n';
        const std::string tag = ":lambda=" + fmt(lambda);
        VerificationReport found = upper_bound_check("probe-found" + tag, "optimality", probe.found ? 0.0 : 1.0, 0.0);
        found.note = "R*=" + fmt(probe.r_star);
        reports.push_back(found);
        if (probe.found && !probe.unbounded_branch && cfg.probe_bound > 0.0) {
            reports.push_back(upper_bound_check("probe-growth" + tag, "optimality", std::log(4.0), probe.growth_log()));
        }
    }
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& log) {
    RunOutcome outcome;
    outcome.dir = dir;
    fs::create_directories(dir);
    {
        json manifest = {{"config", json::parse(config_to_json(cfg))},
                         {"seed", cfg.sim.seed},
                         {"experiment", std::string(to_string(cfg.experiment))},
                         {"version", std::string(kVersion)},
                         {"compiler", __VERSION__},
                         {"cxx_standard", __cplusplus},
                         {"created", utc_timestamp()}};
        auto out = open_out(dir / "manifest.json");
        out << manifest.dump(2) << '\n';
    }
    auto wants = [&](Experiment e) { return cfg.experiment == e || cfg.experiment == Experiment::All; };
    auto stage = [&](std::string_view name, auto&& body) {
        log << "[" << name << "] running\n" << std::flush;
        body();
    };
    try {
        if (wants(Experiment::Simulate)) stage("simulate", [&] { run_simulate(cfg, dir, outcome.reports); });
        if (wants(Experiment::Coupling)) stage("coupling", [&] { run_coupling(cfg, dir, outcome.reports); });
        const bool h = wants(Experiment::Harnack);
        const bool lh = wants(Experiment::LogHarnack);
        const bool g = wants(Experiment::Gradient);
        if (h || lh || g) stage("harnack-type", [&] { run_harnack_type(cfg, h, lh, g, outcome.reports); });
        if (wants(Experiment::Measure)) stage("measure", [&] { run_measure(cfg, dir, outcome.reports); });
        if (wants(Experiment::Isoperimetric)) {
            stage("isoperimetric", [&] { run_isoperimetric(cfg, dir, outcome.reports); });
        }
        if (wants(Experiment::SuperPoincare)) stage("super-poincare", [&] { run_super_poincare(cfg, outcome.reports); });
        if (wants(Experiment::Optimality)) stage("optimality", [&] { run_optimality(cfg, dir, outcome.reports); });
    } catch (const std::exception& e) {
        outcome.failed = true;
        outcome.failure = e.what();
    }

    {
        auto out = open_out(dir / "results.csv");
        write_reports_csv(out, outcome.reports);
    }
    {
        json report = {{"config", json::parse(config_to_json(cfg))},
                       {"reports", reports_json(outcome.reports)},
                       {"violated", outcome.violated()},
                       {"failed", outcome.failed}};
        if (outcome.failed) report["failure"] = outcome.failure;
        auto out = open_out(dir / "report.json");
        out << report.dump(2) << '\n';
    }
    if (outcome.failed || outcome.violated()) {
        auto out = open_out(dir / "FAILED");
        if (outcome.failed) out << "error: " << outcome.failure << '\n';
        for (const auto& r : outcome.reports) {
            if (r.verdict == Verdict::Violated) out << "violated: " << r.check_id << '\n';
        }
    }
    return outcome;
}

void print_run_report(const fs::path& dir, std::ostream& out) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw Error(Errc::InvalidConfig, "dir", "no manifest.json in " + dir.string());
    const json manifest = json::parse(mf);
    std::ifstream rf(dir / "report.json");
    if (!rf) throw Error(Errc::InvalidConfig, "dir", "no report.json in " + dir.string());
    const json report = json::parse(rf);

    out << "run        " << dir.string() << '\n'
        << "experiment " << manifest.value("experiment", "?") << "   seed " << manifest.value("seed", 0ull)
        << "   version " << manifest.value("version", "?") << '\n';
    const auto& model = manifest["config"]["model"];
    out << "model      alpha=" << model["alpha"].get<double>() << " delta=" << model["delta"].get<double>()
        << " h=" << model["h"].get<double>() << "\n\n";

    std::size_t holds = 0, within = 0, violated = 0;
    out << std::left << std::setw(64) << "check" << std::setw(18) << "verdict" << std::right << std::setw(14)
        << "lhs" << std::setw(14) << "rhs" << std::setw(14) << "z" << '\n';
    for (const auto& r : report["reports"]) {
        const std::string verdict = r["verdict"].get<std::string>();
        holds += verdict == "Holds";
        within += verdict == "HoldsWithinError";
        violated += verdict == "Violated";
        out << std::left << std::setw(64) << r["check_id"].get<std::string>().substr(0, 63) << std::setw(18)
            << verdict << std::right << std::setw(14) << number_text(r["lhs"]) << std::setw(14)
            << number_text(r["rhs"]) << std::setw(14) << number_text(r["z"]) << '\n';
    }
    out << '\n' << holds << " hold, " << within << " hold within error, " << violated << " violated\n";
    if (report.value("failed", false)) out << "run aborted: " << report.value("failure", "") << '\n';
}

}  // namespace gcir

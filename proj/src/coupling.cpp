#include "gcir/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "gcir/parallel.hpp"

namespace gcir {

namespace {

// xi(t_k) for k = 0..n-1.
std::vector<double> steering_schedule(const ModelParams& params, const TransportPlan& plan,
                                      std::size_t n_steps) {
    std::vector<double> schedule(n_steps);
    const double dt = plan.horizon() / static_cast<double>(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) {
        schedule[k] = xi(params, plan, dt * static_cast<double>(k));
    }
    return schedule;
}

CouplingResult couple_with_schedule(const ModelParams& params, const TransportPlan& plan,
                                    Scheme scheme, std::span<const double> increments,
                                    std::span<const double> schedule) {
    const std::size_t n = increments.size();
    const double dt = plan.horizon() / static_cast<double>(n);
    CouplingResult result;
    result.rho_start = rho(params, plan.x(), plan.y());
    result.tau = plan.horizon();
    double x = plan.x();
    double y = plan.y();
    if (y <= x) {
        result.coupled = true;
        result.tau = 0.0;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double dB = increments[k];
        if (result.coupled) {
            x = euler_step(params, scheme, x, dt, dB);
            y = x;
            continue;
        }
        const double drift = schedule[k];
        result.log_weight += drift * dB - 0.5 * drift * drift * dt;
        const double x_next = euler_step(params, scheme, x, dt, dB);
        const double y_next = euler_step(params, scheme, y, dt, dB, drift);
        x = x_next;
        y = y_next;
        if (y <= x) {
            result.coupled = true;
            result.tau = k + 1 == n ? plan.horizon() : dt * static_cast<double>(k + 1);
            y = x;
        }
    }
    result.x_end = x;
    result.y_end = y;
    result.rho_end = result.coupled ? 0.0 : rho(params, x, y);
    return result;
}

}  // namespace

CouplingResult couple_path(const ModelParams& params, const TransportPlan& plan, Scheme scheme,
                           std::span<const double> increments) {
    if (increments.empty()) throw Error(Errc::InvalidConfig, "n_steps", "n_steps must be positive");
    const auto schedule = steering_schedule(params, plan, increments.size());
    return couple_with_schedule(params, plan, scheme, increments, schedule);
}

double CouplingEnsemble::fraction_coupled() const {
    const auto n = std::count_if(paths.begin(), paths.end(),
                                 [](const CouplingResult& r) { return r.coupled; });
    return paths.empty() ? 0.0 : static_cast<double>(n) / static_cast<double>(paths.size());
}

double CouplingEnsemble::fraction_ordered() const {
    const auto n = std::count_if(paths.begin(), paths.end(),
                                 [](const CouplingResult& r) { return r.ordering_ok; });
    return paths.empty() ? 0.0 : static_cast<double>(n) / static_cast<double>(paths.size());
}

MCEstimate CouplingEnsemble::weight_mean() const { return weight_moment(1.0); }

MCEstimate CouplingEnsemble::weight_moment(double q) const {
    std::vector<double> samples(paths.size());
    std::transform(paths.begin(), paths.end(), samples.begin(),
                   [q](const CouplingResult& r) { return std::exp(q * r.log_weight); });
    return MCEstimate::from_samples(samples);
}

CouplingEnsemble simulate_coupled_pair(const ModelParams& params, const TransportPlan& plan,
                                       SimConfig config) {
    config.horizon = plan.horizon();
    config.validate();
    const auto schedule = steering_schedule(params, plan, config.n_steps);
    const BrownianIncrements increments(config.seed, config.dt(), config.substeps);
    CouplingEnsemble ensemble{plan, std::vector<CouplingResult>(config.n_paths)};
    parallel_for(config.n_paths, [&](std::size_t i) {
        std::vector<double> dB(config.n_steps);
        increments.fill(i, dB);
        ensemble.paths[i] = couple_with_schedule(params, plan, config.scheme, dB, schedule);
    });
    return ensemble;
}

MCEstimate girsanov_weight_moment(const ModelParams& params, const TransportPlan& plan,
                                  const SimConfig& config, double q) {
    if (!(q > 1.0)) throw Error(Errc::ExponentViolation, "q", "moment order must be > 1");
    return simulate_coupled_pair(params, plan, config).weight_moment(q);
}

double girsanov_moment_bound(const ModelParams& params, const TransportPlan& plan) {
    if (!plan.p()) throw Error(Errc::ExponentViolation, "p", "moment bound requires p > 1");
    const double p = *plan.p();
    return std::exp(p / (2.0 * (p - 1.0) * (p - 1.0)) *
                    xi_squared_integral(params, plan, plan.horizon()));
}

std::vector<double> contraction_ratios(const ModelParams& params, double x, double y,
                                       double horizon, SimConfig config) {
    if (!(horizon >= 0.0)) throw Error(Errc::OutOfRange, "T", "horizon must be non-negative");
    const double start = rho(params, x, y);
    if (start == 0.0) return {};
    if (horizon == 0.0) return std::vector<double>(config.n_paths, 1.0);
    config.horizon = horizon;
    config.validate();
    const double dt = config.dt();
    const BrownianIncrements increments(config.seed, dt, config.substeps);
    std::vector<double> ratios(config.n_paths);
    parallel_for(config.n_paths, [&](std::size_t i) {
        std::vector<double> dB(config.n_steps);
        increments.fill(i, dB);
        double a = x;
        double b = y;
        for (double db : dB) {
            a = euler_step(params, config.scheme, a, dt, db);
            b = euler_step(params, config.scheme, b, dt, db);
        }
        ratios[i] = rho(params, a, b) / start;
    });
    return ratios;
}

ContractionSummary contraction_statistics(const ModelParams& params, double x, double y,
                                          double horizon, const SimConfig& config,
                                          double tol_scheme) {
    ContractionSummary summary;
    summary.rate = gradient_rate(params, horizon);
    const auto ratios = contraction_ratios(params, x, y, horizon, config);
    summary.compared = ratios.size();
    if (ratios.empty()) {
        summary.note = "x == y: no ratios to compare";
        return summary;
    }
    const double threshold = summary.rate * (1.0 + tol_scheme);
    const auto within = std::count_if(ratios.begin(), ratios.end(),
                                      [threshold](double r) { return r <= threshold; });
    summary.fraction_contracting = static_cast<double>(within) / static_cast<double>(ratios.size());
    summary.worst_ratio = *std::max_element(ratios.begin(), ratios.end());
    return summary;
}

void write_coupling_csv(std::ostream& out, const CouplingEnsemble& ensemble) {
    out << "path_id,tau,coupled,log_weight,rho_start,rho_end\n";
    out.precision(17);
    for (std::size_t i = 0; i < ensemble.paths.size(); ++i) {
        const auto& r = ensemble.paths[i];
        out << i << ',' << r.tau << ',' << (r.coupled ? 1 : 0) << ',' << r.log_weight << ','
            << r.rho_start << ',' << r.rho_end << '\n';
    }
}

}  // namespace gcir

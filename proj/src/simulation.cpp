#include "gcir/simulation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <string>

#include "gcir/parallel.hpp"

namespace gcir {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t increments_identifier(const SimConfig& config) {
    return splitmix64(config.seed ^ splitmix64(std::bit_cast<std::uint64_t>(config.dt())) ^
                      (static_cast<std::uint64_t>(config.substeps) << 40));
}

}  // namespace

std::string_view to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::ReflectedEuler: return "reflected";
        case Scheme::AbsorbedDriftEuler: return "absorbed";
    }
    return "unknown";
}

Scheme scheme_from_string(std::string_view name) {
    if (name == "reflected" || name == "ReflectedEuler") return Scheme::ReflectedEuler;
    if (name == "absorbed" || name == "AbsorbedDriftEuler") return Scheme::AbsorbedDriftEuler;
    throw Error(Errc::InvalidConfig, "scheme",
                "unknown scheme '" + std::string(name) + "' (expected reflected|absorbed)");
}

void SimConfig::validate() const {
    if (n_steps == 0) throw Error(Errc::InvalidConfig, "n_steps", "n_steps must be positive");
    if (n_paths == 0) throw Error(Errc::InvalidConfig, "n_paths", "n_paths must be positive");
    if (substeps == 0) throw Error(Errc::InvalidConfig, "substeps", "substeps must be positive");
    if (!(horizon > 0.0 && std::isfinite(horizon))) {
        throw Error(Errc::InvalidConfig, "T", "horizon must be positive");
    }
}

BrownianIncrements::BrownianIncrements(std::uint64_t seed, double dt, std::uint32_t substeps)
    : field_(seed), substeps_(substeps), fine_scale_(std::sqrt(dt / substeps)) {}

double BrownianIncrements::operator()(std::uint64_t path, std::uint64_t step) const {
    double sum = 0.0;
    const std::uint64_t first = step * substeps_;
    for (std::uint32_t j = 0; j < substeps_; ++j) sum += field_.normal(path, first + j);
    return fine_scale_ * sum;
}

void BrownianIncrements::fill(std::uint64_t path, std::span<double> out) const {
    if (substeps_ == 1) {
        const std::size_t n = out.size();
        for (std::size_t k = 0; k + 1 < n; k += 2) {
            const auto z = field_.pair(path, k / 2);
            out[k] = fine_scale_ * z[0];
            out[k + 1] = fine_scale_ * z[1];
        }
        if (n % 2 == 1) out[n - 1] = fine_scale_ * field_.pair(path, (n - 1) / 2)[0];
        return;
    }
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (*this)(path, k);
}

MCEstimate MCEstimate::from_samples(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 2) {
        throw Error(Errc::InvalidConfig, "n_paths", "a Monte Carlo estimate needs at least 2 samples");
    }
    double sum = 0.0;
    for (double s : samples) sum += s;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    return {mean, sd / std::sqrt(static_cast<double>(n)), n};
}

double euler_step(const ModelParams& params, Scheme scheme, double x, double dt, double dB,
                  double steering) {
    const double diffusion = std::pow(std::max(x, 0.0), params.h());
    const double next = x + (params.alpha() - params.delta() * x - steering * diffusion) * dt +
                        diffusion * dB;
    return scheme == Scheme::ReflectedEuler ? std::abs(next) : std::max(0.0, next);
}

void simulate_path(const ModelParams& params, Scheme scheme, double x0, double dt,
                   std::span<const double> increments, std::span<double> out) {
    if (out.size() != increments.size() + 1) {
        throw Error(Errc::InvalidConfig, "out", "path buffer must hold n_steps + 1 values");
    }
    out[0] = x0;
    for (std::size_t k = 0; k < increments.size(); ++k) {
        out[k + 1] = euler_step(params, scheme, out[k], dt, increments[k]);
    }
}

PathEnsemble simulate_ensemble(const ModelParams& params, double x0, const SimConfig& config) {
    config.validate();
    if (!(x0 >= 0.0)) throw Error(Errc::NegativeInput, "x0", "start point must be non-negative");
    PathEnsemble ensemble;
    ensemble.start = x0;
    ensemble.n_paths = config.n_paths;
    ensemble.n_steps = config.n_steps;
    ensemble.increments_id = increments_identifier(config);
    const double dt = config.dt();
    ensemble.grid.resize(config.n_steps + 1);
    for (std::size_t k = 0; k <= config.n_steps; ++k) ensemble.grid[k] = dt * static_cast<double>(k);
    ensemble.grid.back() = config.horizon;
    ensemble.values.resize(static_cast<std::size_t>(config.n_paths) * (config.n_steps + 1));
    const BrownianIncrements increments(config.seed, dt, config.substeps);
    parallel_for(config.n_paths, [&](std::size_t i) {
        std::vector<double> dB(config.n_steps);
        increments.fill(i, dB);
        auto row = std::span<double>(ensemble.values).subspan(i * (config.n_steps + 1),
                                                              config.n_steps + 1);
        simulate_path(params, config.scheme, x0, dt, dB, row);
    });
    return ensemble;
}

std::vector<double> simulate_terminal(const ModelParams& params, double x0,
                                      const SimConfig& config) {
    config.validate();
    if (!(x0 >= 0.0)) throw Error(Errc::NegativeInput, "x0", "start point must be non-negative");
    const double dt = config.dt();
    const BrownianIncrements increments(config.seed, dt, config.substeps);
    std::vector<double> terminal(config.n_paths);
    parallel_for(config.n_paths, [&](std::size_t i) {
        std::vector<double> dB(config.n_steps);
        increments.fill(i, dB);
        double x = x0;
        for (double db : dB) x = euler_step(params, config.scheme, x, dt, db);
        terminal[i] = x;
    });
    return terminal;
}

MCEstimate estimate_semigroup(const ModelParams& params, const StateFunction& f, double x,
                              double horizon, SimConfig config) {
    config.horizon = horizon;
    std::vector<double> values = simulate_terminal(params, x, config);
    for (double& v : values) v = f(v);
    return MCEstimate::from_samples(values);
}

MCEstimate occupation_time_below(const PathEnsemble& ensemble, double eps) {
    if (!(eps > 0.0)) throw Error(Errc::OutOfRange, "eps", "eps must be positive");
    const double dt = ensemble.dt();
    std::vector<double> per_path(ensemble.n_paths);
    for (std::size_t i = 0; i < ensemble.n_paths; ++i) {
        const auto path = ensemble.path(i);
        // Each grid interval [t_k, t_{k+1}) is charged to its left endpoint.
        const auto below = std::count_if(path.begin(), path.end() - 1,
                                         [eps](double v) { return v <= eps; });
        per_path[i] = dt * static_cast<double>(below);
    }
    return MCEstimate::from_samples(per_path);
}

std::vector<MCEstimate> occupation_time_profile(const ModelParams& params, double x0,
                                                const SimConfig& config,
                                                std::span<const double> eps) {
    config.validate();
    for (double e : eps) {
        if (!(e > 0.0)) throw Error(Errc::OutOfRange, "eps", "eps must be positive");
    }
    const double dt = config.dt();
    const BrownianIncrements increments(config.seed, dt, config.substeps);
    std::vector<std::vector<double>> per_eps(eps.size(), std::vector<double>(config.n_paths));
    parallel_for(config.n_paths, [&](std::size_t i) {
        std::vector<double> dB(config.n_steps);
        increments.fill(i, dB);
        std::vector<std::size_t> counts(eps.size(), 0);
        double x = x0;
        for (double db : dB) {
            for (std::size_t j = 0; j < eps.size(); ++j) counts[j] += (x <= eps[j]);
            x = euler_step(params, config.scheme, x, dt, db);
        }
        for (std::size_t j = 0; j < eps.size(); ++j) {
            per_eps[j][i] = dt * static_cast<double>(counts[j]);
        }
    });
    std::vector<MCEstimate> out;
    out.reserve(eps.size());
    for (const auto& samples : per_eps) out.push_back(MCEstimate::from_samples(samples));
    return out;
}

double affine_mean(const ModelParams& params, double x0, double horizon) {
    const double level = params.alpha() / params.delta();
    return level + (x0 - level) * std::exp(-params.delta() * horizon);
}

void write_paths_csv(std::ostream& out, const PathEnsemble& ensemble) {
    out << "path_id,step,t,x\n";
    out.precision(17);
    for (std::size_t i = 0; i < ensemble.n_paths; ++i) {
        const auto path = ensemble.path(i);
        for (std::size_t k = 0; k < path.size(); ++k) {
            out << i << ',' << k << ',' << ensemble.grid[k] << ',' << path[k] << '\n';
        }
    }
}

}  // namespace gcir

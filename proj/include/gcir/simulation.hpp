#pragma once

// Positivity-preserving Euler discretizations of the generalized CIR SDE and
// Monte Carlo estimation of its semigroup.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "gcir/model.hpp"
#include "gcir/philox.hpp"

namespace gcir {

enum class Scheme {
    ReflectedEuler,      // X' = |X + b dt + X^h dB|
    AbsorbedDriftEuler,  // X' = max(0, X + b dt + max(X,0)^h dB)
};

std::string_view to_string(Scheme scheme);
Scheme scheme_from_string(std::string_view name);

struct SimConfig {
    double horizon = 1.0;
    std::uint32_t n_steps = 4096;
    std::uint32_t n_paths = 100000;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::ReflectedEuler;
    // Each step's increment is the sum of this many finer Gaussian draws, so
    // configurations with equal n_steps * substeps share one Brownian path.
    std::uint32_t substeps = 1;

    [[nodiscard]] double dt() const { return horizon / n_steps; }
    // Throws Error(InvalidConfig).
    void validate() const;
};

// Brownian increments keyed by (seed, path, step).
class BrownianIncrements {
public:
    BrownianIncrements(std::uint64_t seed, double dt, std::uint32_t substeps = 1);

    [[nodiscard]] double operator()(std::uint64_t path, std::uint64_t step) const;
    // Increments for steps 0..out.size()-1 of one path.
    void fill(std::uint64_t path, std::span<double> out) const;

private:
    GaussianField field_;
    std::uint32_t substeps_;
    double fine_scale_;
};

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;

    // Sample mean and standard deviation / sqrt(n); needs n >= 2.
    static MCEstimate from_samples(std::span<const double> samples);
};

struct PathEnsemble {
    double start = 0.0;
    std::vector<double> grid;    // n_steps + 1 time points
    std::vector<double> values;  // row-major n_paths x (n_steps + 1)
    std::uint64_t increments_id = 0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;

    [[nodiscard]] std::span<const double> path(std::size_t i) const {
        return {values.data() + i * (n_steps + 1), n_steps + 1};
    }
    [[nodiscard]] double terminal(std::size_t i) const { return path(i).back(); }
    [[nodiscard]] double dt() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
};

// One Euler step. `steering` adds the drift -steering * x^h (zero for the
// plain SDE).
[[nodiscard]] double euler_step(const ModelParams& params, Scheme scheme, double x, double dt,
                                double dB, double steering = 0.0);

// Deterministic path from explicit increments; out.size() == increments.size() + 1.
void simulate_path(const ModelParams& params, Scheme scheme, double x0, double dt,
                   std::span<const double> increments, std::span<double> out);

[[nodiscard]] PathEnsemble simulate_ensemble(const ModelParams& params, double x0,
                                             const SimConfig& config);

// X_T for every path without storing the trajectories; identical to the last
// column of simulate_ensemble for the same inputs.
[[nodiscard]] std::vector<double> simulate_terminal(const ModelParams& params, double x0,
                                                    const SimConfig& config);

using StateFunction = std::function<double(double)>;

// Monte Carlo estimate of P_T f(x) = E f(X_T^x); config.horizon is replaced by T.
[[nodiscard]] MCEstimate estimate_semigroup(const ModelParams& params, const StateFunction& f,
                                            double x, double horizon, SimConfig config);

// Mean over paths of dt * #{k : X_k <= eps}.
[[nodiscard]] MCEstimate occupation_time_below(const PathEnsemble& ensemble, double eps);

// Same statistic for several thresholds, streamed path by path.
[[nodiscard]] std::vector<MCEstimate> occupation_time_profile(const ModelParams& params, double x0,
                                                              const SimConfig& config,
                                                              std::span<const double> eps);

// E X_T for the affine drift: alpha/delta + (x0 - alpha/delta) e^{-delta T}.
[[nodiscard]] double affine_mean(const ModelParams& params, double x0, double horizon);

// CSV with header path_id,step,t,x.
void write_paths_csv(std::ostream& out, const PathEnsemble& ensemble);

}  // namespace gcir

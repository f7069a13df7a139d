#pragma once

// Coupling by change of measure: X starts at x, Y at y > x and carries the
// extra drift -xi(t) Y^h until the two meet; the Girsanov weight R turns
// expectations over X_T into expectations for the process started at y.

#include <span>
#include <string>
#include <vector>

#include "gcir/model.hpp"
#include "gcir/simulation.hpp"

namespace gcir {

struct CouplingResult {
    double tau = 0.0;        // coupling time; the horizon when not coupled
    bool coupled = false;
    double log_weight = 0.0; // log R, accumulated up to tau
    double rho_start = 0.0;
    double rho_end = 0.0;
    bool ordering_ok = true; // Y_k >= X_k on every grid point before tau
    double x_end = 0.0;
    double y_end = 0.0;
};

// One coupled pair driven by the explicit increments dB (one per step).
// Steps are Ito/left-point: xi is evaluated at t_k; tau is the first grid time
// with Y_k <= X_k, after which Y is set equal to X.
[[nodiscard]] CouplingResult couple_path(const ModelParams& params, const TransportPlan& plan,
                                         Scheme scheme, std::span<const double> increments);

struct CouplingEnsemble {
    TransportPlan plan;
    std::vector<CouplingResult> paths;

    [[nodiscard]] double fraction_coupled() const;
    [[nodiscard]] double fraction_ordered() const;
    // E[R] over the ensemble.
    [[nodiscard]] MCEstimate weight_mean() const;
    // E[R^q].
    [[nodiscard]] MCEstimate weight_moment(double q) const;
};

// config.horizon is replaced by the plan's horizon.
[[nodiscard]] CouplingEnsemble simulate_coupled_pair(const ModelParams& params,
                                                     const TransportPlan& plan, SimConfig config);

// MC estimate of E[R^q], q > 1.
[[nodiscard]] MCEstimate girsanov_weight_moment(const ModelParams& params,
                                                const TransportPlan& plan, const SimConfig& config,
                                                double q);

// exp[ p / (2 (p-1)^2) * int_0^T xi^2 ], the Hoelder-step bound on E[R^{p/(p-1)}].
[[nodiscard]] double girsanov_moment_bound(const ModelParams& params, const TransportPlan& plan);

// Synchronous coupling (xi = 0): rho(X_T^y, X_T^x) / rho(y, x) per path.
// horizon may be 0, in which case every ratio is 1.
[[nodiscard]] std::vector<double> contraction_ratios(const ModelParams& params, double x, double y,
                                                     double horizon, SimConfig config);

struct ContractionSummary {
    double fraction_contracting = 1.0;
    double worst_ratio = 0.0;
    double rate = 1.0;
    std::size_t compared = 0;
    std::string note;
};

// Fraction of paths with ratio <= gradient_rate(T) * (1 + tol_scheme).
[[nodiscard]] ContractionSummary contraction_statistics(const ModelParams& params, double x,
                                                        double y, double horizon,
                                                        const SimConfig& config,
                                                        double tol_scheme = 0.02);

// CSV with header path_id,tau,coupled,log_weight,rho_start,rho_end.
void write_coupling_csv(std::ostream& out, const CouplingEnsemble& ensemble);

}  // namespace gcir

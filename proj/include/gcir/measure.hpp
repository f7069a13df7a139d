#pragma once

// Invariant measure mu(dx) = eta(x) dx of the generalized CIR diffusion,
//
//     eta(x) = Gamma0 x^{-2h} exp( 2 alpha/(1-2h) x^{1-2h} - delta/(1-h) x^{2-2h} ) / Z,
//
// its tails, boundary measure x^h eta(x), quantiles and the isoperimetric
// constant k(r) with the super Poincare rate function built from it.
//
// Masses that underflow a double (k^{-1} reaches e^{-10^4} quickly) are
// carried as logarithms; the plain-valued accessors are exp of those.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gcir/model.hpp"
#include "gcir/quadrature.hpp"

namespace gcir {

struct MeasureSettings {
    quad::Settings quadrature{0.0, 1e-13, 4000};
    // Log-spaced grid used to locate the crossover of head vs tail
    // boundary measure when bounding the small-mass regime.
    double crossover_grid_min = 1e-12;
    int crossover_grid_points = 40;
    // Scan used by the infimum defining k(r): points per decade and decades.
    int k_grid_points = 48;
    double k_grid_decades = 3.0;
};

class MeasureContext {
public:
    [[nodiscard]] const ModelParams& params() const noexcept { return params_; }
    [[nodiscard]] const MeasureSettings& settings() const noexcept { return settings_; }

    [[nodiscard]] double log_gamma0() const noexcept { return log_gamma0_; }
    [[nodiscard]] double gamma0() const;
    [[nodiscard]] double log_z() const noexcept { return log_z_; }
    [[nodiscard]] double z() const;
    // log Z by the split-at-mode route, for cross-checking.
    [[nodiscard]] double log_z_split() const noexcept { return log_z_split_; }
    // argmax of x^h eta(x): root of 2 alpha = 2 delta x + h x^{2h-1}.
    [[nodiscard]] double x0_mode() const noexcept { return x0_mode_; }
    [[nodiscard]] double head_mass_at_mode() const noexcept { return head_at_mode_; }
    [[nodiscard]] double tail_mass_at_mode() const noexcept { return tail_at_mode_; }
    // Largest grid mass below which head boundary > tail boundary at matched masses.
    [[nodiscard]] double lemma_crossover() const noexcept { return crossover_; }
    // Upper end of the small-mass regime where k reduces to tail sets.
    [[nodiscard]] double r_bar() const noexcept { return r_bar_; }

    // Internal state; use normalize().
    struct State;
    explicit MeasureContext(const State& state);

private:
    ModelParams params_;
    MeasureSettings settings_;
    double log_gamma0_;
    double log_z_;
    double log_z_split_;
    double x0_mode_;
    double head_at_mode_;
    double tail_at_mode_;
    double crossover_;
    double r_bar_;
};

// Throws Error(QuadratureFailure) when a quadrature misses its tolerance.
[[nodiscard]] MeasureContext normalize(const ModelParams& params,
                                       const MeasureSettings& settings = {});

// Root of 2 delta x + h x^{2h-1} = 2 alpha by bisection.
[[nodiscard]] double mode_of_boundary_measure(const ModelParams& params);

// log Gamma0 - 2h log x + 2alpha/(1-2h) x^{1-2h} - delta/(1-h) x^{2-2h}, i.e. log(Z eta(x)).
[[nodiscard]] double log_unnormalized_density(const ModelParams& params, double x);
[[nodiscard]] double log_unnormalized_density(const MeasureContext& ctx, double x);

// log Z by u = x^{1-h} over (0, inf), and by splitting at the mode with
// separate head and tail substitutions.
[[nodiscard]] double log_normalizer_u_substitution(const ModelParams& params,
                                                   const quad::Settings& settings);
[[nodiscard]] double log_normalizer_split(const ModelParams& params, double x0_mode,
                                          const quad::Settings& settings);

[[nodiscard]] double log_density(const MeasureContext& ctx, double x);
[[nodiscard]] double density(const MeasureContext& ctx, double x);
// d/dx log eta(x)
[[nodiscard]] double log_density_derivative(const ModelParams& params, double x);

// mu((0, x)) and mu((x, inf)), each computed directly so small masses keep
// full relative precision.
[[nodiscard]] double log_head_mass(const MeasureContext& ctx, double x);
[[nodiscard]] double log_tail_mass(const MeasureContext& ctx, double x);
[[nodiscard]] double head_mass(const MeasureContext& ctx, double x);
[[nodiscard]] double tail_mass(const MeasureContext& ctx, double x);

// (Gamma0/Z) (1/(2 delta)) x^{-1} exp(-delta/(1-h) x^{2-2h}), the large-x tail equivalent.
[[nodiscard]] double log_tail_asymptote(const MeasureContext& ctx, double x);

// x^h eta(x): boundary measure of (x, inf) and of (0, x) alike.
[[nodiscard]] double log_boundary_measure(const MeasureContext& ctx, double x);
[[nodiscard]] double boundary_measure_tail(const MeasureContext& ctx, double x);
[[nodiscard]] double boundary_measure_head(const MeasureContext& ctx, double x);

// (mu(D_eps) - mu(D)) / eps with D_eps the closed intrinsic eps-neighbourhood
// of D = (x, inf), resp. D = (0, x).
[[nodiscard]] double boundary_measure_fd(const MeasureContext& ctx, double x, double eps);
[[nodiscard]] double boundary_measure_fd_head(const MeasureContext& ctx, double x, double eps);

// x with mu((0,x)) = exp(log_r), resp. mu((x,inf)) = exp(log_r).
[[nodiscard]] double head_quantile_log(const MeasureContext& ctx, double log_r);
[[nodiscard]] double tail_quantile_log(const MeasureContext& ctx, double log_r);

struct QuantilePair {
    double x1;  // head: mu((0, x1)) = r
    double x2;  // tail: mu((x2, inf)) = r
};
// Requires 0 < r < min(head_mass(x0), tail_mass(x0)).
[[nodiscard]] QuantilePair quantiles(const MeasureContext& ctx, double r);

// inf over x >= x_threshold of x^h eta(x) / mu((x, inf)).
[[nodiscard]] double tail_ratio_infimum(const MeasureContext& ctx, double x_threshold);

// k(r) on the tail-set family; requires 0 < r < r_bar(). The log form takes log r.
[[nodiscard]] double isoperimetric_k(const MeasureContext& ctx, double r);
[[nodiscard]] double isoperimetric_k_log(const MeasureContext& ctx, double log_r);

// k(r) as the infimum over single head intervals (0,x) and tail intervals
// (x,inf) of mass <= r, for any r > 0. Outside the small-mass regime this is
// a heuristic: the minimizing family there is not known.
[[nodiscard]] double isoperimetric_k_unreduced(const MeasureContext& ctx, double r);

struct InverseValue {
    double log_value = 0.0;  // log of sup{s : k(s) > v}
    bool zero = false;       // k(s) <= v everywhere searched
    bool clamped = false;    // k(s) > v on the whole regime; value capped at r_bar
    [[nodiscard]] double value() const;
};

// sup{s >= 0 : k(s) > v}, searched over the small-mass regime.
[[nodiscard]] InverseValue k_inverse(const MeasureContext& ctx, double v);

struct RateValue {
    double log_value = 0.0;
    bool clamped = false;
    [[nodiscard]] double value() const;  // may be +inf when beyond double range
};

// 4 / k^{-1}(2 sqrt(2) r^{-1/2}); throws Error(Degenerate) when k^{-1} is 0.
[[nodiscard]] RateValue beta_isoperimetric(const MeasureContext& ctx, double r);
// exp(c (1 + 1/r))
[[nodiscard]] RateValue beta_exponential(double c, double r);

struct ExponentialFit {
    double c_least_squares = 0.0;  // argmin sum (log beta - c (1 + 1/r))^2
    double c_dominating = 0.0;     // smallest c with beta <= exp(c (1 + 1/r)) on the grid
};
[[nodiscard]] ExponentialFit fit_beta_exponential(const MeasureContext& ctx,
                                                  std::span<const double> r_grid);

struct SplitProbe {
    double min_over_splits = 0.0;
    double tail_only_value = 0.0;
    double head_only_value = 0.0;
    std::size_t argmin = 0;  // index into the allocation grid; 0 is pure tail
    std::vector<double> values;
};

// phi(s) = y1^h eta(y1) + y2^h eta(y2) with mu((0,y1)) = s, mu((y2,inf)) = r - s
// over s = r i / n_grid.
[[nodiscard]] SplitProbe split_minimizer_probe(const MeasureContext& ctx, double r, int n_grid);

struct RateRow {
    double r = 0.0;
    double x_r = 0.0;
    double k = 0.0;
    bool reduced = true;      // k from the tail-set family (r < r_bar)
    double k_inverse_arg = 0.0;
    RateValue beta_iso;
    RateValue beta_exp_fit;
};

struct RateTable {
    ExponentialFit fit;
    std::vector<RateRow> rows;
};

[[nodiscard]] RateTable build_rate_table(const MeasureContext& ctx, std::span<const double> r_grid);

// CSV with header r,x_r,k,k_inverse_arg,beta_iso,beta_exp_fit.
void write_rate_table_csv(std::ostream& out, const RateTable& table);

// Integral of g(x) eta(x) over (0, inf). Breakpoints mark kinks of g.
[[nodiscard]] double mu_integral(const MeasureContext& ctx, const std::function<double(double)>& g,
                                 std::span<const double> breakpoints = {});

}  // namespace gcir

#pragma once

// Closed-form quantities of the generalized CIR diffusion
//
//     dX = (alpha - delta X) dt + X^h dB,   1/2 < h < 1,
//
// together with its intrinsic metric, the coupling drift and the constants
// of the Harnack, log-Harnack and intrinsic-gradient inequalities.

#include <optional>

#include "gcir/error.hpp"

namespace gcir {

class ModelParams {
public:
    // Throws ParamError listing each violated bound.
    static ModelParams validate(double alpha, double delta, double h);

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double delta() const noexcept { return delta_; }
    [[nodiscard]] double h() const noexcept { return h_; }

    // delta - h/2, the effective mean-reversion rate in intrinsic coordinates.
    [[nodiscard]] double drift_excess() const noexcept { return delta_ - 0.5 * h_; }
    // (1 - h)(delta - h/2)
    [[nodiscard]] double kappa() const noexcept { return kappa_; }
    // alpha >= h/2
    [[nodiscard]] bool harnack_admissible() const noexcept { return harnack_admissible_; }

private:
    ModelParams(double alpha, double delta, double h);

    double alpha_;
    double delta_;
    double h_;
    double kappa_;
    bool harnack_admissible_;
};

inline ModelParams validate_params(double alpha, double delta, double h) {
    return ModelParams::validate(alpha, delta, h);
}

// Start points and horizon of a two-point comparison. Stored with x <= y;
// swapped() records whether the caller's order was reversed.
class TransportPlan {
public:
    static TransportPlan make(double x, double y, double horizon,
                              std::optional<double> p = std::nullopt);

    [[nodiscard]] double x() const noexcept { return x_; }
    [[nodiscard]] double y() const noexcept { return y_; }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] const std::optional<double>& p() const noexcept { return p_; }
    [[nodiscard]] bool swapped() const noexcept { return swapped_; }

    // Same start points, different horizon or exponent.
    [[nodiscard]] TransportPlan with_horizon(double horizon) const;
    [[nodiscard]] TransportPlan with_exponent(std::optional<double> p) const;

private:
    TransportPlan(double x, double y, double horizon, std::optional<double> p, bool swapped)
        : x_(x), y_(y), horizon_(horizon), p_(p), swapped_(swapped) {}

    double x_;
    double y_;
    double horizon_;
    std::optional<double> p_;
    bool swapped_;
};

// x^{1-h}/(1-h): the intrinsic coordinate, so rho(s,t) = |coord(t) - coord(s)|.
[[nodiscard]] double intrinsic_coordinate(const ModelParams& params, double x);
// Inverse of intrinsic_coordinate.
[[nodiscard]] double from_intrinsic_coordinate(const ModelParams& params, double u);

// Intrinsic distance (1/(1-h)) |t^{1-h} - s^{1-h}|.
[[nodiscard]] double rho(const ModelParams& params, double s, double t);

// x^h f'(x); zero at x = 0 for bounded f'.
[[nodiscard]] double intrinsic_gradient(const ModelParams& params, double derivative, double x);

// alpha (y^-h - x^-h) + (h/2)(x^{h-1} - y^{h-1} + x^{1-h} - y^{1-h}) for x < y.
// Non-positive whenever alpha >= h/2; -infinity at x = 0.
[[nodiscard]] double lemma_drift_gap(const ModelParams& params, double x, double y);

// Deterministic drift that steers the second marginal onto the first by the
// horizon. Requires harnack_admissible() and kappa() > 0.
[[nodiscard]] double xi(const ModelParams& params, const TransportPlan& plan, double t);

// Integral of e^{kappa s} xi(s) over [0, t_end]; equals rho(x, y) at t_end = T.
[[nodiscard]] double xi_weighted_integral(const ModelParams& params, const TransportPlan& plan,
                                          double t_end);

// Integral of xi(s)^2 over [0, t_end].
[[nodiscard]] double xi_squared_integral(const ModelParams& params, const TransportPlan& plan,
                                         double t_end);

// Exponent of the power-Harnack constant; the constant itself is its exp.
// Kept separate because the constant overflows for distant start points.
[[nodiscard]] double log_harnack_power_constant(const ModelParams& params,
                                                const TransportPlan& plan);
[[nodiscard]] double harnack_constant(const ModelParams& params, const TransportPlan& plan);

// Additive constant of the log-Harnack inequality, (1/2) int_0^T xi^2.
[[nodiscard]] double log_harnack_constant(const ModelParams& params, const TransportPlan& plan);

// e^{-kappa T}
[[nodiscard]] double gradient_rate(const ModelParams& params, double horizon);

}  // namespace gcir

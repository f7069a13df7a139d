#include "gcir/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace gcir {

std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::NegativeInput: return "NegativeInput";
        case Errc::NonPositiveInput: return "NonPositiveInput";
        case Errc::OrderViolation: return "OrderViolation";
        case Errc::Inadmissible: return "Inadmissible";
        case Errc::ExponentViolation: return "ExponentViolation";
        case Errc::ExponentRange: return "ExponentRange";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::QuadratureFailure: return "QuadratureFailure";
        case Errc::DegenerateNeighborhood: return "DegenerateNeighborhood";
        case Errc::Degenerate: return "Degenerate";
        case Errc::NonPositiveFunction: return "NonPositiveFunction";
        case Errc::DivergentForm: return "DivergentForm";
    }
    return "Unknown";
}

namespace {

std::string join_violations(const std::vector<FieldViolation>& violations) {
    std::ostringstream out;
    out << "invalid model parameters:";
    for (const auto& v : violations) out << ' ' << v.field << " (" << v.reason << ");";
    return out.str();
}

void require_nonnegative(double value, const char* field) {
    if (!(value >= 0.0)) {
        throw Error(Errc::NegativeInput, field,
                    std::string(field) + " must be non-negative");
    }
}

// The constants below are only defined for kappa > 0; see the decisions on
// the delta <= h/2 case in the README.
void require_coupling_regime(const ModelParams& params) {
    if (!params.harnack_admissible()) {
        throw Error(Errc::Inadmissible, "alpha", "coupling constants require alpha >= h/2");
    }
    if (!(params.kappa() > 0.0)) {
        throw Error(Errc::Inadmissible, "delta", "coupling constants require delta > h/2");
    }
}

double coordinate_gap(const ModelParams& params, const TransportPlan& plan) {
    const double e = 1.0 - params.h();
    return std::pow(plan.y(), e) - std::pow(plan.x(), e);
}

}  // namespace

ParamError::ParamError(std::vector<FieldViolation> violations)
    : Error(Errc::OutOfRange, violations.empty() ? std::string{} : violations.front().field,
            join_violations(violations)),
      violations_(std::move(violations)) {}

ModelParams::ModelParams(double alpha, double delta, double h)
    : alpha_(alpha),
      delta_(delta),
      h_(h),
      kappa_((1.0 - h) * (delta - 0.5 * h)),
      harnack_admissible_(alpha >= 0.5 * h) {}

ModelParams ModelParams::validate(double alpha, double delta, double h) {
    std::vector<FieldViolation> violations;
    if (!(alpha > 0.0 && std::isfinite(alpha))) violations.push_back({"alpha", "must be > 0"});
    if (!(delta > 0.0 && std::isfinite(delta))) violations.push_back({"delta", "must be > 0"});
    if (!(h > 0.5 && h < 1.0)) violations.push_back({"h", "must lie in (1/2,1)"});
    if (!violations.empty()) throw ParamError(std::move(violations));
    return ModelParams(alpha, delta, h);
}

TransportPlan TransportPlan::make(double x, double y, double horizon, std::optional<double> p) {
    require_nonnegative(x, "x");
    require_nonnegative(y, "y");
    if (!(horizon > 0.0 && std::isfinite(horizon))) {
        throw Error(Errc::OutOfRange, "T", "horizon must be > 0");
    }
    if (p && !(*p > 1.0)) {
        throw Error(Errc::ExponentViolation, "p", "Harnack exponent must be > 1");
    }
    const bool swapped = x > y;
    if (swapped) std::swap(x, y);
    return TransportPlan(x, y, horizon, p, swapped);
}

TransportPlan TransportPlan::with_horizon(double horizon) const {
    auto plan = make(x_, y_, horizon, p_);
    plan.swapped_ = swapped_;
    return plan;
}

TransportPlan TransportPlan::with_exponent(std::optional<double> p) const {
    auto plan = make(x_, y_, horizon_, p);
    plan.swapped_ = swapped_;
    return plan;
}

double intrinsic_coordinate(const ModelParams& params, double x) {
    require_nonnegative(x, "x");
    const double e = 1.0 - params.h();
    return std::pow(x, e) / e;
}

double from_intrinsic_coordinate(const ModelParams& params, double u) {
    require_nonnegative(u, "u");
    const double e = 1.0 - params.h();
    return std::pow(e * u, 1.0 / e);
}

double rho(const ModelParams& params, double s, double t) {
    require_nonnegative(s, "s");
    require_nonnegative(t, "t");
    const double e = 1.0 - params.h();
    return std::abs(std::pow(t, e) - std::pow(s, e)) / e;
}

double intrinsic_gradient(const ModelParams& params, double derivative, double x) {
    require_nonnegative(x, "x");
    if (x == 0.0) return 0.0;
    return std::pow(x, params.h()) * derivative;
}

double lemma_drift_gap(const ModelParams& params, double x, double y) {
    require_nonnegative(x, "x");
    if (!(x < y)) throw Error(Errc::OrderViolation, "x", "lemma_drift_gap requires x < y");
    if (x == 0.0) return -std::numeric_limits<double>::infinity();
    const double h = params.h();
    const double e = 1.0 - h;
    const double x_h = std::pow(x, h);
    const double y_h = std::pow(y, h);
    const double x_e = std::pow(x, e);
    const double y_e = std::pow(y, e);
    return params.alpha() * (1.0 / y_h - 1.0 / x_h) +
           0.5 * h * (1.0 / x_e - 1.0 / y_e + x_e - y_e);
}

double xi(const ModelParams& params, const TransportPlan& plan, double t) {
    require_coupling_regime(params);
    require_nonnegative(t, "t");
    const double k = params.kappa();
    return 2.0 * params.drift_excess() * coordinate_gap(params, plan) * std::exp(k * t) /
           std::expm1(2.0 * k * plan.horizon());
}

double xi_weighted_integral(const ModelParams& params, const TransportPlan& plan,
                            double t_end) {
    require_coupling_regime(params);
    if (!(t_end >= 0.0 && t_end <= plan.horizon())) {
        throw Error(Errc::OutOfRange, "t_end", "t_end must lie in [0, T]");
    }
    const double k = params.kappa();
    return coordinate_gap(params, plan) * std::expm1(2.0 * k * t_end) /
           ((1.0 - params.h()) * std::expm1(2.0 * k * plan.horizon()));
}

double xi_squared_integral(const ModelParams& params, const TransportPlan& plan, double t_end) {
    require_coupling_regime(params);
    require_nonnegative(t_end, "t_end");
    const double k = params.kappa();
    const double c = params.drift_excess() * coordinate_gap(params, plan);
    const double denom = std::expm1(2.0 * k * plan.horizon());
    return 2.0 * c * c * std::expm1(2.0 * k * t_end) / (k * denom * denom);
}

double log_harnack_constant(const ModelParams& params, const TransportPlan& plan) {
    require_coupling_regime(params);
    const double gap = coordinate_gap(params, plan);
    return params.drift_excess() * gap * gap /
           ((1.0 - params.h()) * std::expm1(2.0 * params.kappa() * plan.horizon()));
}

double log_harnack_power_constant(const ModelParams& params, const TransportPlan& plan) {
    if (!plan.p()) {
        throw Error(Errc::ExponentViolation, "p", "Harnack constant requires an exponent p > 1");
    }
    const double p = *plan.p();
    return p / (p - 1.0) * log_harnack_constant(params, plan);
}

double harnack_constant(const ModelParams& params, const TransportPlan& plan) {
    return std::exp(log_harnack_power_constant(params, plan));
}

double gradient_rate(const ModelParams& params, double horizon) {
    require_nonnegative(horizon, "T");
    return std::exp(-params.kappa() * horizon);
}

}  // namespace gcir

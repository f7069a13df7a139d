#include "gcir/test_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gcir {

TestFunction constant_function(double c) {
    TestFunction t;
    t.id = c == 1.0 ? "const1" : "const" + std::to_string(c);
    t.f = [c](double) { return c; };
    t.df = [](double) { return 0.0; };
    t.nonnegative = c >= 0.0;
    t.inf_positive = c > 0.0;
    return t;
}

TestFunction reciprocal_decay() {
    TestFunction t;
    t.id = "reciprocal";
    t.f = [](double x) { return 1.0 / (1.0 + x); };
    t.df = [](double x) { return -1.0 / ((1.0 + x) * (1.0 + x)); };
    return t;
}

TestFunction one_plus_exp_decay() {
    TestFunction t;
    t.id = "one_plus_exp";
    t.f = [](double x) { return 1.0 + std::exp(-x); };
    t.df = [](double x) { return -std::exp(-x); };
    t.inf_positive = true;
    return t;
}

TestFunction saturating() {
    TestFunction t;
    t.id = "saturating";
    t.f = [](double x) { return x / (1.0 + x); };
    t.df = [](double x) { return 1.0 / ((1.0 + x) * (1.0 + x)); };
    return t;
}

TestFunction rho_bump(const ModelParams& params, double center, double width, double floor) {
    const double h = params.h();
    TestFunction t;
    t.id = floor > 0.0 ? "rho_bump_shifted" : "rho_bump";
    t.f = [=](double x) {
        const double u = std::pow(x, 1.0 - h) / (1.0 - h) - center;
        return floor + std::exp(-u * u / (2.0 * width * width));
    };
    // d/dx = -(u / w^2) e^{...} x^{-h}; the x^{-h} factor is cancelled by the
    // decay of the bump near 0 unless the bump sits on the origin.
    t.df = [=](double x) {
        if (!(x > 0.0)) return 0.0;
        const double u = std::pow(x, 1.0 - h) / (1.0 - h) - center;
        return -(u / (width * width)) * std::exp(-u * u / (2.0 * width * width)) * std::pow(x, -h);
    };
    t.inf_positive = floor > 0.0;
    return t;
}

TestFunction distance_from_origin(const ModelParams& params) {
    const double h = params.h();
    TestFunction t;
    t.id = "distance";
    t.f = [=](double x) { return std::pow(x, 1.0 - h) / (1.0 - h); };
    t.df = [=](double x) { return x > 0.0 ? std::pow(x, -h) : std::numeric_limits<double>::infinity(); };
    t.bounded = false;
    return t;
}

TestFunction clipped_distance(const ModelParams& params, double n) {
    const double h = params.h();
    const double kink = std::pow(n * (1.0 - h), 1.0 / (1.0 - h));
    TestFunction t;
    t.id = "clipped_distance_" + std::to_string(static_cast<int>(n));
    t.f = [=](double x) { return std::min(std::pow(x, 1.0 - h) / (1.0 - h), n); };
    t.df = [=](double x) { return x > 0.0 && x < kink ? std::pow(x, -h) : 0.0; };
    t.smooth = false;
    t.kinks = {kink};
    return t;
}

TestFunction exp_distance(const ModelParams& params, double n) {
    const double h = params.h();
    TestFunction t;
    t.id = "exp_distance_" + std::to_string(static_cast<int>(n));
    t.f = [=](double x) { return std::exp(-n * std::pow(x, 1.0 - h) / (1.0 - h)); };
    t.df = [=](double x) {
        if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
        return -n * std::pow(x, -h) * std::exp(-n * std::pow(x, 1.0 - h) / (1.0 - h));
    };
    return t;
}

TestFunction zero_mean_bump_pair(const MeasureContext& ctx) {
    const auto& params = ctx.params();
    const TestFunction near = rho_bump(params, 1.0, 0.4);
    const TestFunction far = rho_bump(params, 4.0, 0.4);
    const double weight = mu_integral(ctx, near.f) / mu_integral(ctx, far.f);
    TestFunction t;
    t.id = "zero_mean_pair";
    t.f = [=](double x) { return near.f(x) - weight * far.f(x); };
    t.df = [=](double x) { return near.df(x) - weight * far.df(x); };
    t.nonnegative = false;
    return t;
}

std::vector<TestFunction> harnack_family(const ModelParams& params) {
    return {constant_function(1.0), reciprocal_decay(),         one_plus_exp_decay(),
            saturating(),           rho_bump(params, 2.0, 0.5), rho_bump(params, 2.0, 0.5, 0.1)};
}

std::vector<TestFunction> super_poincare_family(const MeasureContext& ctx) {
    const auto& params = ctx.params();
    return {constant_function(1.0),
            reciprocal_decay(),
            one_plus_exp_decay(),
            saturating(),
            rho_bump(params, 2.0, 0.5),
            zero_mean_bump_pair(ctx),
            clipped_distance(params, 2.0),
            exp_distance(params, 1.0),
            exp_distance(params, 2.0),
            exp_distance(params, 4.0),
            exp_distance(params, 8.0)};
}

TestFunction find_harnack_function(const ModelParams& params, const std::string& id) {
    for (auto& t : harnack_family(params)) {
        if (t.id == id) return t;
    }
    throw Error(Errc::InvalidConfig, "functions", "unknown test function '" + id + "'");
}

TestFunction find_test_function(const MeasureContext& ctx, const std::string& id) {
    for (auto& t : harnack_family(ctx.params())) {
        if (t.id == id) return t;
    }
    for (auto& t : super_poincare_family(ctx)) {
        if (t.id == id) return t;
    }
    throw Error(Errc::InvalidConfig, "functions", "unknown test function '" + id + "'");
}

}  // namespace gcir

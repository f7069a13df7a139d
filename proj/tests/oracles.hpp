#pragma once

// Reference values computed independently of the library: Boost.Math
// quadrature over the raw formulas, never through gcir's own integrator or
// substitutions.

#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

struct Triple {
    double alpha;
    double delta;
    double h;
};

// int_s^t r^{-h} dr, integrated in v = log r where the integrand e^{(1-h) v} is smooth.
inline double rho_integral(double h, double s, double t) {
    if (s > t) std::swap(s, t);
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [h](double v) { return std::exp((1.0 - h) * v); }, std::log(s), std::log(t), 15, 1e-15);
}

inline double kappa(const Triple& p) { return (1.0 - p.h) * (p.delta - 0.5 * p.h); }

// xi(t) from its defining property: the constant c with
// int_0^T e^{kappa s} c e^{kappa s} ds = rho(x, y), xi(s) = c e^{kappa s}.
inline double xi(const Triple& p, double x, double y, double T, double t) {
    const double k = kappa(p);
    const double rho = (std::pow(y, 1.0 - p.h) - std::pow(x, 1.0 - p.h)) / (1.0 - p.h);
    boost::math::quadrature::gauss_kronrod<double, 61> gk;
    const double norm = gk.integrate([k](double s) { return std::exp(2.0 * k * s); }, 0.0, T);
    return rho / norm * std::exp(k * t);
}

inline double xi_weighted_integral(const Triple& p, double x, double y, double T, double t_end) {
    const double k = kappa(p);
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double s) { return std::exp(k * s) * xi(p, x, y, T, s); }, 0.0, t_end, 15, 1e-14);
}

// log of x^{-2h} exp(2 alpha/(1-2h) x^{1-2h} - delta/(1-h) x^{2-2h}); Gamma0 omitted.
inline double log_kernel(const Triple& p, double x) {
    return -2.0 * p.h * std::log(x) + 2.0 * p.alpha / (1.0 - 2.0 * p.h) * std::pow(x, 1.0 - 2.0 * p.h) -
           p.delta / (1.0 - p.h) * std::pow(x, 2.0 - 2.0 * p.h);
}

inline double log_kernel_derivative(const Triple& p, double x) {
    return -2.0 * p.h / x + 2.0 * p.alpha * std::pow(x, -2.0 * p.h) - 2.0 * p.delta * std::pow(x, 1.0 - 2.0 * p.h);
}

// Mode of x^h times the kernel, by plain bisection on the derivative.
inline double kernel_mode(const Triple& p) {
    auto g = [&](double x) { return 2.0 * p.delta * x + p.h * std::pow(x, 2.0 * p.h - 1.0) - 2.0 * p.alpha; };
    double lo = 1e-300;
    double hi = 1.0;
    while (g(hi) < 0.0) hi *= 2.0;
    for (int i = 0; i < 2000 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// int_0^inf exp(log_kernel - log_kernel(mode)) dx, i.e. Z / Gamma0 rescaled.
inline double log_kernel_mass(const Triple& p) {
    const double m = kernel_mode(p);
    const double shift = log_kernel(p, m);
    auto f = [&](double x) { return x <= 0.0 ? 0.0 : std::exp(log_kernel(p, x) - shift); };
    boost::math::quadrature::tanh_sinh<double> ts(15);
    boost::math::quadrature::exp_sinh<double> es;
    const double head = ts.integrate(f, 0.0, m);
    const double tail = es.integrate([&](double u) { return f(m + u); }, 0.0,
                                     std::numeric_limits<double>::infinity());
    return shift + std::log(head + tail);
}

// mu((x, inf)) from the raw kernel.
inline double tail_mass(const Triple& p, double log_mass, double x) {
    boost::math::quadrature::exp_sinh<double> es;
    return es.integrate([&](double u) { return std::exp(log_kernel(p, x + u) - log_mass); }, 0.0,
                        std::numeric_limits<double>::infinity());
}

// mu((0, x)) from the raw kernel.
inline double head_mass(const Triple& p, double log_mass, double x) {
    boost::math::quadrature::tanh_sinh<double> ts(15);
    return ts.integrate(
        [&](double s) { return s <= 0.0 ? 0.0 : std::exp(log_kernel(p, s) - log_mass); }, 0.0, x);
}

}  // namespace oracle

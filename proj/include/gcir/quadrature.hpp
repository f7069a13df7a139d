#pragma once

// Globally adaptive 15-point Gauss-Kronrod integration.

#include <functional>

namespace gcir::quad {

struct Settings {
    double abs_tol = 0.0;
    double rel_tol = 1e-12;
    int max_subdivisions = 4000;
};

struct Result {
    double value = 0.0;
    double abs_error = 0.0;
    int intervals = 0;
    bool converged = false;
};

using Integrand = std::function<double(double)>;

// Integral over the finite interval [a, b].
Result integrate(const Integrand& f, double a, double b, const Settings& settings = {});

// Integral over [a, inf) via x = a + scale * t / (1 - t), t in [0, 1).
Result integrate_to_infinity(const Integrand& f, double a, double scale,
                             const Settings& settings = {});

// As above, but throw Error(QuadratureFailure) instead of returning an
// unconverged result.
double integrate_checked(const Integrand& f, double a, double b, const Settings& settings = {});
double integrate_to_infinity_checked(const Integrand& f, double a, double scale,
                                     const Settings& settings = {});

// log of the integral of exp(log_f) over [a, b]; the integrand is rescaled by
// its largest sampled value so results far outside double range are fine.
double log_integrate(const Integrand& log_f, double a, double b, const Settings& settings = {});

}  // namespace gcir::quad

#include "gcir/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gcir/error.hpp"

namespace gcir::quad {

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

// QUADPACK qk15 rule with its error heuristic.
Segment gauss_kronrod_15(const Integrand& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f_center = f(center);
    double result_gauss = f_center * kWg[3];
    double result_kronrod = f_center * kWgk[7];
    double result_abs = std::abs(result_kronrod);
    double f1[7];
    double f2[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        const double sum = f1[j] + f2[j];
        result_kronrod += kWgk[j] * sum;
        result_abs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) result_gauss += kWg[j / 2] * sum;
    }
    const double mean = result_kronrod * 0.5;
    double result_asc = kWgk[7] * std::abs(f_center - mean);
    for (int j = 0; j < 7; ++j) {
        result_asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    }
    const double scale = std::abs(half);
    result_kronrod *= half;
    result_abs *= scale;
    result_asc *= scale;
    double error = std::abs((result_kronrod - result_gauss * half));
    if (result_asc != 0.0 && error != 0.0) {
        error = result_asc * std::min(1.0, std::pow(200.0 * error / result_asc, 1.5));
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (result_abs > std::numeric_limits<double>::min() / (50.0 * eps)) {
        error = std::max(50.0 * eps * result_abs, error);
    }
    return {a, b, result_kronrod, error};
}

}  // namespace

Result integrate(const Integrand& f, double a, double b, const Settings& settings) {
    if (a == b) return {0.0, 0.0, 0, true};
    // Max-heap on error, kept as a vector so the totals can be re-summed exactly.
    std::vector<Segment> heap{gauss_kronrod_15(f, a, b)};
    int intervals = 1;
    double value = heap.front().value;
    double error = heap.front().error;
    auto tolerance = [&](double v) { return std::max(settings.abs_tol, settings.rel_tol * std::abs(v)); };
    auto resum = [&] {
        value = 0.0;
        error = 0.0;
        for (const auto& s : heap) {
            value += s.value;
            error += s.error;
        }
    };
    bool exhausted = false;
    while (!exhausted && error > tolerance(value) && intervals < settings.max_subdivisions) {
        // Running updates drift by rounding; refine until the re-summed error also meets tolerance.
        while (error > tolerance(value) && intervals < settings.max_subdivisions) {
            std::pop_heap(heap.begin(), heap.end());
            const Segment worst = heap.back();
            const double mid = 0.5 * (worst.a + worst.b);
            if (mid <= std::min(worst.a, worst.b) || mid >= std::max(worst.a, worst.b)) {
                std::push_heap(heap.begin(), heap.end());
                exhausted = true;
                break;
            }
            heap.pop_back();
            const Segment left = gauss_kronrod_15(f, worst.a, mid);
            const Segment right = gauss_kronrod_15(f, mid, worst.b);
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            heap.push_back(left);
            std::push_heap(heap.begin(), heap.end());
            heap.push_back(right);
            std::push_heap(heap.begin(), heap.end());
            ++intervals;
        }
        resum();
    }
    const bool ok = std::isfinite(value) && error <= tolerance(value);
    return {value, error, intervals, ok};
}

Result integrate_to_infinity(const Integrand& f, double a, double scale, const Settings& settings) {
    auto mapped = [&](double t) {
        if (t >= 1.0) return 0.0;
        const double one_minus = 1.0 - t;
        const double x = a + scale * t / one_minus;
        const double value = f(x);
        return value == 0.0 ? 0.0 : value * scale / (one_minus * one_minus);
    };
    return integrate(mapped, 0.0, 1.0, settings);
}

double integrate_checked(const Integrand& f, double a, double b, const Settings& settings) {
    const Result r = integrate(f, a, b, settings);
    if (!r.converged) {
        throw Error(Errc::QuadratureFailure, "quadrature",
                    "tolerance not met on [" + std::to_string(a) + ", " + std::to_string(b) +
                        "] (estimate " + std::to_string(r.value) + ", error " +
                        std::to_string(r.abs_error) + ")");
    }
    return r.value;
}

double integrate_to_infinity_checked(const Integrand& f, double a, double scale,
                                     const Settings& settings) {
    const Result r = integrate_to_infinity(f, a, scale, settings);
    if (!r.converged) {
        throw Error(Errc::QuadratureFailure, "quadrature",
                    "tolerance not met on [" + std::to_string(a) + ", inf) (estimate " +
                        std::to_string(r.value) + ", error " + std::to_string(r.abs_error) + ")");
    }
    return r.value;
}

double log_integrate(const Integrand& log_f, double a, double b, const Settings& settings) {
    if (a == b) return -std::numeric_limits<double>::infinity();
    constexpr int kProbe = 64;
    double shift = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kProbe; ++i) {
        const double x = a + (b - a) * static_cast<double>(i) / kProbe;
        const double v = log_f(x);
        if (std::isfinite(v)) shift = std::max(shift, v);
    }
    if (!std::isfinite(shift)) return -std::numeric_limits<double>::infinity();
    const double value =
        integrate_checked([&](double x) { return std::exp(log_f(x) - shift); }, a, b, settings);
    return shift + std::log(value);
}

}  // namespace gcir::quad

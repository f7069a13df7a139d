#include "gcir/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "gcir/parallel.hpp"

namespace gcir {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exponents and coefficients shared by every density evaluation.
struct Shape {
    double h;
    double c;   // 2h - 1
    double e1;  // 1 - h
    double e2;  // 2 - 2h
    double a1;  // 2 alpha / (1 - 2h), negative
    double a2;  // delta / (1 - h)
    double log_gamma0;

    explicit Shape(const ModelParams& p)
        : h(p.h()),
          c(2.0 * p.h() - 1.0),
          e1(1.0 - p.h()),
          e2(2.0 - 2.0 * p.h()),
          a1(2.0 * p.alpha() / (1.0 - 2.0 * p.h())),
          a2(p.delta() / (1.0 - p.h())),
          log_gamma0(std::numbers::ln2 - (a1 - a2)) {}

    [[nodiscard]] double log_density(double x) const {
        if (!(x > 0.0)) return -kInf;
        if (std::isinf(x)) return -kInf;
        return log_gamma0 - 2.0 * h * std::log(x) + a1 * std::pow(x, -c) - a2 * std::pow(x, e2);
    }
};

double log_add(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

// log of the integral of exp(log_density) over (0, x] for x at or left of the
// mode. With v = s^{1-2h} the factor exp(a1 v) becomes a plain exponential in
// w = v - x^{1-2h}; the integrand below is normalized to 1 at w = 0.
double log_head_integral_left(const Shape& s, double x, const quad::Settings& settings) {
    if (!(x > 0.0)) return -kInf;
    const double v_x = std::pow(x, -s.c);
    const double x_e2 = std::pow(x, s.e2);
    auto integrand = [&](double w) {
        const double log_ratio = -std::log1p(w / v_x) / s.c;  // log(s/x)
        return std::exp(s.a1 * w - s.a2 * x_e2 * std::expm1(s.e2 * log_ratio));
    };
    const double integral = quad::integrate_to_infinity_checked(integrand, 0.0, 1.0 / -s.a1, settings);
    return s.log_density(x) + 2.0 * s.h * std::log(x) - std::log(s.c) + std::log(integral);
}

// log of the integral over [x, inf) for x at or right of the mode, with
// w = s^{2-2h} - x^{2-2h} turning the stretched-exponential tail into exp(-a2 w).
double log_tail_integral_right(const Shape& s, double x, const quad::Settings& settings) {
    if (std::isinf(x)) return -kInf;
    const double x_e2 = std::pow(x, s.e2);
    const double x_mc = std::pow(x, -s.c);
    auto integrand = [&](double w) {
        const double log_ratio = std::log1p(w / x_e2) / s.e2;  // log(s/x)
        return std::exp(-log_ratio + s.a1 * x_mc * std::expm1(-s.c * log_ratio) - s.a2 * w);
    };
    const double integral = quad::integrate_to_infinity_checked(integrand, 0.0, 1.0 / s.a2, settings);
    return s.log_density(x) + s.c * std::log(x) - std::log(s.e2) + std::log(integral);
}

double log_middle_integral(const Shape& s, double a, double b, const quad::Settings& settings) {
    if (a >= b) return -kInf;
    return quad::log_integrate([&](double x) { return s.log_density(x); }, a, b, settings);
}

double log_head_integral(const Shape& s, double x0, double x, const quad::Settings& settings) {
    if (x <= x0) return log_head_integral_left(s, x, settings);
    return log_add(log_head_integral_left(s, x0, settings), log_middle_integral(s, x0, x, settings));
}

double log_tail_integral(const Shape& s, double x0, double x, const quad::Settings& settings) {
    if (x >= x0) return log_tail_integral_right(s, x, settings);
    return log_add(log_middle_integral(s, x, x0, settings), log_tail_integral_right(s, x0, settings));
}

// Bisection in log x on a monotone log-mass function. `increasing` tells the
// direction of log_mass in x.
double bisect_log_mass(const std::function<double(double)>& log_mass, double log_target, double lo,
                       double hi, bool increasing) {
    double t_lo = std::log(lo);
    double t_hi = std::log(hi);
    for (int iter = 0; iter < 400; ++iter) {
        const double mid = 0.5 * (t_lo + t_hi);
        if (mid <= t_lo || mid >= t_hi) break;
        const double value = log_mass(std::exp(mid));
        if (value == log_target) return std::exp(mid);
        const bool below = value < log_target;
        if (below == increasing) t_lo = mid;
        else t_hi = mid;
    }
    return std::exp(0.5 * (t_lo + t_hi));
}

double golden_minimize(const std::function<double(double)>& f, double a, double b, double& f_min) {
    constexpr double kInvPhi = 0.6180339887498949;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int iter = 0; iter < 200 && std::abs(b - a) > 1e-13 * std::max(1.0, std::abs(a)); ++iter) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    f_min = std::min(fc, fd);
    return fc < fd ? c : d;
}

// Minimum of f over a log-spaced grid on [exp(t_begin), exp(t_end)], polished
// by golden section around the best grid point. Returns the minimal value.
double scan_minimum(const std::function<double(double)>& log_f, double t_begin, double t_end,
                    int points) {
    std::vector<double> values(points + 1);
    const double step = (t_end - t_begin) / points;
    for (int i = 0; i <= points; ++i) values[i] = log_f(t_begin + step * i);
    const auto best = static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());
    double lo = t_begin + step * std::max(0, best - 1);
    double hi = t_begin + step * std::min(points, best + 1);
    double polished = values[best];
    golden_minimize(log_f, lo, hi, polished);
    return std::min(values[best], polished);
}

void require_positive(double x, const char* field) {
    if (!(x > 0.0)) throw Error(Errc::NonPositiveInput, field, std::string(field) + " must be > 0");
}

}  // namespace

struct MeasureContext::State {
    ModelParams params;
    MeasureSettings settings;
    double log_gamma0;
    double log_z;
    double log_z_split;
    double x0_mode;
    double head_at_mode;
    double tail_at_mode;
    double crossover;
    double r_bar;
};

MeasureContext::MeasureContext(const State& s)
    : params_(s.params),
      settings_(s.settings),
      log_gamma0_(s.log_gamma0),
      log_z_(s.log_z),
      log_z_split_(s.log_z_split),
      x0_mode_(s.x0_mode),
      head_at_mode_(s.head_at_mode),
      tail_at_mode_(s.tail_at_mode),
      crossover_(s.crossover),
      r_bar_(s.r_bar) {}

double MeasureContext::gamma0() const { return std::exp(log_gamma0_); }
double MeasureContext::z() const { return std::exp(log_z_); }

double mode_of_boundary_measure(const ModelParams& params) {
    const double h = params.h();
    auto excess = [&](double x) {
        return 2.0 * params.delta() * x + h * std::pow(x, 2.0 * h - 1.0) - 2.0 * params.alpha();
    };
    double lo = 0.0;
    double hi = params.alpha() / params.delta();
    for (int iter = 0; iter < 2000; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (excess(mid) < 0.0 ? lo : hi) = mid;
    }
    return std::abs(excess(lo)) < std::abs(excess(hi)) ? lo : hi;
}

double log_unnormalized_density(const ModelParams& params, double x) {
    require_positive(x, "x");
    return Shape(params).log_density(x);
}

double log_unnormalized_density(const MeasureContext& ctx, double x) {
    return log_unnormalized_density(ctx.params(), x);
}

double log_normalizer_u_substitution(const ModelParams& params, const quad::Settings& settings) {
    const Shape s(params);
    const double x0 = mode_of_boundary_measure(params);
    const double shift = s.log_density(x0);
    // x = u^{1/(1-h)}, dx = u^{h/(1-h)} / (1-h) du
    auto integrand = [&](double u) {
        if (!(u > 0.0)) return 0.0;
        const double x = std::pow(u, 1.0 / s.e1);
        return std::exp(s.log_density(x) - shift + (s.h / s.e1) * std::log(u) - std::log(s.e1));
    };
    const double u0 = std::pow(x0, s.e1);
    const double head = quad::integrate_checked(integrand, 0.0, u0, settings);
    const double tail = quad::integrate_to_infinity_checked(integrand, u0, 1.0 / std::sqrt(s.a2), settings);
    return shift + std::log(head + tail);
}

double log_normalizer_split(const ModelParams& params, double x0_mode, const quad::Settings& settings) {
    const Shape s(params);
    return log_add(log_head_integral_left(s, x0_mode, settings),
                   log_tail_integral_right(s, x0_mode, settings));
}

MeasureContext normalize(const ModelParams& params, const MeasureSettings& settings) {
    const Shape s(params);
    MeasureContext::State state{params, settings, s.log_gamma0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    state.x0_mode = mode_of_boundary_measure(params);
    state.log_z = log_normalizer_u_substitution(params, settings.quadrature);
    state.log_z_split = log_normalizer_split(params, state.x0_mode, settings.quadrature);
    state.head_at_mode =
        std::exp(log_head_integral_left(s, state.x0_mode, settings.quadrature) - state.log_z);
    state.tail_at_mode =
        std::exp(log_tail_integral_right(s, state.x0_mode, settings.quadrature) - state.log_z);
    const double cap = 0.5 * std::min(state.head_at_mode, state.tail_at_mode);

    // Walk the matched-mass comparison up from the smallest grid mass; the
    // regime ends at the last mass before head boundary <= tail boundary.
    state.crossover = cap;
    state.r_bar = cap;
    MeasureContext provisional(state);
    const int n = settings.crossover_grid_points;
    const double t_lo = std::log(settings.crossover_grid_min);
    const double t_hi = std::log(cap);
    double last_ok = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double log_r = t_lo + (t_hi - t_lo) * i / n;
        const double x1 = head_quantile_log(provisional, log_r);
        const double x2 = tail_quantile_log(provisional, log_r);
        if (log_boundary_measure(provisional, x1) <= log_boundary_measure(provisional, x2)) {
            state.crossover = last_ok;
            break;
        }
        last_ok = std::exp(log_r);
    }
    state.r_bar = std::min(cap, state.crossover);
    return MeasureContext(state);
}

double log_density(const MeasureContext& ctx, double x) {
    require_positive(x, "x");
    return Shape(ctx.params()).log_density(x) - ctx.log_z();
}

double density(const MeasureContext& ctx, double x) { return std::exp(log_density(ctx, x)); }

double log_density_derivative(const ModelParams& params, double x) {
    require_positive(x, "x");
    const double h = params.h();
    return -2.0 * h / x + 2.0 * params.alpha() * std::pow(x, -2.0 * h) -
           2.0 * params.delta() * std::pow(x, 1.0 - 2.0 * h);
}

double log_head_mass(const MeasureContext& ctx, double x) {
    if (!(x >= 0.0)) throw Error(Errc::NegativeInput, "x", "x must be non-negative");
    const Shape s(ctx.params());
    return log_head_integral(s, ctx.x0_mode(), x, ctx.settings().quadrature) - ctx.log_z();
}

double log_tail_mass(const MeasureContext& ctx, double x) {
    if (!(x >= 0.0)) throw Error(Errc::NegativeInput, "x", "x must be non-negative");
    const Shape s(ctx.params());
    return log_tail_integral(s, ctx.x0_mode(), x, ctx.settings().quadrature) - ctx.log_z();
}

double head_mass(const MeasureContext& ctx, double x) { return std::exp(log_head_mass(ctx, x)); }
double tail_mass(const MeasureContext& ctx, double x) { return std::exp(log_tail_mass(ctx, x)); }

double log_tail_asymptote(const MeasureContext& ctx, double x) {
    require_positive(x, "x");
    const Shape s(ctx.params());
    return ctx.log_gamma0() - ctx.log_z() - std::log(2.0 * ctx.params().delta()) - std::log(x) -
           s.a2 * std::pow(x, s.e2);
}

double log_boundary_measure(const MeasureContext& ctx, double x) {
    require_positive(x, "x");
    return ctx.params().h() * std::log(x) + log_density(ctx, x);
}

double boundary_measure_tail(const MeasureContext& ctx, double x) {
    return std::exp(log_boundary_measure(ctx, x));
}

double boundary_measure_head(const MeasureContext& ctx, double x) {
    return std::exp(log_boundary_measure(ctx, x));
}

double boundary_measure_fd(const MeasureContext& ctx, double x, double eps) {
    require_positive(x, "x");
    require_positive(eps, "eps");
    const double e1 = 1.0 - ctx.params().h();
    const double base = std::pow(x, e1) - e1 * eps;
    if (!(base > 0.0)) {
        throw Error(Errc::DegenerateNeighborhood, "eps",
                    "intrinsic neighbourhood of (x, inf) reaches 0");
    }
    const double lower = std::pow(base, 1.0 / e1);
    const double gained = quad::integrate_checked([&](double s) { return density(ctx, s); }, lower, x,
                                                  ctx.settings().quadrature);
    return gained / eps;
}

double boundary_measure_fd_head(const MeasureContext& ctx, double x, double eps) {
    require_positive(x, "x");
    require_positive(eps, "eps");
    const double e1 = 1.0 - ctx.params().h();
    const double upper = std::pow(std::pow(x, e1) + e1 * eps, 1.0 / e1);
    const double gained = quad::integrate_checked([&](double s) { return density(ctx, s); }, x, upper,
                                                  ctx.settings().quadrature);
    return gained / eps;
}

double head_quantile_log(const MeasureContext& ctx, double log_r) {
    if (!(log_r < 0.0)) throw Error(Errc::OutOfRange, "r", "head quantile needs 0 < r < 1");
    auto log_mass = [&](double x) { return log_head_mass(ctx, x); };
    double lo = ctx.x0_mode();
    double hi = ctx.x0_mode();
    if (log_mass(lo) > log_r) {
        do {
            hi = lo;
            lo *= 0.5;
            if (lo < std::numeric_limits<double>::min()) {
                throw Error(Errc::OutOfRange, "r", "head mass too small to invert");
            }
        } while (log_mass(lo) > log_r);
    } else {
        do {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e300) throw Error(Errc::OutOfRange, "r", "head quantile out of range");
        } while (log_mass(hi) < log_r);
    }
    return bisect_log_mass(log_mass, log_r, lo, hi, true);
}

double tail_quantile_log(const MeasureContext& ctx, double log_r) {
    if (!(log_r < 0.0)) throw Error(Errc::OutOfRange, "r", "tail quantile needs 0 < r < 1");
    auto log_mass = [&](double x) { return log_tail_mass(ctx, x); };
    double lo = ctx.x0_mode();
    double hi = ctx.x0_mode();
    if (log_mass(hi) > log_r) {
        do {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e300) throw Error(Errc::OutOfRange, "r", "tail mass too small to invert");
        } while (log_mass(hi) > log_r);
    } else {
        do {
            hi = lo;
            lo *= 0.5;
            if (lo < std::numeric_limits<double>::min()) {
                throw Error(Errc::OutOfRange, "r", "tail quantile out of range");
            }
        } while (log_mass(lo) < log_r);
    }
    return bisect_log_mass(log_mass, log_r, lo, hi, false);
}

QuantilePair quantiles(const MeasureContext& ctx, double r) {
    if (!(r > 0.0 && r < std::min(ctx.head_mass_at_mode(), ctx.tail_mass_at_mode()))) {
        throw Error(Errc::OutOfRange, "r", "quantiles need 0 < r < min(head, tail mass at the mode)");
    }
    const double log_r = std::log(r);
    return {head_quantile_log(ctx, log_r), tail_quantile_log(ctx, log_r)};
}

double tail_ratio_infimum(const MeasureContext& ctx, double x_threshold) {
    require_positive(x_threshold, "x");
    auto log_ratio = [&](double t) {
        const double x = std::exp(t);
        return log_boundary_measure(ctx, x) - log_tail_mass(ctx, x);
    };
    const auto& st = ctx.settings();
    const double t0 = std::log(x_threshold);
    const double span = st.k_grid_decades * std::numbers::ln10;
    const int points = std::max(4, static_cast<int>(st.k_grid_points * st.k_grid_decades / 3.0));
    return std::exp(scan_minimum(log_ratio, t0, t0 + span, points));
}

double isoperimetric_k_log(const MeasureContext& ctx, double log_r) {
    if (!(log_r < std::log(ctx.r_bar()))) {
        throw Error(Errc::OutOfRange, "r", "r outside the small-mass regime (r < r_bar)");
    }
    return tail_ratio_infimum(ctx, tail_quantile_log(ctx, log_r));
}

double isoperimetric_k(const MeasureContext& ctx, double r) {
    if (!(r > 0.0)) throw Error(Errc::OutOfRange, "r", "r must be positive");
    return isoperimetric_k_log(ctx, std::log(r));
}

double isoperimetric_k_unreduced(const MeasureContext& ctx, double r) {
    if (!(r > 0.0)) throw Error(Errc::OutOfRange, "r", "r must be positive");
    if (r >= 1.0) return 0.0;
    const double log_r = std::log(r);
    const double tail_part = tail_ratio_infimum(ctx, tail_quantile_log(ctx, log_r));
    const double x1 = head_quantile_log(ctx, log_r);
    auto log_head_ratio = [&](double t) {
        const double x = std::exp(t);
        return log_boundary_measure(ctx, x) - log_head_mass(ctx, x);
    };
    const auto& st = ctx.settings();
    const double t1 = std::log(x1);
    const int points = std::max(4, static_cast<int>(st.k_grid_points * st.k_grid_decades / 3.0));
    const double head_part =
        std::exp(scan_minimum(log_head_ratio, t1 - st.k_grid_decades * std::numbers::ln10, t1, points));
    return std::min(tail_part, head_part);
}

double InverseValue::value() const { return zero ? 0.0 : std::exp(log_value); }

InverseValue k_inverse(const MeasureContext& ctx, double v) {
    if (!(v > 0.0)) throw Error(Errc::OutOfRange, "v", "v must be positive");
    InverseValue out;
    // k(s) = K(x_s) with K(x) = inf_{x' >= x} ratio(x') nondecreasing in x,
    // so sup{s : k(s) > v} = tail mass at inf{x : K(x) > v}.
    const double x_bar = tail_quantile_log(ctx, std::log(ctx.r_bar()));
    auto k_at = [&](double x) { return tail_ratio_infimum(ctx, x); };
    if (k_at(x_bar) > v) {
        out.clamped = true;
        out.log_value = std::log(ctx.r_bar());
        return out;
    }
    double lo = x_bar;
    double hi = 2.0 * x_bar;
    while (k_at(hi) <= v) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300 || log_tail_mass(ctx, hi) == -kInf) {
            out.zero = true;
            out.log_value = -kInf;
            return out;
        }
    }
    double t_lo = std::log(lo);
    double t_hi = std::log(hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (t_lo + t_hi);
        if (mid <= t_lo || mid >= t_hi) break;
        (k_at(std::exp(mid)) > v ? t_hi : t_lo) = mid;
    }
    out.log_value = log_tail_mass(ctx, std::exp(t_hi));
    return out;
}

double RateValue::value() const { return std::exp(log_value); }

RateValue beta_isoperimetric(const MeasureContext& ctx, double r) {
    if (!(r > 0.0)) throw Error(Errc::OutOfRange, "r", "r must be positive");
    const InverseValue inv = k_inverse(ctx, 2.0 * std::numbers::sqrt2 / std::sqrt(r));
    if (inv.zero) {
        throw Error(Errc::Degenerate, "r", "k^{-1} vanishes at this r; rate function undefined");
    }
    return {std::log(4.0) - inv.log_value, inv.clamped};
}

RateValue beta_exponential(double c, double r) {
    if (!(c > 0.0)) throw Error(Errc::OutOfRange, "C", "C must be positive");
    if (!(r > 0.0)) throw Error(Errc::OutOfRange, "r", "r must be positive");
    return {c * (1.0 + 1.0 / r), false};
}

ExponentialFit fit_beta_exponential(const MeasureContext& ctx, std::span<const double> r_grid) {
    std::vector<double> log_beta(r_grid.size());
    parallel_for(r_grid.size(),
                 [&](std::size_t i) { log_beta[i] = beta_isoperimetric(ctx, r_grid[i]).log_value; });
    double num = 0.0;
    double den = 0.0;
    ExponentialFit fit;
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        const double a = 1.0 + 1.0 / r_grid[i];
        num += a * log_beta[i];
        den += a * a;
        fit.c_dominating = std::max(fit.c_dominating, log_beta[i] / a);
    }
    fit.c_least_squares = den > 0.0 ? num / den : 0.0;
    return fit;
}

SplitProbe split_minimizer_probe(const MeasureContext& ctx, double r, int n_grid) {
    if (n_grid < 10) throw Error(Errc::OutOfRange, "n_grid", "n_grid must be >= 10");
    if (!(r > 0.0 && r < ctx.r_bar())) {
        throw Error(Errc::OutOfRange, "r", "r outside the small-mass regime (r < r_bar)");
    }
    SplitProbe probe;
    probe.values.resize(n_grid + 1);
    parallel_for(static_cast<std::size_t>(n_grid) + 1, [&](std::size_t i) {
        const double head_share = r * static_cast<double>(i) / n_grid;
        const double tail_share = i == static_cast<std::size_t>(n_grid) ? 0.0 : r - head_share;
        double value = 0.0;
        if (head_share > 0.0) {
            value += boundary_measure_head(ctx, head_quantile_log(ctx, std::log(head_share)));
        }
        if (tail_share > 0.0) {
            value += boundary_measure_tail(ctx, tail_quantile_log(ctx, std::log(tail_share)));
        }
        probe.values[i] = value;
    });
    const auto best = std::min_element(probe.values.begin(), probe.values.end());
    probe.argmin = static_cast<std::size_t>(best - probe.values.begin());
    probe.min_over_splits = *best;
    probe.tail_only_value = probe.values.front();
    probe.head_only_value = probe.values.back();
    return probe;
}

RateTable build_rate_table(const MeasureContext& ctx, std::span<const double> r_grid) {
    RateTable table;
    table.fit = fit_beta_exponential(ctx, r_grid);
    table.rows.resize(r_grid.size());
    parallel_for(r_grid.size(), [&](std::size_t i) {
        RateRow& row = table.rows[i];
        row.r = r_grid[i];
        row.x_r = row.r < 1.0 ? tail_quantile_log(ctx, std::log(row.r)) : 0.0;
        row.reduced = row.r < ctx.r_bar();
        row.k = row.reduced ? isoperimetric_k(ctx, row.r) : isoperimetric_k_unreduced(ctx, row.r);
        row.k_inverse_arg = 2.0 * std::numbers::sqrt2 / std::sqrt(row.r);
        row.beta_iso = beta_isoperimetric(ctx, row.r);
        row.beta_exp_fit = beta_exponential(table.fit.c_dominating, row.r);
    });
    return table;
}

void write_rate_table_csv(std::ostream& out, const RateTable& table) {
    out << "r,x_r,k,k_inverse_arg,beta_iso,beta_exp_fit\n";
    out.precision(17);
    for (const auto& row : table.rows) {
        out << row.r << ',' << row.x_r << ',' << row.k << ',' << row.k_inverse_arg << ','
            << row.beta_iso.value() << ',' << row.beta_exp_fit.value() << '\n';
    }
}

double mu_integral(const MeasureContext& ctx, const std::function<double(double)>& g,
                   std::span<const double> breakpoints) {
    const Shape s(ctx.params());
    const double log_z = ctx.log_z();
    std::vector<double> points{ctx.x0_mode()};
    for (double b : breakpoints) {
        if (b > 0.0 && std::isfinite(b)) points.push_back(b);
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    // Geometric refinement between distant breakpoints, so no single
    // Gauss-Kronrod panel straddles the bulk of mu and misses it.
    std::vector<double> refined{points.front()};
    for (std::size_t i = 1; i < points.size(); ++i) {
        for (double x = refined.back() * 2.0; x < points[i] * 0.75; x *= 2.0) refined.push_back(x);
        refined.push_back(points[i]);
    }
    points = std::move(refined);

    quad::Settings settings = ctx.settings().quadrature;
    settings.abs_tol = std::max(settings.abs_tol, 1e-300);
    settings.rel_tol = std::max(settings.rel_tol, 1e-12);

    // (0, first] with v = s^{1-2h}: ds = s^{2h} / (2h-1) dv.
    const double first = points.front();
    const double v_first = std::pow(first, -s.c);
    auto head_integrand = [&](double w) {
        const double x = std::pow(v_first + w, -1.0 / s.c);
        if (!(x > 0.0)) return 0.0;
        const double weight = std::exp(s.log_density(x) + 2.0 * s.h * std::log(x) - std::log(s.c) - log_z);
        return weight == 0.0 ? 0.0 : g(x) * weight;
    };
    double total = quad::integrate_to_infinity_checked(head_integrand, 0.0, 1.0 / -s.a1, settings);

    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        total += quad::integrate_checked(
            [&](double x) { return g(x) * std::exp(s.log_density(x) - log_z); }, points[i],
            points[i + 1], settings);
    }

    // [last, inf) with w = s^{2-2h} - last^{2-2h}: ds = s^{2h-1} / (2-2h) dw.
    const double last = points.back();
    const double last_e2 = std::pow(last, s.e2);
    auto tail_integrand = [&](double w) {
        const double x = std::pow(last_e2 + w, 1.0 / s.e2);
        const double weight = std::exp(s.log_density(x) + s.c * std::log(x) - std::log(s.e2) - log_z);
        return weight == 0.0 ? 0.0 : g(x) * weight;
    };
    const quad::Result tail = quad::integrate_to_infinity(tail_integrand, 0.0, 1.0 / s.a2, settings);
    if (!tail.converged || !std::isfinite(tail.value)) {
        const double near = std::abs(tail_integrand(10.0 / s.a2));
        const double far = std::abs(tail_integrand(1000.0 / s.a2));
        if (!std::isfinite(far) || far >= near) {
            throw Error(Errc::DivergentForm, "f", "integrand does not decay against mu");
        }
        throw Error(Errc::QuadratureFailure, "quadrature", "tail integral against mu did not converge");
    }
    return total + tail.value;
}

}  // namespace gcir

#include "gcir/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace gcir {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double std_error_of(std::span<const double> v) {
    return MCEstimate::from_samples(v).std_error;
}

std::string format_id(std::string_view kind, const std::string& fid, double x, double y, double T) {
    std::ostringstream os;
    os << kind << ':' << fid << ":x=" << x << ":y=" << y << ":T=" << T;
    return os.str();
}

std::string format_p(double p) {
    std::ostringstream os;
    os << ":p=" << p;
    return os.str();
}

void require_samples(const PairedSamples& samples) {
    if (samples.at_x.size() != samples.at_y.size() || samples.at_x.size() < 2) {
        throw Error(Errc::InvalidConfig, "n_paths", "paired samples need equal sizes >= 2");
    }
}

void finish_mc(VerificationReport& r, double std_error) {
    r.slack = r.rhs - r.lhs;
    r.std_error = std_error;
    r.verdict = mc_verdict(r.lhs, r.rhs, std_error, r.z);
}

double log_add(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::Holds: return "Holds";
        case Verdict::HoldsWithinError: return "HoldsWithinError";
        case Verdict::Violated: return "Violated";
    }
    return "unknown";
}

Verdict mc_verdict(double lhs, double rhs, double std_error, double& z, double z_threshold) {
    if (!(std_error > 0.0) || !std::isfinite(std_error) || !std::isfinite(rhs)) {
        const double tol = 1e-12 * std::max(1.0, std::abs(rhs));
        z = lhs > rhs ? kInf : (lhs < rhs ? -kInf : 0.0);
        if (lhs - rhs > tol) return Verdict::Violated;
        return lhs <= rhs ? Verdict::Holds : Verdict::HoldsWithinError;
    }
    z = (lhs - rhs) / std_error;
    if (z > z_threshold) return Verdict::Violated;
    return lhs <= rhs ? Verdict::Holds : Verdict::HoldsWithinError;
}

Verdict quadrature_verdict(double lhs, double rhs, double abs_tol) {
    const double slack = rhs - lhs;
    if (slack < -abs_tol) return Verdict::Violated;
    return slack >= 0.0 ? Verdict::Holds : Verdict::HoldsWithinError;
}

PairedSamples paired_terminal(const ModelParams& params, double x, double y, double horizon,
                              SimConfig config) {
    config.horizon = horizon;
    return {simulate_terminal(params, x, config), simulate_terminal(params, y, config)};
}

VerificationReport verify_harnack(const ModelParams& params, const TransportPlan& plan,
                                  const TestFunction& f, const PairedSamples& samples,
                                  double scale) {
    require_samples(samples);
    if (!f.nonnegative) {
        throw Error(Errc::NonPositiveFunction, "f", "Harnack check needs a nonnegative function");
    }
    const double p = plan.p() ? *plan.p() : 0.0;
    const double log_c = log_harnack_power_constant(params, plan) + std::log(scale);
    const std::size_t n = samples.at_x.size();
    std::vector<double> fy(n);
    std::vector<double> fxp(n);
    for (std::size_t i = 0; i < n; ++i) {
        fy[i] = f.f(samples.at_y[i]);
        fxp[i] = std::pow(f.f(samples.at_x[i]), p);
        if (fy[i] < 0.0 || fxp[i] < 0.0) {
            throw Error(Errc::NonPositiveFunction, "f", "test function took a negative value");
        }
    }
    const double m_y = mean_of(fy);
    const double m_xp = mean_of(fxp);
    VerificationReport r;
    r.kind = "harnack";
    r.check_id = format_id(r.kind, f.id, plan.x(), plan.y(), plan.horizon()) + format_p(p);
    r.lhs = std::pow(m_y, p);
    r.rhs = m_xp > 0.0 ? std::exp(log_c + std::log(m_xp)) : 0.0;
    double se = 0.0;
    if (std::isfinite(r.rhs)) {
        const double c = std::exp(log_c);
        const double dlhs = p * std::pow(m_y, p - 1.0);
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = dlhs * fy[i] - c * fxp[i];
        se = std_error_of(d);
    }
    finish_mc(r, se);
    return r;
}

VerificationReport verify_harnack(const ModelParams& params, const TransportPlan& plan,
                                  const TestFunction& f, const SimConfig& config, double scale) {
    // Validate the constant before paying for the simulation.
    (void)log_harnack_power_constant(params, plan);
    return verify_harnack(params, plan, f,
                          paired_terminal(params, plan.x(), plan.y(), plan.horizon(), config), scale);
}

VerificationReport verify_log_harnack(const ModelParams& params, const TransportPlan& plan,
                                      const TestFunction& f, const PairedSamples& samples,
                                      double scale) {
    require_samples(samples);
    if (!f.inf_positive) {
        throw Error(Errc::NonPositiveFunction, "f", "log-Harnack check needs inf f > 0");
    }
    const double constant = scale * log_harnack_constant(params, plan);
    const std::size_t n = samples.at_x.size();
    std::vector<double> log_fy(n);
    std::vector<double> fx(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double vy = f.f(samples.at_y[i]);
        fx[i] = f.f(samples.at_x[i]);
        if (!(vy > 0.0) || !(fx[i] > 0.0)) {
            throw Error(Errc::NonPositiveFunction, "f", "test function took a non-positive value");
        }
        log_fy[i] = std::log(vy);
    }
    const double m_x = mean_of(fx);
    VerificationReport r;
    r.kind = "log-harnack";
    r.check_id = format_id(r.kind, f.id, plan.x(), plan.y(), plan.horizon());
    r.lhs = mean_of(log_fy);
    r.rhs = std::log(m_x) + constant;
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = log_fy[i] - fx[i] / m_x;
    finish_mc(r, std_error_of(d));
    return r;
}

VerificationReport verify_log_harnack(const ModelParams& params, const TransportPlan& plan,
                                      const TestFunction& f, const SimConfig& config,
                                      double scale) {
    (void)log_harnack_constant(params, plan);
    return verify_log_harnack(params, plan, f,
                              paired_terminal(params, plan.x(), plan.y(), plan.horizon(), config),
                              scale);
}

double intrinsic_neighbour(const ModelParams& params, double x, double step) {
    return from_intrinsic_coordinate(params, intrinsic_coordinate(params, x) + step);
}

VerificationReport verify_gradient_estimate(const ModelParams& params, double x, double horizon,
                                            const TestFunction& f, const PairedSamples& samples,
                                            double scale) {
    if (!(x >= 0.0)) throw Error(Errc::NegativeInput, "x", "x must be non-negative");
    if (!(horizon >= 0.0)) throw Error(Errc::OutOfRange, "T", "horizon must be non-negative");
    const double rate = scale * gradient_rate(params, horizon);
    const double y = intrinsic_neighbour(params, x);
    VerificationReport r;
    r.kind = "gradient";
    r.check_id = format_id(r.kind, f.id, x, y, horizon);
    auto grad = [&](double v) { return std::abs(intrinsic_gradient(params, f.df(v), v)); };
    if (horizon == 0.0) {
        r.lhs = grad(x);
        r.rhs = rate * grad(x);
        r.note = "T = 0 evaluated exactly";
        finish_mc(r, 0.0);
        return r;
    }
    require_samples(samples);
    const std::size_t n = samples.at_x.size();
    const double step = rho(params, x, y);
    std::vector<double> diff(n);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        diff[i] = (f.f(samples.at_y[i]) - f.f(samples.at_x[i])) / step;
        g[i] = grad(samples.at_x[i]);
    }
    const double quotient = mean_of(diff);
    const double sign = quotient < 0.0 ? -1.0 : 1.0;
    r.lhs = std::abs(quotient);
    r.rhs = rate * mean_of(g);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = sign * diff[i] - rate * g[i];
    finish_mc(r, std_error_of(d));
    return r;
}

VerificationReport verify_gradient_estimate(const ModelParams& params, double x, double horizon,
                                            const TestFunction& f, const SimConfig& config,
                                            double scale) {
    if (horizon == 0.0) return verify_gradient_estimate(params, x, horizon, f, PairedSamples{}, scale);
    return verify_gradient_estimate(
        params, x, horizon, f,
        paired_terminal(params, x, intrinsic_neighbour(params, x), horizon, config), scale);
}

double dirichlet_form(const MeasureContext& ctx, const TestFunction& f) {
    const double h = ctx.params().h();
    auto energy = [&](double x) {
        if (!(x > 0.0)) return 0.0;
        const double g = std::pow(x, h) * f.df(x);
        return 0.5 * g * g;
    };
    return mu_integral(ctx, energy, f.kinks);
}

VerificationReport verify_super_poincare_log(const MeasureContext& ctx, const TestFunction& f,
                                             double r, double log_beta) {
    if (!(r > 0.0)) throw Error(Errc::OutOfRange, "r", "r must be positive");
    const double second = mu_integral(ctx, [&](double x) { return f.f(x) * f.f(x); }, f.kinks);
    const double first = mu_integral(ctx, [&](double x) { return std::abs(f.f(x)); }, f.kinks);
    const double energy = dirichlet_form(ctx, f);
    VerificationReport rep;
    rep.kind = "super-poincare";
    std::ostringstream id;
    id << rep.kind << ':' << f.id << ":r=" << r;
    rep.check_id = id.str();
    rep.lhs = second;
    rep.rhs = r * energy + (first > 0.0 ? std::exp(log_beta + 2.0 * std::log(first)) : 0.0);
    rep.slack = rep.rhs - rep.lhs;
    rep.verdict = quadrature_verdict(rep.lhs, rep.rhs, 1e-10 * std::max(1.0, std::abs(rep.lhs)));
    return rep;
}

VerificationReport verify_super_poincare(const MeasureContext& ctx, const TestFunction& f, double r,
                                         double beta_value) {
    if (!(beta_value > 0.0)) throw Error(Errc::OutOfRange, "beta", "beta must be positive");
    return verify_super_poincare_log(ctx, f, r, std::log(beta_value));
}

namespace {

struct MomentIntegrand {
    const MeasureContext& ctx;
    double gamma;
    double eps;
    double e1;

    double log_value(double x) const {
        if (!(x > 0.0)) return -kInf;
        const double rho0 = std::pow(x, e1) / e1;
        return eps * std::pow(rho0, gamma) + log_unnormalized_density(ctx.params(), x) - ctx.log_z();
    }
    double log_derivative(double x) const {
        const double rho0 = std::pow(x, e1) / e1;
        return eps * gamma * std::pow(rho0, gamma - 1.0) * std::pow(x, -ctx.params().h()) +
               log_density_derivative(ctx.params(), x);
    }

    // log of the integral over [a, b]. Where the log-integrand swings by
    // hundreds across the piece the mass sits in a boundary layer at an
    // endpoint, and the one-term endpoint expansion is used instead.
    double log_piece(double a, double b) const {
        if (!(b > a)) return -kInf;
        double lo = kInf;
        double hi = -kInf;
        for (int i = 0; i <= 8; ++i) {
            const double v = log_value(a + (b - a) * i / 8.0);
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        if (a == 0.0 || hi - lo < 400.0) {
            quad::Settings s{0.0, 1e-10, 4000};
            return quad::log_integrate([this](double x) { return log_value(x); }, a, b, s);
        }
        double out = -kInf;
        const double da = log_derivative(a);
        const double db = log_derivative(b);
        if (da < 0.0) out = log_add(out, log_value(a) - std::log(-da));
        if (db > 0.0) out = log_add(out, log_value(b) - std::log(db));
        if (out == -kInf) {
            quad::Settings s{0.0, 1e-10, 4000};
            return quad::log_integrate([this](double x) { return log_value(x); }, a, b, s);
        }
        return out;
    }
};

}  // namespace

double log_truncated_moment(const MeasureContext& ctx, double gamma, double eps, double upper) {
    if (!(upper > 0.0)) return -kInf;
    const MomentIntegrand m{ctx, gamma, eps, 1.0 - ctx.params().h()};
    const double x0 = ctx.x0_mode();
    double total = m.log_piece(0.0, std::min(upper, x0));
    for (double a = x0; a < upper; a *= 2.0) total = log_add(total, m.log_piece(a, std::min(2.0 * a, upper)));
    return total;
}

DivergenceProbe optimality_divergence_probe(const MeasureContext& ctx, double lambda, double eps,
                                            double bound) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw Error(Errc::ExponentRange, "lambda", "lambda must lie in (0,1)");
    }
    if (!(eps > 0.0)) throw Error(Errc::OutOfRange, "eps", "eps must be positive");
    if (!(bound >= 0.0)) throw Error(Errc::OutOfRange, "bound", "bound must be non-negative");
    DivergenceProbe probe{lambda, eps, bound};
    if (bound == 0.0) {
        probe.found = true;
        probe.log_mass_at_r = probe.log_mass_at_2r = -kInf;
        return probe;
    }
    if (lambda <= 0.5) {
        // rho(0, .) is unbounded: mu puts positive mass beyond the point at distance `bound`.
        probe.unbounded_branch = true;
        probe.r_star = from_intrinsic_coordinate(ctx.params(), bound);
        probe.log_mass_at_r = log_tail_mass(ctx, probe.r_star);
        probe.log_mass_at_2r = log_tail_mass(ctx, 2.0 * probe.r_star);
        probe.found = std::isfinite(probe.log_mass_at_r);
        return probe;
    }
    probe.exponent = 2.0 * lambda / (2.0 * lambda - 1.0);
    const MomentIntegrand m{ctx, probe.exponent, eps, 1.0 - ctx.params().h()};
    const double target = std::log(bound);
    const double x0 = ctx.x0_mode();

    double a = 0.0;
    double b = x0;
    double before = -kInf;
    double after = m.log_piece(a, b);
    while (after < target) {
        a = b;
        b *= 2.0;
        if (b > 1e300) return probe;
        before = after;
        after = log_add(before, m.log_piece(a, b));
    }
    // Bisection for the crossing inside the last piece, in log R.
    double lo = a > 0.0 ? std::log(a) : std::log(b) - 60.0;
    double hi = std::log(b);
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double value = log_add(before, m.log_piece(a, std::exp(mid)));
        (value >= target ? hi : lo) = mid;
    }
    probe.found = true;
    probe.r_star = std::exp(hi);
    probe.log_mass_at_r = log_add(before, m.log_piece(a, probe.r_star));
    probe.log_mass_at_2r = log_truncated_moment(ctx, probe.exponent, eps, 2.0 * probe.r_star);
    return probe;
}

void write_reports_csv(std::ostream& out, std::span<const VerificationReport> reports) {
    out << "check_id,kind,lhs,rhs,slack,z,verdict\n";
    out.precision(17);
    for (const auto& r : reports) {
        out << '"' << r.check_id << "\"," << r.kind << ',' << r.lhs << ',' << r.rhs << ',' << r.slack
            << ',' << r.z << ',' << to_string(r.verdict) << '\n';
    }
}

bool any_violated(std::span<const VerificationReport> reports) {
    return std::any_of(reports.begin(), reports.end(),
                       [](const VerificationReport& r) { return r.verdict == Verdict::Violated; });
}

}  // namespace gcir

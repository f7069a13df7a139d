#pragma once

// Verification harnesses for the Harnack, log-Harnack and intrinsic-gradient
// inequalities (Monte Carlo) and for the super Poincare inequality
// (quadrature), plus the exponential-moment divergence probe.

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gcir/measure.hpp"
#include "gcir/simulation.hpp"
#include "gcir/test_functions.hpp"

namespace gcir {

enum class Verdict { Holds, HoldsWithinError, Violated };

std::string_view to_string(Verdict verdict);

struct VerificationReport {
    std::string check_id;
    std::string kind;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;      // rhs - lhs
    double std_error = 0.0;  // of lhs - rhs; 0 for quadrature checks
    double z = 0.0;          // (lhs - rhs) / std_error
    Verdict verdict = Verdict::Holds;
    std::string note;
};

// z-score verdict: Violated iff z > z_threshold. With a zero standard error
// the comparison is exact up to a relative 1e-12.
[[nodiscard]] Verdict mc_verdict(double lhs, double rhs, double std_error, double& z,
                                 double z_threshold = 4.0);
// Violated iff slack < -abs_tol.
[[nodiscard]] Verdict quadrature_verdict(double lhs, double rhs, double abs_tol);

// Terminal values X_T^x and X_T^y driven by the same increments (equal
// SimConfig), so differences between the two starts keep little noise.
struct PairedSamples {
    std::vector<double> at_x;
    std::vector<double> at_y;
};

[[nodiscard]] PairedSamples paired_terminal(const ModelParams& params, double x, double y,
                                            double horizon, SimConfig config);

// (P_T f(y))^p <= P_T f^p(x) * scale * C(p, T, x, y).
[[nodiscard]] VerificationReport verify_harnack(const ModelParams& params, const TransportPlan& plan,
                                                const TestFunction& f, const PairedSamples& samples,
                                                double scale = 1.0);
[[nodiscard]] VerificationReport verify_harnack(const ModelParams& params, const TransportPlan& plan,
                                                const TestFunction& f, const SimConfig& config,
                                                double scale = 1.0);

// P_T log f(y) <= log P_T f(x) + scale * C(T, x, y).
[[nodiscard]] VerificationReport verify_log_harnack(const ModelParams& params,
                                                    const TransportPlan& plan, const TestFunction& f,
                                                    const PairedSamples& samples,
                                                    double scale = 1.0);
[[nodiscard]] VerificationReport verify_log_harnack(const ModelParams& params,
                                                    const TransportPlan& plan, const TestFunction& f,
                                                    const SimConfig& config, double scale = 1.0);

// Intrinsic step used by the gradient difference quotient.
inline constexpr double kGradientStep = 1e-2;

// The point y > x with rho(x, y) = step.
[[nodiscard]] double intrinsic_neighbour(const ModelParams& params, double x,
                                         double step = kGradientStep);

// |P_T f(y) - P_T f(x)| / rho(x, y) <= scale * e^{-kappa T} P_T |grad^h f|(x),
// y = intrinsic_neighbour(x). T = 0 is evaluated exactly.
[[nodiscard]] VerificationReport verify_gradient_estimate(const ModelParams& params, double x,
                                                          double horizon, const TestFunction& f,
                                                          const PairedSamples& samples,
                                                          double scale = 1.0);
[[nodiscard]] VerificationReport verify_gradient_estimate(const ModelParams& params, double x,
                                                          double horizon, const TestFunction& f,
                                                          const SimConfig& config,
                                                          double scale = 1.0);

// (1/2) int x^{2h} f'(x)^2 dmu.
[[nodiscard]] double dirichlet_form(const MeasureContext& ctx, const TestFunction& f);

// mu(f^2) <= r E(f,f) + beta mu(|f|)^2.
[[nodiscard]] VerificationReport verify_super_poincare(const MeasureContext& ctx,
                                                       const TestFunction& f, double r,
                                                       double beta_value);
// Same with beta given by its logarithm, for rates beyond double range.
[[nodiscard]] VerificationReport verify_super_poincare_log(const MeasureContext& ctx,
                                                           const TestFunction& f, double r,
                                                           double log_beta);

struct DivergenceProbe {
    double lambda = 0.0;
    double eps = 0.0;
    double bound = 0.0;
    double exponent = 0.0;         // 2 lambda / (2 lambda - 1); 0 on the bounded branch
    double r_star = 0.0;           // smallest truncation reaching the bound
    double log_mass_at_r = 0.0;    // log of the truncated moment at r_star
    double log_mass_at_2r = 0.0;   // and at 2 r_star
    bool found = false;
    bool unbounded_branch = false; // lambda <= 1/2: r_star is where rho(0,.) reaches bound
    [[nodiscard]] double growth_log() const { return log_mass_at_2r - log_mass_at_r; }
};

// Smallest R with int_0^R exp(eps rho(0,x)^{2 lambda/(2 lambda - 1)}) dmu >= bound.
// Throws Error(ExponentRange) unless 0 < lambda < 1.
[[nodiscard]] DivergenceProbe optimality_divergence_probe(const MeasureContext& ctx, double lambda,
                                                          double eps, double bound);

// log of int_0^R exp(eps rho(0,x)^gamma) dmu.
[[nodiscard]] double log_truncated_moment(const MeasureContext& ctx, double gamma, double eps,
                                          double upper);

// CSV with header check_id,kind,lhs,rhs,slack,z,verdict.
void write_reports_csv(std::ostream& out, std::span<const VerificationReport> reports);

[[nodiscard]] bool any_violated(std::span<const VerificationReport> reports);

}  // namespace gcir

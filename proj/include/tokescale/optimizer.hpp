#pragma once

#include <functional>
#include <limits>
#include <vector>

namespace tokescale {

inline constexpr double kDefaultGradTol = 1e-10;
inline constexpr std::size_t kDefaultMaxStarts = 2000;
inline constexpr double kHessianStep = 1e-5;

/// Model maps (theta, input row) -> predicted value. Rows are arbitrary
/// per-observation feature vectors. Must be safe to call concurrently.
using ModelFn = std::function<double(const std::vector<double>& theta, const std::vector<double>& row)>;
using ObjectiveFn = std::function<double(const std::vector<double>& theta)>;

struct Bound {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

struct FitProblem {
    ModelFn model;
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;
    std::vector<Bound> bounds;               // sized p, may be +/-inf
    std::vector<std::vector<double>> starts; // each within bounds
    double grad_tol = kDefaultGradTol;
    std::size_t max_starts = kDefaultMaxStarts;  // stratified cap, fixed seed
    std::size_t max_iterations = 500;
};

struct FitDiagnostics {
    double rmse = 0.0;
    double r2 = 0.0;
    double adj_r2 = 0.0;
    std::size_t n = 0;
    std::size_t p = 0;
};

struct FitResult {
    std::vector<double> theta_hat;
    double sos = 0.0;
    std::size_t n_starts_tried = 0;
    bool converged = false;
    FitDiagnostics diagnostics;
};

struct ConfidenceInterval {
    double estimate = 0.0;
    double low = 0.0;
    double high = 0.0;
    double level = 0.95;
    double std_error = 0.0;
};

struct OlsLogLog {
    double log_const = 0.0;            // ln of the multiplicative constant
    std::vector<double> exponents;     // one per input column
};

/// Closed-form linear least squares on log-transformed data:
/// ln y ~ log_const + sum_j exponents[j] * ln x_j.
OlsLogLog ols_loglog(const std::vector<std::vector<double>>& inputs,
                     const std::vector<double>& targets);

struct GridSpec {
    double half_width = 0.0;
    int n_values = 1;
};

/// Cartesian product of evenly spaced perturbations around theta_center.
std::vector<std::vector<double>> grid_starts(const std::vector<double>& theta_center,
                                             const std::vector<GridSpec>& spec);

/// Multi-start box-constrained quasi-Newton minimization of the sum of
/// squared residuals, followed by a damped Gauss-Newton polish of the
/// winner. Deterministic: ties broken by lexicographically smallest theta;
/// start order and internal parallelism do not matter.
FitResult minimize_sos(const FitProblem& problem);

/// Central-difference Hessian, four-point stencil, symmetric by construction.
std::vector<std::vector<double>> numerical_hessian(const ObjectiveFn& objective,
                                                   const std::vector<double>& theta,
                                                   double step = kHessianStep);

std::vector<ConfidenceInterval> confidence_intervals(const FitResult& result,
                                                     const FitProblem& problem,
                                                     double level = 0.95);

/// Two-sided Student-t critical value: P(|T_dof| <= t) = level.
double t_quantile(double two_sided_level, std::size_t dof);

FitDiagnostics fit_diagnostics(double sos, const std::vector<double>& targets, std::size_t p);

}  // namespace tokescale

#include "tokescale/law1.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tokescale/errors.hpp"

namespace tokescale {

LawOneParams fit_law1(const std::vector<OptimumPoint>& optima, const LawOneOptions& options) {
    std::set<double> budgets, compressions;
    for (const auto& o : optima) {
        budgets.insert(o.budget);
        compressions.insert(o.compression);
    }
    if (optima.size() < 4 || budgets.size() < 2 || compressions.size() < 2)
        throw InsufficientVariationError(
            "fit_law1: need >= 4 optima spanning >= 2 budgets and >= 2 compressions");

    // OLS prior on ln B* = ln B0 + alpha ln C + beta ln T.
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;
    for (const auto& o : optima) {
        if (!(o.budget > 0.0) || !(o.compression > 0.0) || !(o.opt_bytes > 0.0))
            throw DomainError("fit_law1: optima must be strictly positive");
        inputs.push_back({o.budget, o.compression});
        targets.push_back(o.opt_bytes);
    }
    OlsLogLog prior = ols_loglog(inputs, targets);
    std::vector<double> theta_ols = {prior.log_const, prior.exponents[0], prior.exponents[1]};

    // Residuals in log space; theta = (ln B0, alpha, beta).
    FitProblem problem;
    problem.model = [](const std::vector<double>& theta, const std::vector<double>& row) {
        return theta[0] + theta[1] * std::log(row[0]) + theta[2] * std::log(row[1]);
    };
    for (const auto& o : optima) {
        problem.inputs.push_back({o.budget, o.compression});
        problem.targets.push_back(std::log(o.opt_bytes));
    }
    problem.bounds = {{-30.0, 30.0}, {-2.0, 2.0}, {-2.0, 2.0}};
    // Keep the whole perturbation grid inside the bounds.
    theta_ols[0] = std::clamp(theta_ols[0], -27.0, 27.0);
    theta_ols[1] = std::clamp(theta_ols[1], -1.7, 1.7);
    theta_ols[2] = std::clamp(theta_ols[2], -1.7, 1.7);
    int n = options.grid_values;
    problem.starts = grid_starts(theta_ols, {{3.0, n}, {0.3, n}, {0.3, n}});
    problem.max_starts = options.max_starts;

    FitResult result = minimize_sos(problem);

    LawOneParams params;
    params.family = options.family;
    params.b0 = std::exp(result.theta_hat[0]);
    params.alpha = result.theta_hat[1];
    params.beta = result.theta_hat[2];
    params.n0 = 1.0 / (6.0 * params.b0);
    params.diagnostics = result.diagnostics;
    params.n_starts_tried = result.n_starts_tried;
    if (options.with_intervals && problem.targets.size() > result.theta_hat.size()) {
        try {
            params.intervals = confidence_intervals(result, problem, options.ci_level);
        } catch (const UncertaintyUnavailableError&) {
            // Fit stays valid without intervals.
        }
    }
    return params;
}

double predict_data(const LawOneParams& params, double budget, double compression) {
    if (!(budget > 0.0) || !(compression > 0.0))
        throw DomainError("predict_data: budget and compression must be positive");
    return params.b0 * std::pow(budget, params.alpha) * std::pow(compression, params.beta);
}

double predict_params(const LawOneParams& params, double budget, double compression) {
    if (!(budget > 0.0) || !(compression > 0.0))
        throw DomainError("predict_params: budget and compression must be positive");
    return params.n0 * std::pow(budget, 1.0 - params.alpha) *
           std::pow(compression, 1.0 - params.beta);
}

double predict_bpp(const LawOneParams& params, double budget, double compression) {
    if (!(budget > 0.0) || !(compression > 0.0))
        throw DomainError("predict_bpp: budget and compression must be positive");
    return (params.b0 / params.n0) * std::pow(budget, 2.0 * params.alpha - 1.0) *
           std::pow(compression, 2.0 * params.beta - 1.0);
}

}  // namespace tokescale

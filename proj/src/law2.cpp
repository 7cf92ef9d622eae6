#include "tokescale/law2.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "tokescale/errors.hpp"

namespace tokescale {

namespace {

constexpr double kLnL0Lo = -30.0, kLnL0Hi = 30.0;
constexpr double kGammaLo = -2.0, kGammaHi = 0.0;
constexpr double kOffsetLo = -5.0, kOffsetHi = 5.0;

std::vector<double> sorted_compressions(const std::vector<LossOptimum>& optima) {
    std::set<double> ts;
    for (const auto& o : optima) ts.insert(o.compression);
    return {ts.begin(), ts.end()};
}

std::size_t compression_index(const std::vector<double>& ts, double t) {
    auto it = std::lower_bound(ts.begin(), ts.end(), t);
    return std::size_t(it - ts.begin());
}

// For fixed gamma the model is linear in (L0, offsets); solving that least
// squares problem over a gamma grid gives a strong prior.
struct ProfilePrior {
    double log_l0 = 0.0;
    double gamma = -0.2;
    std::vector<double> offsets;
};

ProfilePrior profile_prior(const std::vector<LossOptimum>& optima, const std::vector<double>& ts) {
    const std::size_t n = optima.size();
    const std::size_t k = ts.size();
    ProfilePrior best;
    double best_sos = std::numeric_limits<double>::infinity();
    for (int gi = 1; gi <= 120; ++gi) {
        double gamma = -0.005 * gi;  // (-0.6, 0)
        Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, k + 1);
        Eigen::VectorXd y(n);
        for (std::size_t i = 0; i < n; ++i) {
            X(i, 0) = std::pow(optima[i].budget, gamma);
            X(i, 1 + compression_index(ts, optima[i].compression)) = 1.0;
            y[i] = optima[i].opt_loss;
        }
        Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
        double sos = (y - X * beta).squaredNorm();
        if (sos < best_sos && beta[0] > 0.0) {
            best_sos = sos;
            best.gamma = gamma;
            best.log_l0 = std::log(beta[0]);
            best.offsets.assign(beta.data() + 1, beta.data() + 1 + k);
        }
    }
    if (best.offsets.empty()) best.offsets.assign(k, 0.0);
    for (double& f : best.offsets) f = std::clamp(f, kOffsetLo, kOffsetHi);
    best.log_l0 = std::clamp(best.log_l0, kLnL0Lo + 3.0, kLnL0Hi - 3.0);
    best.gamma = std::clamp(best.gamma, kGammaLo + 0.31, -1e-9);
    return best;
}

double clamp_start(double v, const Bound& b) { return std::clamp(v, b.lo, b.hi); }

}  // namespace

std::string to_string(ResidualVariant variant) {
    switch (variant) {
        case ResidualVariant::Mean: return "mean";
        case ResidualVariant::ConstT: return "const_T";
        case ResidualVariant::ComputeT: return "compute_T";
    }
    return "mean";
}

ResidualVariant residual_variant_from_string(const std::string& name) {
    if (name == "mean") return ResidualVariant::Mean;
    if (name == "const_T" || name == "const-t" || name == "const_t") return ResidualVariant::ConstT;
    if (name == "compute_T" || name == "compute-t" || name == "compute_t")
        return ResidualVariant::ComputeT;
    throw DomainError("unknown residual variant '" + name + "'");
}

OffsetsFit fit_law2_offsets(const std::vector<LossOptimum>& optima, const LawTwoOptions& options) {
    std::set<double> budgets;
    for (const auto& o : optima) {
        if (!(o.budget > 0.0) || !(o.compression > 0.0) || !(o.opt_loss > 0.0))
            throw DomainError("fit_law2_offsets: optima must be strictly positive");
        budgets.insert(o.budget);
    }
    std::vector<double> ts = sorted_compressions(optima);
    if (budgets.size() < 2)
        throw InsufficientVariationError(
            "fit_law2_offsets: a single budget leaves gamma confounded with the offsets");
    if (ts.size() < 2)
        throw InsufficientVariationError("fit_law2_offsets: need >= 2 distinct compressions");
    for (double t : ts) {
        std::set<double> per;
        for (const auto& o : optima)
            if (o.compression == t) per.insert(o.budget);
        if (per.size() < 2)
            throw InsufficientVariationError("fit_law2_offsets: need >= 2 budgets per compression");
    }

    const std::size_t k = ts.size();
    ProfilePrior prior = profile_prior(optima, ts);

    // theta = (ln L0, gamma, f_1..f_k).
    FitProblem problem;
    problem.model = [ts](const std::vector<double>& theta, const std::vector<double>& row) {
        double term = std::exp(theta[0]) * std::pow(row[0], theta[1]);
        return term + theta[2 + compression_index(ts, row[1])];
    };
    for (const auto& o : optima) {
        problem.inputs.push_back({o.budget, o.compression});
        problem.targets.push_back(o.opt_loss);
    }
    problem.bounds.assign(2 + k, Bound{kOffsetLo, kOffsetHi});
    problem.bounds[0] = {kLnL0Lo, kLnL0Hi};
    problem.bounds[1] = {kGammaLo, kGammaHi};

    // Offsets start at the mean loss per compression; (ln L0, gamma) scan a
    // perturbation grid around the profile prior.
    std::vector<double> mean_loss(k, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (const auto& o : optima) {
        std::size_t j = compression_index(ts, o.compression);
        mean_loss[j] += o.opt_loss;
        counts[j] += 1;
    }
    for (std::size_t j = 0; j < k; ++j)
        mean_loss[j] = std::clamp(mean_loss[j] / double(counts[j]), kOffsetLo, kOffsetHi);

    std::vector<double> center = {prior.log_l0, prior.gamma};
    std::vector<GridSpec> spec = {{3.0, options.grid_values}, {0.3, options.grid_values}};
    auto head_starts = grid_starts(center, spec);
    std::vector<double> profile_start = {prior.log_l0, prior.gamma};
    profile_start.insert(profile_start.end(), prior.offsets.begin(), prior.offsets.end());
    problem.starts.push_back(profile_start);
    for (const auto& head : head_starts) {
        std::vector<double> s = {clamp_start(head[0], problem.bounds[0]),
                                 clamp_start(head[1], problem.bounds[1])};
        s.insert(s.end(), mean_loss.begin(), mean_loss.end());
        problem.starts.push_back(std::move(s));
    }
    problem.max_starts = options.max_starts;

    FitResult result = minimize_sos(problem);

    OffsetsFit fit;
    fit.l0 = std::exp(result.theta_hat[0]);
    fit.gamma = result.theta_hat[1];
    for (std::size_t j = 0; j < k; ++j) fit.offsets[ts[j]] = result.theta_hat[2 + j];
    fit.diagnostics = result.diagnostics;
    fit.n_starts_tried = result.n_starts_tried;
    return fit;
}

ResidualParams fit_residual_model(const std::vector<ResidualSample>& samples,
                                  ResidualVariant variant, const LawTwoOptions& options) {
    if (samples.empty()) throw InsufficientDataError("fit_residual_model: no samples");
    std::set<double> ts;
    for (const auto& s : samples) ts.insert(s.compression);

    ResidualParams params;
    params.variant = variant;

    double mean = 0.0;
    for (const auto& s : samples) mean += s.value;
    mean /= double(samples.size());
    params.e = mean;
    if (variant == ResidualVariant::Mean) return params;

    if (ts.size() < 3)
        throw InsufficientVariationError(
            "fit_residual_model: need >= 3 distinct compressions for a quadratic residual model");

    // Unconstrained quadratic in ln T gives closed-form inits for (F, T0).
    Eigen::MatrixXd X(samples.size(), 3);
    Eigen::VectorXd y(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double lt = std::log(samples[i].compression);
        X(i, 0) = 1.0;
        X(i, 1) = lt;
        X(i, 2) = lt * lt;
        y[i] = samples[i].value;
    }
    Eigen::VectorXd poly = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    double f_init = std::max(poly[2], 1e-6);
    double ln_t0_init = std::clamp(-poly[1] / (2.0 * f_init), -8.0, 8.0);

    const Bound f_bound{0.0, 100.0};
    const Bound ln_t0_bound{-10.0, 10.0};
    const Bound delta_bound{-1.0, 1.0};
    const Bound e_bound{kOffsetLo, kOffsetHi};

    if (variant == ResidualVariant::ConstT) {
        if (options.nested) {
            // theta = (F, ln T0); E frozen at the mean-stage value.
            FitProblem problem;
            double e_fixed = params.e;
            problem.model = [e_fixed](const std::vector<double>& theta, const std::vector<double>& row) {
                double arg = std::log(row[1]) - theta[1];
                return e_fixed + theta[0] * arg * arg;
            };
            for (const auto& s : samples) {
                problem.inputs.push_back({s.budget, s.compression});
                problem.targets.push_back(s.value);
            }
            problem.bounds = {f_bound, ln_t0_bound};
            problem.starts = grid_starts({std::clamp(f_init, 0.0, 50.0), ln_t0_init}, {{0.05, 5}, {1.5, 9}});
            for (auto& s : problem.starts) {
                s[0] = clamp_start(s[0], f_bound);
                s[1] = clamp_start(s[1], ln_t0_bound);
            }
            problem.max_starts = options.max_starts;
            FitResult r = minimize_sos(problem);
            params.f = r.theta_hat[0];
            params.t0 = std::exp(r.theta_hat[1]);
        } else {
            // Joint (E, F, ln T0): closed form through the quadratic map.
            params.f = f_init;
            params.t0 = std::exp(ln_t0_init);
            params.e = poly[0] - poly[1] * poly[1] / (4.0 * f_init);
            if (poly[2] <= 0.0) {  // concave residual profile; fall back to flat
                params.f = 0.0;
                params.t0 = std::exp(ln_t0_init);
                params.e = mean;
            }
            params.e = std::clamp(params.e, e_bound.lo, e_bound.hi);
        }
        return params;
    }

    // compute_T
    std::set<double> budgets;
    for (const auto& s : samples) budgets.insert(s.budget);
    ResidualParams const_stage = fit_residual_model(samples, ResidualVariant::ConstT, options);
    params.variant = ResidualVariant::ComputeT;

    if (options.nested) {
        // theta = (ln T0, delta); E and F carried from the earlier stages.
        double e_fixed = params.e;
        double f_fixed = const_stage.f;
        FitProblem problem;
        problem.model = [e_fixed, f_fixed](const std::vector<double>& theta,
                                           const std::vector<double>& row) {
            double arg = theta[1] * std::log(row[0]) + std::log(row[1]) - theta[0];
            return e_fixed + f_fixed * arg * arg;
        };
        for (const auto& s : samples) {
            problem.inputs.push_back({s.budget, s.compression});
            problem.targets.push_back(s.value);
        }
        problem.bounds = {ln_t0_bound, delta_bound};
        std::vector<double> center = {std::log(const_stage.t0), 0.0};
        problem.starts = grid_starts(center, {{2.0, 9}, {0.08, 9}});
        for (auto& st : problem.starts) {
            st[0] = clamp_start(st[0], ln_t0_bound);
            st[1] = clamp_start(st[1], delta_bound);
        }
        problem.max_starts = options.max_starts;
        FitResult r = minimize_sos(problem);
        params.f = f_fixed;
        params.t0 = std::exp(r.theta_hat[0]);
        params.delta = r.theta_hat[1];
    } else {
        // Joint (E, F, ln T0, delta).
        FitProblem problem;
        problem.model = [](const std::vector<double>& theta, const std::vector<double>& row) {
            double arg = theta[3] * std::log(row[0]) + std::log(row[1]) - theta[2];
            return theta[0] + theta[1] * arg * arg;
        };
        for (const auto& s : samples) {
            problem.inputs.push_back({s.budget, s.compression});
            problem.targets.push_back(s.value);
        }
        problem.bounds = {e_bound, f_bound, ln_t0_bound, delta_bound};
        std::vector<double> center = {std::clamp(const_stage.e, e_bound.lo, e_bound.hi),
                                      std::clamp(const_stage.f, f_bound.lo, f_bound.hi),
                                      std::log(const_stage.t0), 0.0};
        problem.starts = grid_starts(center, {{0.2, 5}, {0.05, 5}, {1.5, 7}, {0.08, 7}});
        for (auto& st : problem.starts) {
            st[0] = clamp_start(st[0], e_bound);
            st[1] = clamp_start(st[1], f_bound);
            st[2] = clamp_start(st[2], ln_t0_bound);
            st[3] = clamp_start(st[3], delta_bound);
        }
        problem.max_starts = options.max_starts;
        FitResult r = minimize_sos(problem);
        params.e = r.theta_hat[0];
        params.f = r.theta_hat[1];
        params.t0 = std::exp(r.theta_hat[2]);
        params.delta = r.theta_hat[3];
    }
    return params;
}

ResidualModelReport select_residual_model(const std::vector<LossOptimum>& optima,
                                          double holdout_budget, const LawTwoOptions& options) {
    std::vector<LossOptimum> train, holdout;
    for (const auto& o : optima) {
        if (o.budget == holdout_budget) holdout.push_back(o);
        else train.push_back(o);
    }
    if (holdout.empty())
        throw DomainError("select_residual_model: holdout budget not present in the optima");
    if (train.empty()) throw DomainError("select_residual_model: no training optima left");

    OffsetsFit stage_a = fit_law2_offsets(train, options);
    std::vector<ResidualSample> residuals;
    residuals.reserve(train.size());
    for (const auto& o : train)
        residuals.push_back(
            {o.budget, o.compression, o.opt_loss - stage_a.l0 * std::pow(o.budget, stage_a.gamma)});

    ResidualModelReport report;
    report.holdout_budget = holdout_budget;
    report.n_train = train.size();
    report.n_holdout = holdout.size();

    const ResidualVariant variants[] = {ResidualVariant::Mean, ResidualVariant::ConstT,
                                        ResidualVariant::ComputeT};
    const std::size_t n_params[] = {3, 5, 6};  // (L0, gamma) + residual parameters

    for (std::size_t vi = 0; vi < 3; ++vi) {
        ResidualParams rp = fit_residual_model(residuals, variants[vi], options);
        auto predict = [&](double budget, double compression) {
            double base = stage_a.l0 * std::pow(budget, stage_a.gamma);
            if (rp.variant == ResidualVariant::Mean) return base + rp.e;
            double delta = rp.variant == ResidualVariant::ComputeT ? rp.delta : 0.0;
            double arg = delta * std::log(budget) + std::log(compression) - std::log(rp.t0);
            return base + rp.e + rp.f * arg * arg;
        };
        double ho_sos = 0.0;
        for (const auto& o : holdout) {
            double r = o.opt_loss - predict(o.budget, o.compression);
            ho_sos += r * r;
        }
        double train_sos = 0.0;
        std::vector<double> train_targets;
        for (const auto& o : train) {
            double r = o.opt_loss - predict(o.budget, o.compression);
            train_sos += r * r;
            train_targets.push_back(o.opt_loss);
        }
        FitDiagnostics diag = fit_diagnostics(train_sos, train_targets, n_params[vi]);
        ResidualModelRow row;
        row.variant = variants[vi];
        row.e = rp.e;
        row.f = variants[vi] == ResidualVariant::Mean ? 0.0 : rp.f;
        row.t0 = variants[vi] == ResidualVariant::Mean ? 0.0 : rp.t0;
        row.delta = variants[vi] == ResidualVariant::ComputeT ? rp.delta : 0.0;
        row.rmse_holdout = std::sqrt(ho_sos / double(holdout.size()));
        row.r2 = diag.r2;
        row.adj_r2 = diag.adj_r2;
        report.rows.push_back(row);
    }

    // Minimum holdout RMSE; ties go to the simpler model (rows are ordered
    // by parameter count).
    std::size_t best = 0;
    for (std::size_t vi = 1; vi < report.rows.size(); ++vi)
        if (report.rows[vi].rmse_holdout < report.rows[best].rmse_holdout) best = vi;
    report.selected = report.rows[best].variant;
    return report;
}

LawTwoParams fit_law2(const std::vector<LossOptimum>& optima, ResidualVariant variant,
                      const LawTwoOptions& options) {
    OffsetsFit stage_a = fit_law2_offsets(optima, options);
    std::vector<ResidualSample> residuals;
    residuals.reserve(optima.size());
    for (const auto& o : optima)
        residuals.push_back(
            {o.budget, o.compression, o.opt_loss - stage_a.l0 * std::pow(o.budget, stage_a.gamma)});
    ResidualParams rp = fit_residual_model(residuals, variant, options);

    LawTwoParams params;
    params.l0 = stage_a.l0;
    params.gamma = stage_a.gamma;
    params.residual_variant = variant;
    params.e = rp.e;
    params.f = rp.f;
    params.t0 = rp.t0;
    params.delta = rp.delta;
    params.family = options.family;
    params.offsets = stage_a.offsets;
    params.diagnostics = stage_a.diagnostics;
    return params;
}

double optimal_compression(const LawTwoParams& params, double budget) {
    if (params.residual_variant == ResidualVariant::Mean)
        throw NoOptimumError("optimal_compression: the mean residual model has no optimum in T");
    if (!(budget > 0.0)) throw DomainError("optimal_compression: budget must be positive");
    double delta = params.residual_variant == ResidualVariant::ComputeT ? params.delta : 0.0;
    return params.t0 / std::pow(budget, delta);
}

double predict_loss(const LawTwoParams& params, double budget, double compression) {
    if (!(budget > 0.0) || !(compression > 0.0))
        throw DomainError("predict_loss: budget and compression must be positive");
    double base = params.l0 * std::pow(budget, params.gamma);
    if (params.residual_variant == ResidualVariant::Mean) return base + params.e;
    double delta = params.residual_variant == ResidualVariant::ComputeT ? params.delta : 0.0;
    double arg = delta * std::log(budget) + std::log(compression) - std::log(params.t0);
    return base + params.e + params.f * arg * arg;
}

double loss_sensitivity(const LawTwoParams& params, double budget, double compression) {
    if (params.residual_variant == ResidualVariant::Mean)
        throw NoOptimumError("loss_sensitivity: the mean residual model has no optimum in T");
    double t_star = optimal_compression(params, budget);
    double arg = std::log(compression / t_star);
    return params.f * arg * arg;
}

}  // namespace tokescale

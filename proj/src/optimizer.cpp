#include "tokescale/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "tokescale/errors.hpp"

namespace tokescale {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

Vec to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> from_eigen(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec clip_to_bounds(Vec x, const std::vector<Bound>& bounds) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x[i] = std::clamp(x[i], bounds[i].lo, bounds[i].hi);
    return x;
}

// Forward finite differences, per-parameter relative step.
Vec fd_gradient(const ObjectiveFn& f, const Vec& x, double f_x, const std::vector<Bound>& bounds) {
    constexpr double kRelStep = 1e-7;
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double h = kRelStep * std::max(1.0, std::abs(x[i]));
        Vec xp = x;
        xp[i] += h;
        if (xp[i] > bounds[i].hi) {
            xp[i] = x[i] - h;  // flip direction at the upper bound
            g[i] = (f_x - f(from_eigen(xp))) / h;
        } else {
            g[i] = (f(from_eigen(xp)) - f_x) / h;
        }
    }
    return g;
}

struct LbfgsOutcome {
    Vec x;
    double f = 0.0;
    double proj_grad_norm = 0.0;
    bool converged = false;
};

// Projected-gradient L-BFGS for box constraints. Convergence when the
// projected gradient infinity norm falls below grad_tol or the relative
// improvement stalls.
LbfgsOutcome lbfgs_box(const ObjectiveFn& f, Vec x0, const std::vector<Bound>& bounds,
                       double grad_tol, std::size_t max_iterations) {
    constexpr std::size_t kMemory = 10;
    constexpr double kFtol = 1e-14;

    LbfgsOutcome out;
    Vec x = clip_to_bounds(std::move(x0), bounds);
    double fx = f(from_eigen(x));
    std::deque<std::pair<Vec, Vec>> memory;  // (s, y)
    Vec g = fd_gradient(f, x, fx, bounds);

    std::size_t stalled = 0;
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        Vec proj = x - clip_to_bounds(x - g, bounds);
        out.proj_grad_norm = proj.lpNorm<Eigen::Infinity>();
        if (out.proj_grad_norm <= grad_tol) {
            out.converged = true;
            break;
        }

        // Two-loop recursion.
        Vec d = -g;
        std::vector<double> alpha(memory.size());
        for (std::size_t i = memory.size(); i-- > 0;) {
            const auto& [s, y] = memory[i];
            double rho = 1.0 / y.dot(s);
            alpha[i] = rho * s.dot(d);
            d -= alpha[i] * y;
        }
        if (!memory.empty()) {
            const auto& [s, y] = memory.back();
            d *= s.dot(y) / y.dot(y);
        }
        for (std::size_t i = 0; i < memory.size(); ++i) {
            const auto& [s, y] = memory[i];
            double rho = 1.0 / y.dot(s);
            double beta = rho * y.dot(d);
            d += (alpha[i] - beta) * s;
        }
        if (d.dot(g) > -1e-18 * d.norm() * g.norm()) d = -g;  // not a descent direction

        // Projected backtracking line search with Armijo condition.
        double t = 1.0;
        double f_new = fx;
        Vec x_new = x;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = clip_to_bounds(x + t * d, bounds);
            Vec step = x_new - x;
            if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
            f_new = f(from_eigen(x_new));
            if (f_new <= fx + 1e-4 * g.dot(step)) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // No descent exists along an FD-descent direction, so the true
            // gradient is below the finite-difference resolution: the point
            // is numerically stationary.
            out.converged = true;
            break;
        }

        Vec g_new = fd_gradient(f, x_new, f_new, bounds);
        Vec s = x_new - x;
        Vec y = g_new - g;
        if (y.dot(s) > 1e-12 * s.norm() * y.norm()) {
            memory.emplace_back(std::move(s), std::move(y));
            if (memory.size() > kMemory) memory.pop_front();
        }

        double improvement = fx - f_new;
        x = std::move(x_new);
        fx = f_new;
        g = std::move(g_new);

        if (improvement <= kFtol * std::max(1.0, std::abs(fx))) {
            if (++stalled >= 3) {
                Vec proj2 = x - clip_to_bounds(x - g, bounds);
                out.proj_grad_norm = proj2.lpNorm<Eigen::Infinity>();
                out.converged = true;
                break;
            }
        } else {
            stalled = 0;
        }
    }
    out.x = std::move(x);
    out.f = fx;
    return out;
}

bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Deterministic stratified subsample: fixed-seed shuffle, first `cap` kept,
// the unperturbed center (start 0 by convention) always included.
std::vector<std::size_t> capped_indices(std::size_t n, std::size_t cap) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (cap == 0 || n <= cap) return idx;
    std::mt19937_64 rng(0x746f6b6573ULL);
    std::shuffle(idx.begin() + 1, idx.end(), rng);
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// Damped Gauss-Newton refinement of a sum-of-squares solution. Solves the
// residual-level normal equations, so it reaches the minimizer to far
// better accuracy than line searches over FD gradients allow.
std::vector<double> gauss_newton_polish(const FitProblem& problem, std::vector<double> theta,
                                        double& sos) {
    const std::size_t n = problem.targets.size();
    const std::size_t p = theta.size();
    auto residuals = [&](const std::vector<double>& th) {
        Vec r(n);
        for (std::size_t i = 0; i < n; ++i)
            r[i] = problem.targets[i] - problem.model(th, problem.inputs[i]);
        return r;
    };
    Vec r = residuals(theta);
    sos = r.squaredNorm();
    double lambda = 0.0;
    for (int iter = 0; iter < 40; ++iter) {
        Mat J(n, p);  // model Jacobian by forward differences
        for (std::size_t j = 0; j < p; ++j) {
            double h = 1e-7 * std::max(1.0, std::abs(theta[j]));
            std::vector<double> shifted = theta;
            shifted[j] += h;
            Vec r_shift = residuals(shifted);
            J.col(j) = (r - r_shift) / h;  // d(model)/d(theta_j)
        }
        Mat jtj = J.transpose() * J;
        Vec jtr = J.transpose() * r;
        bool improved = false;
        for (int attempt = 0; attempt < 8; ++attempt) {
            Mat damped = jtj + lambda * Mat::Identity(p, p);
            Vec step = damped.ldlt().solve(jtr);
            if (!step.allFinite()) {
                lambda = std::max(1e-10, lambda * 10.0);
                continue;
            }
            std::vector<double> candidate = theta;
            for (std::size_t j = 0; j < p; ++j)
                candidate[j] =
                    std::clamp(candidate[j] + step[j], problem.bounds[j].lo, problem.bounds[j].hi);
            Vec r_new = residuals(candidate);
            double sos_new = r_new.squaredNorm();
            if (sos_new < sos) {
                double gain = sos - sos_new;
                theta = std::move(candidate);
                r = std::move(r_new);
                sos = sos_new;
                lambda *= 0.25;
                improved = true;
                if (gain <= 1e-16 * std::max(1.0, sos)) return theta;
                break;
            }
            lambda = std::max(1e-10, lambda * 10.0);
        }
        if (!improved) break;
    }
    return theta;
}

FitResult run_multistart(const ObjectiveFn& objective, const std::vector<Bound>& bounds,
                         const std::vector<std::vector<double>>& starts, double grad_tol,
                         std::size_t max_starts, std::size_t max_iterations) {
    if (starts.empty()) throw InsufficientDataError("minimize: no starts supplied");
    const std::size_t p = starts.front().size();
    if (bounds.size() != p) throw DomainError("minimize: bounds/starts dimension mismatch");
    for (const auto& s : starts)
        for (std::size_t i = 0; i < p; ++i)
            if (s[i] < bounds[i].lo || s[i] > bounds[i].hi)
                throw DomainError("minimize: start outside bounds");

    auto picked = capped_indices(starts.size(), max_starts);

    FitResult best;
    best.n_starts_tried = picked.size();
    bool have_converged = false;
    double best_effort_f = std::numeric_limits<double>::infinity();
    std::vector<double> best_effort_theta;
    double best_effort_grad = std::numeric_limits<double>::infinity();

    for (std::size_t k : picked) {
        LbfgsOutcome run = lbfgs_box(objective, to_eigen(starts[k]), bounds, grad_tol, max_iterations);
        std::vector<double> theta = from_eigen(run.x);
        if (run.converged) {
            bool better = !have_converged || run.f < best.sos ||
                          (run.f == best.sos && lex_less(theta, best.theta_hat));
            if (better) {
                best.theta_hat = theta;
                best.sos = run.f;
                best.converged = true;
            }
            have_converged = true;
        }
        if (run.f < best_effort_f) {
            best_effort_f = run.f;
            best_effort_theta = theta;
            best_effort_grad = run.proj_grad_norm;
        }
    }
    if (!have_converged)
        throw NonConvergenceError("minimize: no start converged (best projected gradient " +
                                      std::to_string(best_effort_grad) + ")",
                                  best_effort_theta, best_effort_grad);
    return best;
}

}  // namespace

OlsLogLog ols_loglog(const std::vector<std::vector<double>>& inputs,
                     const std::vector<double>& targets) {
    const std::size_t n = targets.size();
    if (n == 0 || inputs.size() != n) throw InsufficientDataError("ols_loglog: empty or mismatched data");
    const std::size_t m = inputs.front().size();
    Mat X(n, m + 1);
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(targets[i] > 0.0)) throw DomainError("ols_loglog: targets must be strictly positive");
        if (inputs[i].size() != m) throw DomainError("ols_loglog: ragged input matrix");
        y[i] = std::log(targets[i]);
        X(i, 0) = 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (!(inputs[i][j] > 0.0)) throw DomainError("ols_loglog: inputs must be strictly positive");
            X(i, j + 1) = std::log(inputs[i][j]);
        }
    }
    Eigen::ColPivHouseholderQR<Mat> qr(X);
    if (qr.rank() < static_cast<Eigen::Index>(m + 1))
        throw SingularDesignError("ols_loglog: rank-deficient design after log transform");
    Vec beta = qr.solve(y);
    OlsLogLog out;
    out.log_const = beta[0];
    out.exponents.assign(beta.data() + 1, beta.data() + 1 + m);
    return out;
}

std::vector<std::vector<double>> grid_starts(const std::vector<double>& theta_center,
                                             const std::vector<GridSpec>& spec) {
    if (spec.size() != theta_center.size())
        throw DomainError("grid_starts: spec size must match parameter count");
    std::vector<std::vector<double>> axes(spec.size());
    for (std::size_t j = 0; j < spec.size(); ++j) {
        int n = spec[j].n_values;
        if (n < 1) throw DomainError("grid_starts: n_values must be >= 1");
        if (n == 1 || spec[j].half_width == 0.0) {
            axes[j] = {theta_center[j]};
            continue;
        }
        for (int k = 0; k < n; ++k) {
            double frac = n == 1 ? 0.0 : -1.0 + 2.0 * k / (n - 1);
            axes[j].push_back(theta_center[j] + frac * spec[j].half_width);
        }
    }
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.size();
    std::vector<std::vector<double>> starts;
    starts.reserve(total);
    std::vector<std::size_t> counter(axes.size(), 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::vector<double> point(axes.size());
        for (std::size_t j = 0; j < axes.size(); ++j) point[j] = axes[j][counter[j]];
        starts.push_back(std::move(point));
        for (std::size_t j = axes.size(); j-- > 0;) {
            if (++counter[j] < axes[j].size()) break;
            counter[j] = 0;
        }
    }
    // Put the unperturbed center first so the start cap always keeps it.
    auto center_it = std::find(starts.begin(), starts.end(), theta_center);
    if (center_it != starts.end()) std::iter_swap(starts.begin(), center_it);
    return starts;
}

FitResult minimize_sos(const FitProblem& problem) {
    const std::size_t n = problem.targets.size();
    if (problem.inputs.size() != n) throw DomainError("minimize_sos: inputs/targets size mismatch");
    if (problem.starts.empty()) throw InsufficientDataError("minimize_sos: no starts");
    const std::size_t p = problem.starts.front().size();
    if (n < p) throw InsufficientDataError("minimize_sos: need at least as many observations as parameters");

    ObjectiveFn objective = [&problem](const std::vector<double>& theta) {
        double sos = 0.0;
        for (std::size_t i = 0; i < problem.targets.size(); ++i) {
            double r = problem.targets[i] - problem.model(theta, problem.inputs[i]);
            sos += r * r;
        }
        return sos;
    };
    FitResult result = run_multistart(objective, problem.bounds, problem.starts, problem.grad_tol,
                                      problem.max_starts, problem.max_iterations);
    double polished_sos = result.sos;
    std::vector<double> polished = gauss_newton_polish(problem, result.theta_hat, polished_sos);
    if (polished_sos <= result.sos) {
        result.theta_hat = std::move(polished);
        result.sos = polished_sos;
    }
    result.diagnostics = fit_diagnostics(result.sos, problem.targets, p);
    return result;
}

std::vector<std::vector<double>> numerical_hessian(const ObjectiveFn& objective,
                                                   const std::vector<double>& theta, double step) {
    const std::size_t p = theta.size();
    auto eval = [&](std::size_t i, double si, std::size_t j, double sj) {
        std::vector<double> x = theta;
        x[i] += si * step;
        x[j] += sj * step;
        double v = objective(x);
        if (!std::isfinite(v))
            throw NumericError("numerical_hessian: objective not finite near evaluation point");
        return v;
    };
    std::vector<std::vector<double>> H(p, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            double v = (eval(i, +1, j, +1) - eval(i, +1, j, -1) - eval(i, -1, j, +1) +
                        eval(i, -1, j, -1)) /
                       (4.0 * step * step);
            H[i][j] = v;
            H[j][i] = v;
        }
    }
    return H;
}

std::vector<ConfidenceInterval> confidence_intervals(const FitResult& result,
                                                     const FitProblem& problem, double level) {
    const std::size_t n = problem.targets.size();
    const std::size_t p = result.theta_hat.size();
    if (n <= p) throw DomainError("confidence_intervals: need n > p");

    ObjectiveFn objective = [&problem](const std::vector<double>& theta) {
        double sos = 0.0;
        for (std::size_t i = 0; i < problem.targets.size(); ++i) {
            double r = problem.targets[i] - problem.model(theta, problem.inputs[i]);
            sos += r * r;
        }
        return sos;
    };

    double sigma2 = result.sos / double(n - p);
    auto H = numerical_hessian(objective, result.theta_hat);
    Mat Hm(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) Hm(i, j) = H[i][j];

    // Gauss-Newton covariance: sigma^2 * (H/2)^-1, which reduces to the
    // textbook sigma^2 (X'X)^-1 for linear models.
    Eigen::FullPivLU<Mat> lu(0.5 * Hm);
    if (!lu.isInvertible())
        throw UncertaintyUnavailableError("confidence_intervals: singular Hessian");
    Mat cov = sigma2 * lu.inverse();

    double t = t_quantile(level, n - p);
    std::vector<ConfidenceInterval> out(p);
    for (std::size_t k = 0; k < p; ++k) {
        double var = std::max(cov(k, k), 0.0);
        double se = std::sqrt(var);
        out[k].estimate = result.theta_hat[k];
        out[k].std_error = se;
        out[k].level = level;
        out[k].low = result.theta_hat[k] - t * se;
        out[k].high = result.theta_hat[k] + t * se;
    }
    return out;
}

double t_quantile(double two_sided_level, std::size_t dof) {
    if (!(two_sided_level > 0.0 && two_sided_level < 1.0))
        throw DomainError("t_quantile: level must be in (0, 1)");
    if (dof < 1) throw DomainError("t_quantile: dof must be >= 1");
    boost::math::students_t dist(static_cast<double>(dof));
    // Two-sided: P(|T| <= t) = level  =>  P(T <= t) = (1 + level) / 2.
    return boost::math::quantile(dist, 0.5 * (1.0 + two_sided_level));
}

FitDiagnostics fit_diagnostics(double sos, const std::vector<double>& targets, std::size_t p) {
    FitDiagnostics d;
    d.n = targets.size();
    d.p = p;
    d.rmse = d.n > 0 ? std::sqrt(sos / double(d.n)) : 0.0;
    double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / double(d.n);
    double tss = 0.0;
    for (double y : targets) tss += (y - mean) * (y - mean);
    d.r2 = tss > 0.0 ? 1.0 - sos / tss : 1.0;
    d.adj_r2 = d.n > p ? 1.0 - (1.0 - d.r2) * double(d.n - 1) / double(d.n - p) : d.r2;
    return d;
}

}  // namespace tokescale

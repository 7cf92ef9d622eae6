#include "tokescale/isoflop.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <Eigen/Dense>

#include "tokescale/errors.hpp"

namespace tokescale {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Standardizer {
    double mean = 0.0;
    double scale = 1.0;
    double to_z(double x) const { return (x - mean) / scale; }
};

Standardizer standardize(const std::vector<double>& xs) {
    Standardizer s;
    for (double x : xs) s.mean += x;
    s.mean /= double(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - s.mean) * (x - s.mean);
    var /= double(xs.size());
    s.scale = var > 0.0 ? std::sqrt(var) : 1.0;
    return s;
}

double fit_rmse(const Vec& residuals) { return std::sqrt(residuals.squaredNorm() / residuals.size()); }

}  // namespace

Isoflop2D fit_parabola(const std::vector<BytesLoss>& points, double budget, double compression) {
    std::set<double> distinct;
    for (const auto& p : points) {
        if (!(p.bytes > 0.0)) throw DomainError("fit_parabola: bytes must be positive");
        distinct.insert(p.bytes);
    }
    if (distinct.size() < 3)
        throw InsufficientDataError("fit_parabola: need >= 3 points with distinct bytes, got " +
                                    std::to_string(distinct.size()));

    const std::size_t n = points.size();
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = std::log(points[i].bytes);
    Standardizer sx = standardize(xs);

    // Least squares on the standardized variable keeps the normal equations
    // well conditioned; coefficients are mapped back analytically.
    Mat X(n, 3);
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double z = sx.to_z(xs[i]);
        X(i, 0) = 1.0;
        X(i, 1) = z;
        X(i, 2) = z * z;
        y[i] = points[i].loss;
    }
    Vec beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);

    // loss = q0 + q1 z + q2 z^2, z = (x - mu) / s.
    double q0 = beta[0], q1 = beta[1], q2 = beta[2];
    double s = sx.scale, mu = sx.mean;
    Isoflop2D fit;
    fit.budget = budget;
    fit.compression = compression;
    fit.a = q2 / (s * s);
    fit.b = q1 / s - 2.0 * q2 * mu / (s * s);
    fit.c = q0 - q1 * mu / s + q2 * mu * mu / (s * s);
    if (!(fit.a > 0.0))
        throw NonConvexFitError("fit_parabola: non-convex fit (a = " + std::to_string(fit.a) +
                                    ") at budget " + std::to_string(budget),
                                fit.a);
    fit.opt_log_bytes = -fit.b / (2.0 * fit.a);
    fit.opt_bytes = std::exp(fit.opt_log_bytes);
    fit.opt_loss = fit.c - fit.b * fit.b / (4.0 * fit.a);
    fit.n_points = n;
    fit.rmse = fit_rmse(y - X * beta);
    auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    fit.vertex_outside_span = fit.opt_log_bytes < *lo || fit.opt_log_bytes > *hi;
    return fit;
}

Interpolated interpolate_params(double target_bytes, std::vector<BytesParams> grid) {
    if (grid.size() < 2)
        throw InsufficientDataError("interpolate_params: need a grid of >= 2 (bytes, params) points");
    if (!(target_bytes > 0.0)) throw DomainError("interpolate_params: target bytes must be positive");
    std::sort(grid.begin(), grid.end(),
              [](const BytesParams& a, const BytesParams& b) { return a.bytes < b.bytes; });
    for (const auto& g : grid)
        if (!(g.bytes > 0.0) || !(g.params > 0.0))
            throw DomainError("interpolate_params: grid values must be positive");

    double x = std::log(target_bytes);
    Interpolated out;
    out.extrapolated = target_bytes < grid.front().bytes || target_bytes > grid.back().bytes;

    std::size_t hi = 1;
    while (hi + 1 < grid.size() && std::log(grid[hi].bytes) < x) ++hi;
    std::size_t lo = hi - 1;

    double x0 = std::log(grid[lo].bytes), x1 = std::log(grid[hi].bytes);
    double y0 = std::log(grid[lo].params), y1 = std::log(grid[hi].params);
    if (x1 == x0) throw DomainError("interpolate_params: duplicate bytes in grid");
    double t = (x - x0) / (x1 - x0);
    out.params = std::exp(y0 + t * (y1 - y0));
    return out;
}

double Isoflop3D::evaluate(double compression, double bytes_per_param) const {
    double u = std::log(compression);
    double v = std::log(bytes_per_param);
    return coeffs[0] + coeffs[1] * u + coeffs[2] * v + coeffs[3] * u * u + coeffs[4] * u * v +
           coeffs[5] * v * v;
}

Isoflop3D fit_paraboloid(const std::vector<CompressionBppLoss>& points, double budget) {
    std::set<double> distinct_t, distinct_rho;
    for (const auto& p : points) {
        if (!(p.compression > 0.0) || !(p.bytes_per_param > 0.0))
            throw DomainError("fit_paraboloid: compression and bytes-per-param must be positive");
        distinct_t.insert(p.compression);
        distinct_rho.insert(p.bytes_per_param);
    }
    if (points.size() < 6 || distinct_t.size() < 2 || distinct_rho.size() < 3)
        throw InsufficientDataError(
            "fit_paraboloid: need >= 6 points spanning >= 2 compressions and >= 3 bytes-per-param values");

    const std::size_t n = points.size();
    std::vector<double> us(n), vs(n);
    for (std::size_t i = 0; i < n; ++i) {
        us[i] = std::log(points[i].compression);
        vs[i] = std::log(points[i].bytes_per_param);
    }
    Standardizer su = standardize(us), sv = standardize(vs);

    Mat X(n, 6);
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double zu = su.to_z(us[i]), zv = sv.to_z(vs[i]);
        X(i, 0) = 1.0;
        X(i, 1) = zu;
        X(i, 2) = zv;
        X(i, 3) = zu * zu;
        X(i, 4) = zu * zv;
        X(i, 5) = zv * zv;
        y[i] = points[i].loss;
    }
    Eigen::ColPivHouseholderQR<Mat> qr(X);
    if (qr.rank() < 6)
        throw InsufficientDataError("fit_paraboloid: rank-deficient design (degenerate grid)");
    Vec q = qr.solve(y);

    // Map standardized coefficients back to (u, v).
    double au = 1.0 / su.scale, bu = -su.mean / su.scale;
    double av = 1.0 / sv.scale, bv = -sv.mean / sv.scale;
    Isoflop3D fit;
    fit.budget = budget;
    fit.coeffs[0] = q[0] + q[1] * bu + q[2] * bv + q[3] * bu * bu + q[4] * bu * bv + q[5] * bv * bv;
    fit.coeffs[1] = q[1] * au + 2.0 * q[3] * au * bu + q[4] * au * bv;
    fit.coeffs[2] = q[2] * av + 2.0 * q[5] * av * bv + q[4] * av * bu;
    fit.coeffs[3] = q[3] * au * au;
    fit.coeffs[4] = q[4] * au * av;
    fit.coeffs[5] = q[5] * av * av;

    // Stationary point of the quadratic form.
    double h11 = 2.0 * fit.coeffs[3], h22 = 2.0 * fit.coeffs[5], h12 = fit.coeffs[4];
    double det = h11 * h22 - h12 * h12;
    double trace = h11 + h22;
    double disc = std::sqrt(std::max(0.0, 0.25 * trace * trace - det));
    double eig_lo = 0.5 * trace - disc, eig_hi = 0.5 * trace + disc;
    if (det == 0.0)
        throw SaddleFitError("fit_paraboloid: degenerate quadratic form", eig_lo, eig_hi);
    if (!(eig_lo > 0.0))
        throw SaddleFitError("fit_paraboloid: quadratic form is not positive definite (eigenvalues " +
                                 std::to_string(eig_lo) + ", " + std::to_string(eig_hi) + ")",
                             eig_lo, eig_hi);
    double u_star = (-fit.coeffs[1] * h22 + fit.coeffs[2] * h12) / det;
    double v_star = (-fit.coeffs[2] * h11 + fit.coeffs[1] * h12) / det;
    fit.hessian_pd = true;
    fit.opt_compression = std::exp(u_star);
    fit.opt_bpp = std::exp(v_star);
    fit.opt_loss = fit.evaluate(fit.opt_compression, fit.opt_bpp);
    fit.n_points = n;
    fit.rmse = fit_rmse(y - X * q);
    return fit;
}

std::vector<Isoflop2D> fit_cells(const std::vector<RunRecord>& records) {
    std::map<std::pair<double, double>, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < records.size(); ++i)
        cells[{records[i].budget_flops, records[i].compression}].push_back(i);

    std::vector<Isoflop2D> fits;
    fits.reserve(cells.size());
    for (const auto& [key, idx] : cells) {
        std::vector<BytesLoss> pts;
        std::vector<BytesParams> grid;
        pts.reserve(idx.size());
        for (std::size_t i : idx) {
            pts.push_back({records[i].bytes, records[i].loss_bpb});
            grid.push_back({records[i].bytes, records[i].latent_params});
        }
        Isoflop2D fit = fit_parabola(pts, key.first, key.second);
        fit.language = records[idx.front()].language;
        if (grid.size() >= 2) {
            Interpolated interp = interpolate_params(fit.opt_bytes, grid);
            fit.opt_params = interp.params;
            fit.opt_bpp = fit.opt_bytes / interp.params;
        }
        fits.push_back(fit);
    }
    return fits;
}

std::vector<Isoflop3D> fit_surfaces(const std::vector<RunRecord>& records) {
    std::map<double, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < records.size(); ++i) groups[records[i].budget_flops].push_back(i);

    std::vector<Isoflop3D> fits;
    fits.reserve(groups.size());
    for (const auto& [budget, idx] : groups) {
        std::vector<CompressionBppLoss> pts;
        pts.reserve(idx.size());
        for (std::size_t i : idx)
            pts.push_back({records[i].compression, records[i].bytes / records[i].latent_params,
                           records[i].loss_bpb});
        Isoflop3D fit = fit_paraboloid(pts, budget);
        fit.language = records[idx.front()].language;
        fits.push_back(fit);
    }
    return fits;
}

}  // namespace tokescale

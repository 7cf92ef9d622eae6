#include <doctest.h>

#include <cmath>
#include <random>

#include "tokescale/errors.hpp"
#include "tokescale/isoflop.hpp"

using namespace tokescale;

namespace {

std::vector<BytesLoss> parabola_points(double a, double vertex_x, double min_loss,
                                       std::initializer_list<double> offsets) {
    std::vector<BytesLoss> pts;
    for (double off : offsets) {
        double x = vertex_x + off;
        pts.push_back({std::exp(x), min_loss + a * off * off});
    }
    return pts;
}

}  // namespace

TEST_CASE("fit_parabola recovers a known vertex to machine precision") {
    auto pts = parabola_points(1.0, 25.0, 0.9, {-1.5, -0.8, 0.0, 0.6, 1.2});
    Isoflop2D fit = fit_parabola(pts, 1e20, 4.0);
    CHECK(fit.opt_log_bytes == doctest::Approx(25.0).epsilon(1e-10));
    CHECK(fit.opt_bytes == doctest::Approx(std::exp(25.0)).epsilon(1e-9));
    CHECK(fit.opt_loss == doctest::Approx(0.9).epsilon(1e-10));
    CHECK(fit.a == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.rmse < 1e-10);
    CHECK_FALSE(fit.vertex_outside_span);
}

TEST_CASE("fit_parabola error paths") {
    CHECK_THROWS_AS(fit_parabola({{1e10, 1.0}, {2e10, 0.9}}, 1e20, 4.0), InsufficientDataError);
    // Concave data.
    auto pts = parabola_points(-0.5, 24.0, 1.2, {-1.0, 0.0, 1.0, 0.5});
    CHECK_THROWS_AS(fit_parabola(pts, 1e20, 4.0), NonConvexFitError);
    try {
        fit_parabola(pts, 1e20, 4.0);
    } catch (const NonConvexFitError& e) {
        CHECK(e.curvature() < 0.0);
    }
}

TEST_CASE("fit_parabola flags a vertex outside the data span") {
    auto pts = parabola_points(0.05, 25.0, 0.9, {1.0, 1.5, 2.0, 2.5});
    Isoflop2D fit = fit_parabola(pts, 1e20, 4.0);
    CHECK(fit.vertex_outside_span);
    CHECK(fit.opt_log_bytes == doctest::Approx(25.0).epsilon(1e-6));
}

TEST_CASE("fit_parabola is invariant to rescaling the byte unit") {
    auto pts = parabola_points(0.08, 24.5, 0.95, {-1.2, -0.4, 0.3, 1.0, 1.4});
    Isoflop2D in_bytes = fit_parabola(pts, 1e20, 4.0);
    std::vector<BytesLoss> in_gb;
    for (auto p : pts) in_gb.push_back({p.bytes / 1e9, p.loss});
    Isoflop2D scaled = fit_parabola(in_gb, 1e20, 4.0);
    CHECK(scaled.a == doctest::Approx(in_bytes.a).epsilon(1e-9));
    CHECK(scaled.opt_bytes * 1e9 == doctest::Approx(in_bytes.opt_bytes).epsilon(1e-9));
    CHECK(scaled.opt_loss == doctest::Approx(in_bytes.opt_loss).epsilon(1e-9));
}

TEST_CASE("rmse is nonincreasing when adding an exactly fitting point") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> noise(0.0, 0.01);
    for (int trial = 0; trial < 20; ++trial) {
        auto pts = parabola_points(0.1, 24.0, 1.0, {-1.5, -0.75, 0.0, 0.75, 1.5});
        for (auto& p : pts) p.loss += noise(rng);
        Isoflop2D fit = fit_parabola(pts, 1e20, 4.0);
        double x_new = 24.0 + 0.4;
        double on_curve = fit.a * x_new * x_new + fit.b * x_new + fit.c;
        pts.push_back({std::exp(x_new), on_curve});
        Isoflop2D refit = fit_parabola(pts, 1e20, 4.0);
        CHECK(refit.rmse <= fit.rmse + 1e-12);
    }
}

TEST_CASE("interpolate_params") {
    std::vector<BytesParams> grid = {{5e10, 1e9}, {1e11, 2e9}};
    SUBCASE("log-linear midpoint") {
        double target = std::sqrt(5e10 * 1e11);  // geometric mean
        auto got = interpolate_params(target, grid);
        CHECK(got.params == doctest::Approx(std::sqrt(2.0) * 1e9).epsilon(1e-12));
        CHECK_FALSE(got.extrapolated);
    }
    SUBCASE("grid point returns exactly") {
        auto got = interpolate_params(1e11, grid);
        CHECK(got.params == doctest::Approx(2e9).epsilon(1e-14));
    }
    SUBCASE("extrapolation continues the end segment and flags") {
        // Recomputed by hand: slope = ln2 / ln2 = 1 in log space, so the
        // continuation doubles N again at 2e11.
        auto got = interpolate_params(2e11, grid);
        CHECK(got.extrapolated);
        CHECK(got.params == doctest::Approx(4e9).epsilon(1e-10));
        auto low = interpolate_params(2.5e10, grid);
        CHECK(low.extrapolated);
        CHECK(low.params == doctest::Approx(0.5e9).epsilon(1e-10));
    }
    SUBCASE("singleton grid is an error") {
        CHECK_THROWS_AS(interpolate_params(1e10, {{1e10, 1e9}}), InsufficientDataError);
        CHECK_THROWS_AS(interpolate_params(1e10, {}), InsufficientDataError);
    }
}

TEST_CASE("fit_paraboloid recovers a synthetic quadratic minimum exactly") {
    // q(u, v) with minimum at T = 4, rho = 60.
    double u0 = std::log(4.0), v0 = std::log(60.0);
    std::vector<CompressionBppLoss> pts;
    for (double t : {1.0, 2.0, 4.0, 8.0, 12.0})
        for (double rho : {20.0, 40.0, 60.0, 90.0, 140.0}) {
            double u = std::log(t) - u0, v = std::log(rho) - v0;
            double loss = 0.95 + 0.04 * u * u + 0.01 * u * v + 0.06 * v * v;
            pts.push_back({t, rho, loss});
        }
    Isoflop3D fit = fit_paraboloid(pts, 1e20);
    CHECK(fit.opt_compression == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(fit.opt_bpp == doctest::Approx(60.0).epsilon(1e-9));
    CHECK(fit.opt_loss == doctest::Approx(0.95).epsilon(1e-9));
    CHECK(fit.hessian_pd);
    CHECK(fit.rmse < 1e-10);

    // Stationarity of the reported minimizer.
    double u = std::log(fit.opt_compression), v = std::log(fit.opt_bpp);
    double du = fit.coeffs[1] + 2.0 * fit.coeffs[3] * u + fit.coeffs[4] * v;
    double dv = fit.coeffs[2] + fit.coeffs[4] * u + 2.0 * fit.coeffs[5] * v;
    CHECK(std::abs(du) < 1e-10);
    CHECK(std::abs(dv) < 1e-10);

    // Positive-definite form.
    double h11 = 2.0 * fit.coeffs[3], h22 = 2.0 * fit.coeffs[5], h12 = fit.coeffs[4];
    CHECK(h11 > 0.0);
    CHECK(h11 * h22 - h12 * h12 > 0.0);
}

TEST_CASE("fit_paraboloid error paths") {
    SUBCASE("saddle carries eigenvalue signs") {
        std::vector<CompressionBppLoss> pts;
        for (double t : {1.0, 2.0, 4.0, 8.0})
            for (double rho : {20.0, 60.0, 140.0}) {
                double u = std::log(t), v = std::log(rho);
                pts.push_back({t, rho, 1.0 + 0.1 * u * u - 0.1 * v * v});
            }
        CHECK_THROWS_AS(fit_paraboloid(pts, 1e20), SaddleFitError);
        try {
            fit_paraboloid(pts, 1e20);
        } catch (const SaddleFitError& e) {
            CHECK(e.eig_lo() < 0.0);
            CHECK(e.eig_hi() > 0.0);
        }
    }
    SUBCASE("insufficient span") {
        std::vector<CompressionBppLoss> pts;
        for (double rho : {20.0, 40.0, 60.0, 80.0, 100.0, 120.0}) pts.push_back({4.0, rho, 1.0});
        CHECK_THROWS_AS(fit_paraboloid(pts, 1e20), InsufficientDataError);
    }
    SUBCASE("rank-deficient design") {
        // Two T values cannot identify the u^2 coefficient alongside u.
        std::vector<CompressionBppLoss> pts;
        for (double t : {2.0, 8.0})
            for (double rho : {20.0, 40.0, 60.0, 90.0})
                pts.push_back({t, rho, 1.0 + 0.01 * std::log(rho)});
        CHECK_THROWS_AS(fit_paraboloid(pts, 1e20), InsufficientDataError);
    }
}

TEST_CASE("fit_cells groups records and interpolates optimum parameters") {
    // Exact construction: N = C T / (6 B) so ln N is linear in ln B and the
    // interpolated N* matches the Eq.-2 value at B*.
    std::vector<RunRecord> records;
    double budget = 1e20, compression = 4.0;
    double opt_log_bytes = std::log(6.7e10);
    for (double off : {-1.2, -0.6, 0.0, 0.6, 1.2}) {
        RunRecord r;
        r.budget_flops = budget;
        r.compression = compression;
        r.bytes = std::exp(opt_log_bytes + off);
        r.latent_params = budget * compression / (6.0 * r.bytes);
        r.loss_bpb = 0.96 + 0.05 * off * off;
        records.push_back(r);
    }
    auto fits = fit_cells(records);
    REQUIRE(fits.size() == 1);
    const auto& f = fits[0];
    CHECK(f.budget == budget);
    CHECK(f.compression == compression);
    CHECK(f.opt_bytes == doctest::Approx(6.7e10).epsilon(1e-9));
    double expected_n = budget * compression / (6.0 * 6.7e10);
    CHECK(f.opt_params == doctest::Approx(expected_n).epsilon(1e-9));
    CHECK(f.opt_bpp == doctest::Approx(6.7e10 / expected_n).epsilon(1e-9));
}

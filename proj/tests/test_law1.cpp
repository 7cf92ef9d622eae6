#include <doctest.h>

#include <cmath>
#include <random>

#include "table_data.hpp"
#include "tokescale/errors.hpp"
#include "tokescale/isoflop.hpp"
#include "tokescale/law1.hpp"
#include "tokescale/synth.hpp"

using namespace tokescale;
namespace td = tokescale::testdata;

namespace {

const std::vector<double> kBudgets = {5e18, 1e19, 5e19, 1e20, 1e21, 2e21};
const std::vector<double> kCompressions = {1, 2, 4, 6, 8, 12};

std::vector<OptimumPoint> noiseless_optima(const TruthSpec& spec) {
    std::vector<OptimumPoint> optima;
    for (double c : kBudgets)
        for (double t : kCompressions) optima.push_back({c, t, truth_bytes(spec, c, t)});
    return optima;
}

LawOneParams quick_fit(const std::vector<OptimumPoint>& optima, std::size_t starts = 125) {
    LawOneOptions options;
    options.grid_values = 5;
    options.max_starts = starts;
    options.with_intervals = false;
    return fit_law1(optima, options);
}

TruthSpec latent_truth() {
    TruthSpec spec;
    spec.b0 = td::kLatentB0;
    spec.alpha = td::kLatentAlpha;
    spec.beta = td::kLatentBeta;
    return spec;
}

}  // namespace

TEST_CASE("noiseless optima from the published constants are recovered exactly") {
    LawOneParams fit = quick_fit(noiseless_optima(latent_truth()));
    CHECK(fit.alpha == doctest::Approx(td::kLatentAlpha).epsilon(1e-8));
    CHECK(fit.beta == doctest::Approx(td::kLatentBeta).epsilon(1e-8));
    CHECK(fit.b0 == doctest::Approx(td::kLatentB0).epsilon(1e-7));
    CHECK(fit.n0 == doctest::Approx(1.0 / (6.0 * td::kLatentB0)).epsilon(1e-7));
}

TEST_CASE("insufficient variation is rejected") {
    TruthSpec spec = latent_truth();
    std::vector<OptimumPoint> one_budget;
    for (double t : kCompressions) one_budget.push_back({1e20, t, truth_bytes(spec, 1e20, t)});
    CHECK_THROWS_AS(fit_law1(one_budget), InsufficientVariationError);
    std::vector<OptimumPoint> one_compression;
    for (double c : kBudgets) one_compression.push_back({c, 4.0, truth_bytes(spec, c, 4.0)});
    CHECK_THROWS_AS(fit_law1(one_compression), InsufficientVariationError);
}

TEST_CASE("predictions from the published latent constants") {
    LawOneParams params;
    params.b0 = td::kLatentB0;
    params.alpha = td::kLatentAlpha;
    params.beta = td::kLatentBeta;
    params.n0 = 1.0 / (6.0 * params.b0);

    SUBCASE("optimal data at C=1e20, T=4") {
        // 17.5 * (1e20)^0.465 * 4^0.471
        double expected = 17.5 * std::pow(1e20, 0.465) * std::pow(4.0, 0.471);
        CHECK(predict_data(params, 1e20, 4.0) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(expected == doctest::Approx(6.7e10).epsilon(0.02));
    }
    SUBCASE("T=1 collapses the compression term") {
        CHECK(predict_data(params, 1e20, 1.0) ==
              doctest::Approx(params.b0 * std::pow(1e20, params.alpha)).epsilon(1e-14));
    }
    SUBCASE("doubling T multiplies B* by 2^beta") {
        double ratio = predict_data(params, 1e20, 8.0) / predict_data(params, 1e20, 4.0);
        CHECK(ratio == doctest::Approx(std::pow(2.0, 0.471)).epsilon(1e-12));
        CHECK(ratio == doctest::Approx(1.386).epsilon(1e-3));
    }
    SUBCASE("optimal params at C=1e20, T=4 near 1e9") {
        CHECK(predict_params(params, 1e20, 4.0) == doctest::Approx(9.9e8).epsilon(0.02));
    }
    SUBCASE("derived N0 matches the published rounding") {
        CHECK(params.n0 == doctest::Approx(9.52e-3).epsilon(1e-3));
        CHECK(params.n0 == doctest::Approx(td::kLatentN0).epsilon(0.01));
    }
    SUBCASE("optimal bytes-per-parameter at C=1e20, T=4") {
        double rho = predict_bpp(params, 1e20, 4.0);
        CHECK(std::abs(rho - 68.0) <= 2.0);
    }
}

TEST_CASE("Eq.-2 closure and ratio identity for 1000 random points") {
    LawOneParams params;
    params.b0 = td::kLatentB0;
    params.alpha = td::kLatentAlpha;
    params.beta = td::kLatentBeta;
    params.n0 = 1.0 / (6.0 * params.b0);
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        double c = std::pow(10.0, 18.0 + 4.0 * u(rng));
        double t = 1.0 + 11.0 * u(rng);
        double b = predict_data(params, c, t);
        double n = predict_params(params, c, t);
        CHECK(6.0 * n * b / t == doctest::Approx(c).epsilon(1e-12));
        CHECK(predict_bpp(params, c, t) == doctest::Approx(b / n).epsilon(1e-12));
    }
}

TEST_CASE("alpha = beta = 1/2 makes rho* constant") {
    LawOneParams params;
    params.b0 = 10.0;
    params.alpha = 0.5;
    params.beta = 0.5;
    params.n0 = 1.0 / 60.0;
    double base = predict_bpp(params, 1e19, 2.0);
    CHECK(predict_bpp(params, 1e21, 2.0) == doctest::Approx(base).epsilon(1e-12));
    CHECK(predict_bpp(params, 1e19, 12.0) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("beta = 1 makes the optimal token count independent of T") {
    TruthSpec spec = latent_truth();
    spec.beta = 1.0;
    LawOneParams fit = quick_fit(noiseless_optima(spec));
    CHECK(fit.beta == doctest::Approx(1.0).epsilon(1e-8));
    double d1 = predict_data(fit, 1e20, 2.0) / 2.0;
    double d2 = predict_data(fit, 1e20, 8.0) / 8.0;
    CHECK(d1 == doctest::Approx(d2).epsilon(1e-9));
}

TEST_CASE("fit is equivariant under a unit change of C") {
    TruthSpec spec = latent_truth();
    auto optima = noiseless_optima(spec);
    LawOneParams base = quick_fit(optima);
    std::vector<OptimumPoint> scaled = optima;
    for (auto& o : scaled) o.budget *= 1e3;
    LawOneParams shifted = quick_fit(scaled);
    CHECK(shifted.alpha == doctest::Approx(base.alpha).epsilon(1e-9));
    CHECK(shifted.beta == doctest::Approx(base.beta).epsilon(1e-9));
    // B0 absorbs the unit change: B0' = B0 / k^alpha.
    CHECK(shifted.b0 == doctest::Approx(base.b0 / std::pow(1e3, base.alpha)).epsilon(1e-6));
}

TEST_CASE("pipeline recovery through IsoFLOP extraction") {
    TruthSpec spec = latent_truth();
    SUBCASE("noiseless grid recovers exponents to 1e-6") {
        auto records = generate_grid(spec, kBudgets, kCompressions, 7);
        auto cells = fit_cells(records);
        std::vector<OptimumPoint> optima;
        for (const auto& f : cells) optima.push_back({f.budget, f.compression, f.opt_bytes});
        LawOneParams fit = quick_fit(optima);
        CHECK(std::abs(fit.alpha - spec.alpha) < 1e-6);
        CHECK(std::abs(fit.beta - spec.beta) < 1e-6);
    }
    SUBCASE("1% multiplicative loss noise keeps exponents within 0.02") {
        spec.noise_sigma = 0.01;
        spec.seed = 7;
        auto records = generate_grid(spec, kBudgets, kCompressions, 7);
        auto cells = fit_cells(records);
        std::vector<OptimumPoint> optima;
        for (const auto& f : cells) optima.push_back({f.budget, f.compression, f.opt_bytes});
        LawOneParams fit = quick_fit(optima);
        CHECK(std::abs(fit.alpha - spec.alpha) < 0.02);
        CHECK(std::abs(fit.beta - spec.beta) < 0.02);
    }
}

TEST_CASE("confidence intervals cover the truth on noisy optima") {
    TruthSpec spec = latent_truth();
    spec.noise_sigma = 0.005;
    spec.seed = 21;
    auto records = generate_grid(spec, kBudgets, kCompressions, 7);
    auto cells = fit_cells(records);
    std::vector<OptimumPoint> optima;
    for (const auto& f : cells) optima.push_back({f.budget, f.compression, f.opt_bytes});
    LawOneOptions options;
    options.grid_values = 5;
    options.max_starts = 125;
    LawOneParams fit = fit_law1(optima, options);
    REQUIRE(fit.intervals.size() == 3);
    // Internal parameterization: (ln B0, alpha, beta).
    CHECK(fit.intervals[1].low <= spec.alpha);
    CHECK(fit.intervals[1].high >= spec.alpha);
    CHECK(fit.intervals[2].low <= spec.beta);
    CHECK(fit.intervals[2].high >= spec.beta);
    for (const auto& ci : fit.intervals) {
        CHECK(ci.low <= ci.estimate);
        CHECK(ci.estimate <= ci.high);
        CHECK(ci.high - ci.estimate == doctest::Approx(ci.estimate - ci.low).epsilon(1e-9));
    }
}

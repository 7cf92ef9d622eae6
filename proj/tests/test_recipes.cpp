#include <doctest.h>

#include <cmath>
#include <random>

#include "table_data.hpp"
#include "tokescale/errors.hpp"
#include "tokescale/recipes.hpp"

using namespace tokescale;
namespace td = tokescale::testdata;

namespace {

// Oracle: per-layer parameter enumeration instead of the closed form.
double global_params_by_enumeration(int scale) {
    double d = 128.0 * scale;
    double total = 0.0;
    for (int layer = 0; layer < scale; ++layer) {
        total += 4.0 * d * d;  // Q, K, V, O
        total += 2.0 * d * (4.0 * d);  // feed-forward up + down
    }
    return total;
}

bool matches_table(double computed, double table, double ulp, double rel) {
    return std::abs(computed - table) <= std::max(rel * table, 0.5 * ulp);
}

}  // namespace

TEST_CASE("latent recipe shapes match the published scale table") {
    for (const auto& row : td::kLatentScales) {
        ArchRecipe r = latent_recipe(row.scale);
        CAPTURE(row.scale);
        CHECK(r.global_layers == row.scale);
        CHECK(r.global_heads == row.scale);
        CHECK(r.global_dim == 128 * row.scale);
        CHECK(r.local_layers == row.local_layers);
        CHECK(r.local_heads == row.local_heads);
        CHECK(r.local_dim == row.local_dim);
        CHECK(r.crossattn_k == row.cross_k);
        CHECK(r.local_dim == 64 * r.local_heads);
    }
    CHECK_THROWS_AS(latent_recipe(0), DomainError);
    CHECK_THROWS_AS(latent_recipe(65), DomainError);
}

TEST_CASE("count_global_params is 196608 s^3, monotone, and matches enumeration") {
    CHECK(count_global_params(1) == 196608.0);
    CHECK(count_global_params(5) == doctest::Approx(24.576e6));
    CHECK(count_global_params(32) == doctest::Approx(6.442450944e9));
    double prev = 0.0;
    for (int s = 1; s <= 64; ++s) {
        double v = count_global_params(s);
        CHECK(v == doctest::Approx(global_params_by_enumeration(s)).epsilon(1e-12));
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("global and local parameter counts round to the published table") {
    for (const auto& row : td::kLatentScales) {
        CAPTURE(row.scale);
        ArchRecipe r = latent_recipe(row.scale);
        CHECK(matches_table(r.params_global, row.global_params, row.global_ulp, 0.02));
        // Local column is per module; the recipe stores both modules.
        double per_module = 0.5 * r.params_local;
        CHECK(matches_table(per_module, row.local_params, row.local_ulp, 0.05));
        CHECK(matches_table(r.params_total, row.total_params, row.total_ulp, 0.05));
        CHECK(r.params_total ==
              doctest::Approx(r.params_global + r.params_local + r.params_cross));
    }
}

TEST_CASE("subword embedding counts match the published table") {
    for (const auto& row : td::kSubwordEmbeddings) {
        CAPTURE(row.scale);
        CHECK(matches_table(subword_recipe(row.scale, td::kCharVocab).params_local,
                            row.char_params, 1e6, 0.03));
        CHECK(matches_table(subword_recipe(row.scale, td::kBpeVocab).params_local,
                            row.bpe_params, 1e6, 0.03));
        CHECK(matches_table(subword_recipe(row.scale, td::kSuperVocab).params_local,
                            row.super_params, 1e6, 0.03));
    }
    CHECK(subword_recipe(1, 2).params_local == 256.0);  // 2 x 128
    CHECK_THROWS_AS(subword_recipe(5, 1), DomainError);
}

TEST_CASE("zero-layer local module leaves only the byte embeddings") {
    ArchRecipe r = latent_recipe(5);
    r.local_layers = 0;
    r = count_params(r);
    CHECK(r.params_local == doctest::Approx(2.0 * 256.0 * r.local_dim));
}

TEST_CASE("approx_compute and bytes_for_budget") {
    CHECK(approx_compute(1e9, 6e10, 4.0) == doctest::Approx(9e19).epsilon(1e-12));
    CHECK(approx_compute(2e8, 3e9, 1.0) == doctest::Approx(6.0 * 2e8 * 3e9).epsilon(1e-12));
    CHECK(approx_compute(1.97e8, 4.74e10, 4.0) == doctest::Approx(1.40e19).epsilon(1e-2));
    CHECK_THROWS_AS(approx_compute(1e9, 1e10, 0.0), DomainError);

    auto a = bytes_for_budget(1e20, 1e9, 4.0);
    CHECK(a.bytes == doctest::Approx(6.6667e10).epsilon(1e-4));
    CHECK(a.bytes_per_param == doctest::Approx(66.667).epsilon(1e-4));
    auto doubled = bytes_for_budget(1e20, 1e9, 8.0);
    CHECK(doubled.bytes == doctest::Approx(2.0 * a.bytes).epsilon(1e-12));
    auto unit = bytes_for_budget(6e18, 1e9, 1.0);
    CHECK(unit.bytes == doctest::Approx(1e9).epsilon(1e-12));
    CHECK(unit.bytes_per_param == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bytes_for_budget then approx_compute is the identity on C") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        double c = std::pow(10.0, 17.0 + 5.0 * u(rng));
        double n = std::pow(10.0, 7.0 + 3.0 * u(rng));
        double t = 1.0 + 11.0 * u(rng);
        double b = bytes_for_budget(c, n, t).bytes;
        CHECK(approx_compute(n, b, t) == doctest::Approx(c).epsilon(1e-12));
    }
}

TEST_CASE("compute share reproduces the published cells within 8 points") {
    for (const auto& cell : td::kLatentShareCells) {
        CAPTURE(cell.scale);
        CAPTURE(cell.compression);
        FlopsBreakdown b = inference_flops_per_byte(latent_recipe(cell.scale), cell.compression);
        CHECK(std::abs(100.0 * b.global_share - cell.share_percent) <= 8.0);
    }
    for (const auto& cell : td::kSubwordShareCells) {
        CAPTURE(cell.scale);
        CAPTURE(cell.compression);
        FlopsBreakdown b =
            inference_flops_per_byte(subword_recipe(cell.scale, cell.vocab), cell.compression);
        CHECK(std::abs(100.0 * b.global_share - cell.share_percent) <= 8.0);
    }
}

TEST_CASE("global share monotone: decreasing in T, increasing in s") {
    // Latent family: strictly decreasing in T at every scale.
    const double ts[] = {1, 2, 4, 6, 8, 12};
    for (int s = 1; s <= 32; ++s) {
        ArchRecipe r = latent_recipe(s);
        double prev = 2.0;
        for (double t : ts) {
            double share = inference_flops_per_byte(r, t).global_share;
            CHECK(share < prev);
            prev = share;
        }
    }
    // Subword family at fixed vocabulary: strictly increasing in s.
    for (double t : {1.01, 4.57, 6.16}) {
        double prev = 0.0;
        for (int s = 1; s <= 32; ++s) {
            double share = inference_flops_per_byte(subword_recipe(s, 128000), t).global_share;
            CHECK(share > prev);
            prev = share;
        }
    }
    // Latent family: increasing in s while the local shape is unchanged.
    for (double t : ts) {
        for (int s = 1; s < 32; ++s) {
            ArchRecipe lo = latent_recipe(s), hi = latent_recipe(s + 1);
            if (lo.local_layers != hi.local_layers || lo.local_dim != hi.local_dim) continue;
            CHECK(inference_flops_per_byte(hi, t).global_share >
                  inference_flops_per_byte(lo, t).global_share);
        }
    }
}

TEST_CASE("attention off: global share vanishes as T grows") {
    ArchRecipe r = latent_recipe(5);
    double share_64 = inference_flops_per_byte(r, 64.0, kDefaultContextBytes, false).global_share;
    double share_512 = inference_flops_per_byte(r, 512.0, kDefaultContextBytes, false).global_share;
    CHECK(share_512 < share_64);
    CHECK(share_512 < 0.01);
    FlopsBreakdown b = inference_flops_per_byte(r, 4096.0, kDefaultContextBytes, false);
    CHECK(b.global_per_byte < 1e5);
}

TEST_CASE("training flops reduce to the Eq.-2 approximation and scale in B") {
    ArchRecipe r = latent_recipe(5);
    SUBCASE("local modules zeroed, attention off") {
        ArchRecipe bare = r;
        bare.local_layers = 0;
        bare.local_dim = 0;
        bare.local_heads = 0;
        bare.crossattn_k = 0;
        bare = count_params(bare);
        double got = training_flops(bare, 1e10, 4.0, kDefaultContextBytes, false);
        CHECK(got == doctest::Approx(approx_compute(bare.params_global, 1e10, 4.0)).epsilon(1e-12));
    }
    SUBCASE("linear in bytes") {
        double one = training_flops(r, 1e10, 4.0);
        double two = training_flops(r, 2e10, 4.0);
        CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-12));
    }
    SUBCASE("consistent with the per-byte breakdown") {
        FlopsBreakdown b = inference_flops_per_byte(r, 4.0);
        double got = training_flops(r, 1e10, 4.0);
        CHECK(got == doctest::Approx(3.0 * b.total_per_byte * 1e10).epsilon(1e-12));
        // Exceeds the latent-only approximation by the local+cross share.
        double eq2 = approx_compute(r.params_global, 1e10, 4.0);
        CHECK(got > eq2);
        // With attention off the ratio to Eq. 2 is exactly 1/global_share.
        FlopsBreakdown lin = inference_flops_per_byte(r, 4.0, kDefaultContextBytes, false);
        double linear = training_flops(r, 1e10, 4.0, kDefaultContextBytes, false);
        CHECK(linear / eq2 == doctest::Approx(1.0 / lin.global_share).epsilon(1e-12));
    }
}

TEST_CASE("share example cells from the published table") {
    FlopsBreakdown sub = inference_flops_per_byte(subword_recipe(5, 148000), 1.01);
    CHECK(sub.global_share == doctest::Approx(0.34).epsilon(0.25));
    FlopsBreakdown lat = inference_flops_per_byte(latent_recipe(5), 1.0);
    CHECK(std::abs(lat.global_share - 0.66) <= 0.08);
}

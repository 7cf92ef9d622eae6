#pragma once

#include <cstdint>

#include "tokescale/records.hpp"

namespace tokescale {

/// Architecture configuration derived from a scale index. Width and depth
/// grow 1:1 in the global module (heads = layers, dim = 128 * heads); local
/// modules are wide and shallow. Feed-forward inner dim is 4x everywhere.
struct ArchRecipe {
    Family family = Family::LatentEntropy;
    int scale = 0;
    int global_layers = 0;
    int global_heads = 0;
    int global_dim = 0;
    int local_layers = 0;
    int local_heads = 0;
    int local_dim = 0;
    int crossattn_k = 0;
    long vocab_size = 0;  // subword only
    double params_global = 0.0;
    double params_local = 0.0;  // both local modules (latent) or tied embedding (subword)
    double params_cross = 0.0;
    double params_total = 0.0;
};

struct FlopsBreakdown {
    double global_per_byte = 0.0;
    double local_per_byte = 0.0;
    double cross_per_byte = 0.0;
    double total_per_byte = 0.0;
    double global_share = 0.0;
    long context_bytes = 0;
    bool attention_included = false;
};

inline constexpr int kMinScale = 1;
inline constexpr int kMaxScale = 64;
inline constexpr long kDefaultContextBytes = 8192;
// Local-attention window (bytes) behind the per-byte FLOPs model; single
// calibration constant shared by every latent breakdown.
inline constexpr long kDefaultLocalWindowBytes = 512;
inline constexpr int kByteVocab = 256;

ArchRecipe latent_recipe(int scale, Family family = Family::LatentEntropy);
ArchRecipe subword_recipe(int scale, long vocab_size);

/// 12 * s * (128 s)^2; attention 4d^2 + feed-forward 8d^2 per layer,
/// norm/bias terms excluded.
double count_global_params(int scale);

/// Fills every params_* field of the recipe.
ArchRecipe count_params(ArchRecipe recipe);

/// Eq.-style approximation 6*N*B/T of the latent module's training compute.
double approx_compute(double latent_params, double bytes, double compression);

struct BudgetAllocation {
    double bytes = 0.0;
    double bytes_per_param = 0.0;
};

/// Inverse of approx_compute: B = C*T/(6N), rho = B/N.
BudgetAllocation bytes_for_budget(double budget, double latent_params, double compression);

FlopsBreakdown inference_flops_per_byte(const ArchRecipe& recipe, double compression,
                                        long context_bytes = kDefaultContextBytes,
                                        bool include_attention = true,
                                        long local_window_bytes = kDefaultLocalWindowBytes);

/// Training cost over `bytes` of data: 3x the forward cost (backward = 2x
/// forward), all modules included.
double training_flops(const ArchRecipe& recipe, double bytes, double compression,
                      long context_bytes = kDefaultContextBytes, bool include_attention = true,
                      long local_window_bytes = kDefaultLocalWindowBytes);

}  // namespace tokescale

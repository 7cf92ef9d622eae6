#include "tokescale/recipes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tokescale/errors.hpp"

namespace tokescale {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

void check_scale(int scale) {
    if (scale < kMinScale || scale > kMaxScale)
        throw DomainError("scale must be in [" + std::to_string(kMinScale) + ", " +
                          std::to_string(kMaxScale) + "], got " + std::to_string(scale));
}

// Matmul params of one transformer stack: attention 4d^2 + feed-forward 8d^2
// per layer.
double stack_params(int layers, int dim) { return 12.0 * layers * double(dim) * dim; }

}  // namespace

ArchRecipe latent_recipe(int scale, Family family) {
    check_scale(scale);
    if (family == Family::Subword)
        throw DomainError("latent_recipe: family must be latent-entropy or latent-fixed");
    ArchRecipe r;
    r.family = family;
    r.scale = scale;
    r.global_layers = scale;
    r.global_heads = scale;
    r.global_dim = 128 * scale;
    r.local_layers = ceil_div(scale, 4);
    r.crossattn_k = ceil_div(scale, 8);
    // Follows the published scale table rather than the one-fourth-plus-8
    // prose, which disagrees with the table at scales 9-12 and 17-24.
    r.local_heads = 2 * r.crossattn_k + 8;
    r.local_dim = 64 * r.local_heads;
    return count_params(r);
}

ArchRecipe subword_recipe(int scale, long vocab_size) {
    check_scale(scale);
    if (vocab_size < 2) throw DomainError("subword_recipe: vocab_size must be >= 2");
    ArchRecipe r;
    r.family = Family::Subword;
    r.scale = scale;
    r.global_layers = scale;
    r.global_heads = scale;
    r.global_dim = 128 * scale;
    r.vocab_size = vocab_size;
    return count_params(r);
}

double count_global_params(int scale) {
    check_scale(scale);
    return 196608.0 * scale * scale * scale;  // 12 * s * (128 s)^2
}

ArchRecipe count_params(ArchRecipe r) {
    r.params_global = stack_params(r.global_layers, r.global_dim);
    if (r.family == Family::Subword) {
        // Tied embedding/de-embedding matrix.
        r.params_local = double(r.vocab_size) * r.global_dim;
        r.params_cross = 0.0;
    } else {
        // Encoder + decoder, each a local stack plus a byte (de-)embedding.
        double per_module = stack_params(r.local_layers, r.local_dim) + double(kByteVocab) * r.local_dim;
        r.params_local = 2.0 * per_module;
        // One projection set (Q,K,V,O) per local module, k-widened.
        r.params_cross = 2.0 * 4.0 * double(r.local_dim) * r.global_dim * r.crossattn_k;
    }
    r.params_total = r.params_global + r.params_local + r.params_cross;
    return r;
}

double approx_compute(double latent_params, double bytes, double compression) {
    if (!(compression > 0.0)) throw DomainError("approx_compute: compression must be positive");
    if (!(latent_params > 0.0) || !(bytes > 0.0))
        throw DomainError("approx_compute: latent_params and bytes must be positive");
    return 6.0 * latent_params * bytes / compression;
}

BudgetAllocation bytes_for_budget(double budget, double latent_params, double compression) {
    if (!(budget > 0.0) || !(latent_params > 0.0) || !(compression > 0.0))
        throw DomainError("bytes_for_budget: all arguments must be positive");
    BudgetAllocation a;
    a.bytes = budget * compression / (6.0 * latent_params);
    a.bytes_per_param = a.bytes / latent_params;
    return a;
}

FlopsBreakdown inference_flops_per_byte(const ArchRecipe& recipe, double compression,
                                        long context_bytes, bool include_attention,
                                        long local_window_bytes) {
    if (context_bytes <= 0) throw DomainError("inference_flops_per_byte: context_bytes must be positive");
    if (!(compression >= 1.0)) throw DomainError("inference_flops_per_byte: compression must be >= 1");

    const double T = compression;
    const double ctx_tokens = double(context_bytes) / T;

    FlopsBreakdown b;
    b.context_bytes = context_bytes;
    b.attention_included = include_attention;

    // Global module: 2*params per token plus attention over the latent
    // sequence, amortized over T bytes per token.
    double global_attn = include_attention ? 2.0 * recipe.global_layers * recipe.global_dim * ctx_tokens : 0.0;
    b.global_per_byte = (2.0 * recipe.params_global + global_attn) / T;

    if (recipe.family == Family::Subword) {
        // Embedding lookup is free; de-embedding is a V x d matmul per token.
        b.local_per_byte = 2.0 * double(recipe.vocab_size) * recipe.global_dim / T;
        b.cross_per_byte = 0.0;
    } else {
        double span = double(std::min(local_window_bytes, context_bytes));
        double local_attn =
            include_attention ? 2.0 * recipe.local_layers * recipe.local_dim * span : 0.0;
        double per_module_matmul = 12.0 * recipe.local_layers * double(recipe.local_dim) * recipe.local_dim;
        // Byte de-embedding on the decoder side.
        double de_embed = 2.0 * double(kByteVocab) * recipe.local_dim;
        b.local_per_byte = 2.0 * (2.0 * per_module_matmul) + 2.0 * local_attn + de_embed;
        // K/V projections run per byte, Q/O per latent token.
        b.cross_per_byte = recipe.params_cross * (1.0 + 1.0 / T);
    }

    b.total_per_byte = b.global_per_byte + b.local_per_byte + b.cross_per_byte;
    b.global_share = b.global_per_byte / b.total_per_byte;
    return b;
}

double training_flops(const ArchRecipe& recipe, double bytes, double compression,
                      long context_bytes, bool include_attention, long local_window_bytes) {
    if (!(bytes > 0.0)) throw DomainError("training_flops: bytes must be positive");
    FlopsBreakdown fwd =
        inference_flops_per_byte(recipe, compression, context_bytes, include_attention, local_window_bytes);
    return 3.0 * fwd.total_per_byte * bytes;
}

}  // namespace tokescale

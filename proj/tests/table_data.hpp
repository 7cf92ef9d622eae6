#pragma once

#include <cstddef>

namespace tokescale::testdata {

// Published per-scale parameter counts for the latent family. Values carry
// the precision they were printed with: `ulp` is one unit of the last
// printed digit, so |computed - value| <= ulp/2 means "rounds to the
// printed number".
struct LatentScaleRow {
    int scale;
    double global_params;
    double global_ulp;
    double local_params;  // per local module
    double local_ulp;
    int local_layers;
    int local_heads;
    int local_dim;
    int cross_heads;
    int cross_k;
    double total_params;
    double total_ulp;
};

inline constexpr LatentScaleRow kLatentScales[] = {
    {5, 25e6, 1e6, 10e6, 1e6, 2, 10, 640, 10, 1, 50e6, 1e6},
    {6, 43e6, 1e6, 10e6, 1e6, 2, 10, 640, 10, 1, 68e6, 1e6},
    {7, 67e6, 1e6, 10e6, 1e6, 2, 10, 640, 10, 1, 93e6, 1e6},
    {8, 101e6, 1e6, 10e6, 1e6, 2, 10, 640, 10, 1, 127e6, 1e6},
    {9, 143e6, 1e6, 21e6, 1e6, 3, 12, 768, 12, 2, 199e6, 1e6},
    {10, 197e6, 1e6, 21e6, 1e6, 3, 12, 768, 12, 2, 253e6, 1e6},
    {11, 262e6, 1e6, 21e6, 1e6, 3, 12, 768, 12, 2, 318e6, 1e6},
    {12, 340e6, 1e6, 21e6, 1e6, 3, 12, 768, 12, 2, 396e6, 1e6},
    {13, 432e6, 1e6, 28e6, 1e6, 4, 12, 768, 12, 2, 506e6, 1e6},
    {14, 540e6, 1e6, 28e6, 1e6, 4, 12, 768, 12, 2, 613e6, 1e6},
    {15, 664e6, 1e6, 28e6, 1e6, 4, 12, 768, 12, 2, 738e6, 1e6},
    {16, 805e6, 1e6, 28e6, 1e6, 4, 12, 768, 12, 2, 880e6, 1e6},
    {17, 966e6, 1e6, 48e6, 1e6, 5, 14, 896, 14, 3, 1.1e9, 0.1e9},
    {18, 1.1e9, 0.1e9, 48e6, 1e6, 5, 14, 896, 14, 3, 1.3e9, 0.1e9},
    {19, 1.3e9, 0.1e9, 48e6, 1e6, 5, 14, 896, 14, 3, 1.5e9, 0.1e9},
    {20, 1.6e9, 0.1e9, 48e6, 1e6, 5, 14, 896, 14, 3, 1.7e9, 0.1e9},
    {21, 1.8e9, 0.1e9, 58e6, 1e6, 6, 14, 896, 14, 3, 2.0e9, 0.1e9},
    {22, 2.1e9, 0.1e9, 58e6, 1e6, 6, 14, 896, 14, 3, 2.2e9, 0.1e9},
    {23, 2.4e9, 0.1e9, 58e6, 1e6, 6, 14, 896, 14, 3, 2.5e9, 0.1e9},
    {24, 2.7e9, 0.1e9, 58e6, 1e6, 6, 14, 896, 14, 3, 2.9e9, 0.1e9},
    {25, 3.1e9, 0.1e9, 88e6, 1e6, 7, 16, 1024, 16, 4, 3.3e9, 0.1e9},
    {26, 3.5e9, 0.1e9, 88e6, 1e6, 7, 16, 1024, 16, 4, 3.7e9, 0.1e9},
    {27, 3.9e9, 0.1e9, 88e6, 1e6, 7, 16, 1024, 16, 4, 4.1e9, 0.1e9},
    {28, 4.3e9, 0.1e9, 88e6, 1e6, 7, 16, 1024, 16, 4, 4.6e9, 0.1e9},
    {29, 4.8e9, 0.1e9, 101e6, 1e6, 8, 16, 1024, 16, 4, 5.1e9, 0.1e9},
    {30, 5.3e9, 0.1e9, 101e6, 1e6, 8, 16, 1024, 16, 4, 5.6e9, 0.1e9},
    {31, 5.9e9, 0.1e9, 101e6, 1e6, 8, 16, 1024, 16, 4, 6.1e9, 0.1e9},
    {32, 6.4e9, 0.1e9, 101e6, 1e6, 8, 16, 1024, 16, 4, 6.7e9, 0.1e9},
};

// Published subword embedding parameter counts per scale for the three
// vocabulary sizes (character 148k, BPE 128k, SuperBPE 200k).
struct SubwordEmbeddingRow {
    int scale;
    double char_params;
    double bpe_params;
    double super_params;
};

inline constexpr long kCharVocab = 148000;
inline constexpr long kBpeVocab = 128000;
inline constexpr long kSuperVocab = 200000;

inline constexpr SubwordEmbeddingRow kSubwordEmbeddings[] = {
    {5, 96e6, 82e6, 128e6},    {6, 115e6, 98e6, 154e6},   {7, 134e6, 115e6, 179e6},
    {8, 154e6, 131e6, 205e6},  {9, 173e6, 148e6, 230e6},  {10, 192e6, 164e6, 256e6},
    {11, 211e6, 180e6, 282e6}, {12, 230e6, 197e6, 307e6}, {13, 250e6, 213e6, 333e6},
    {14, 269e6, 229e6, 358e6}, {15, 288e6, 246e6, 384e6}, {16, 307e6, 262e6, 410e6},
    {17, 326e6, 279e6, 435e6}, {18, 346e6, 295e6, 461e6}, {19, 365e6, 311e6, 486e6},
    {20, 384e6, 328e6, 512e6}, {21, 403e6, 344e6, 538e6}, {22, 422e6, 360e6, 563e6},
    {23, 442e6, 377e6, 589e6}, {24, 461e6, 393e6, 614e6}, {25, 480e6, 410e6, 640e6},
    {26, 499e6, 426e6, 666e6}, {27, 518e6, 442e6, 691e6}, {28, 538e6, 459e6, 717e6},
    {29, 557e6, 475e6, 742e6}, {30, 576e6, 492e6, 768e6}, {31, 595e6, 508e6, 794e6},
    {32, 614e6, 524e6, 819e6},
};

// Published global-module compute share (percent of per-byte inference
// FLOPs) for the calibration cells of the share model.
struct ShareCell {
    int scale;
    double compression;
    long vocab;  // 0 for latent
    double share_percent;
};

inline constexpr ShareCell kLatentShareCells[] = {
    {5, 1.0, 0, 66.0},  {5, 4.0, 0, 24.0},  {5, 12.0, 0, 9.0},
    {16, 1.0, 0, 93.0}, {16, 4.0, 0, 76.0}, {16, 12.0, 0, 51.0},
    {32, 1.0, 0, 96.0}, {32, 4.0, 0, 87.0}, {32, 12.0, 0, 70.0},
};

// Subword compute shares; the vocabulary differs per tokenizer column
// (character 148k, BPE 126k, SuperBPE 200k).
inline constexpr ShareCell kSubwordShareCells[] = {
    {5, 1.01, 148000, 34.0},  {5, 4.57, 126000, 27.0},  {5, 6.16, 200000, 18.0},
    {32, 1.01, 148000, 92.0}, {32, 4.57, 126000, 93.0}, {32, 6.16, 200000, 89.0},
};

// Published two-stage law fits. Latent family: Scaling Law I constants plus
// the final residual form; the validation-protocol row carries the
// holdout comparison targets.
inline constexpr double kLatentB0 = 17.5;
inline constexpr double kLatentAlpha = 0.465;
inline constexpr double kLatentBeta = 0.471;
inline constexpr double kLatentN0 = 9.5e-3;
inline constexpr double kLatentL0 = 3342.0;
inline constexpr double kLatentGamma = -0.206;
inline constexpr double kLatentE = 0.70;
inline constexpr double kLatentF = 0.032;
inline constexpr double kLatentT0 = 18.2;
inline constexpr double kLatentDelta = 0.035;

inline constexpr double kSubwordB0 = 2.8;
inline constexpr double kSubwordAlpha = 0.501;
inline constexpr double kSubwordBeta = 0.446;

// Validation-protocol constants (budgets <= 1e21, holdout 2e21).
inline constexpr double kValidationE = 0.7075;
inline constexpr double kValidationF = 0.0341;
inline constexpr double kValidationT0 = 14.9;
inline constexpr double kValidationDelta = 0.0302;
inline constexpr double kValidationRmseMean = 0.0260;
inline constexpr double kValidationRmseConstT = 0.0115;
inline constexpr double kValidationRmseComputeT = 0.0086;

// Observed lowest BPB for the latent family (per budget, per compression).
inline constexpr double kObservedBpb1e20[] = {1.0158, 0.9694, 0.9601, 0.9631, 0.9751, 0.9993};
inline constexpr double kObservedBpb2e21[] = {0.8741, 0.8491, 0.8483, 0.8543, 0.8650, 0.8844};
inline constexpr double kObservedCompressions[] = {1, 2, 4, 6, 8, 12};

// Per-language optima at C=1e20 (monolingual latent models).
struct LanguageOptRow {
    const char* language;
    double parity;
    double opt_bpp;
    double opt_compression;
    double min_bpb;
};

inline constexpr LanguageOptRow kLanguageOptima[] = {
    {"eng", 1.0, 62.1, 3.71, 0.960}, {"fra", 1.2, 57.8, 4.16, 0.795},
    {"vie", 1.4, 61.2, 5.11, 0.602}, {"arb", 1.6, 75.8, 4.58, 0.564},
    {"rus", 2.0, 96.3, 5.67, 0.461}, {"eng_x2", 2.0, 91.1, 6.97, 0.492},
    {"hin", 2.6, 95.5, 8.09, 0.337},
};

}  // namespace tokescale::testdata

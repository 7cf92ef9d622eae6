#pragma once

#include <optional>
#include <vector>

#include "tokescale/optimizer.hpp"
#include "tokescale/records.hpp"

namespace tokescale {

struct OptimumPoint {
    double budget = 0.0;
    double compression = 0.0;
    double opt_bytes = 0.0;
};

/// Optimal-bytes power law B*(C, T) = B0 * C^alpha * T^beta together with
/// the derived parameter trend N*(C, T) = N0 * C^(1-alpha) * T^(1-beta),
/// N0 = 1 / (6 B0).
struct LawOneParams {
    double b0 = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double n0 = 0.0;  // derived, never fitted
    Family family = Family::LatentEntropy;
    // Internal parameterization: (ln B0, alpha, beta).
    std::vector<ConfidenceInterval> intervals;
    FitDiagnostics diagnostics;
    std::size_t n_starts_tried = 0;
};

struct LawOneOptions {
    Family family = Family::LatentEntropy;
    int grid_values = 13;          // per parameter
    std::size_t max_starts = kDefaultMaxStarts;
    bool with_intervals = true;
    double ci_level = 0.95;
};

LawOneParams fit_law1(const std::vector<OptimumPoint>& optima, const LawOneOptions& options = {});

double predict_data(const LawOneParams& params, double budget, double compression);
double predict_params(const LawOneParams& params, double budget, double compression);
double predict_bpp(const LawOneParams& params, double budget, double compression);

}  // namespace tokescale

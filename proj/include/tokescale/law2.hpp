#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tokescale/optimizer.hpp"
#include "tokescale/records.hpp"

namespace tokescale {

enum class ResidualVariant { Mean, ConstT, ComputeT };

std::string to_string(ResidualVariant variant);
ResidualVariant residual_variant_from_string(const std::string& name);

struct LossOptimum {
    double budget = 0.0;
    double compression = 0.0;
    double opt_loss = 0.0;
};

/// Optimal-loss law L*(C, T) = L0 * C^gamma + f(C, T) with the residual
/// model f reduced per variant: mean -> E; const_T -> F ln^2(T/T0) + E;
/// compute_T -> F ln^2(C^delta T / T0) + E. Natural logs throughout.
struct LawTwoParams {
    double l0 = 0.0;
    double gamma = 0.0;  // < 0
    ResidualVariant residual_variant = ResidualVariant::ComputeT;
    double e = 0.0;
    double f = 0.0;      // absent (0) for mean
    double t0 = 0.0;     // absent (0) for mean
    double delta = 0.0;  // compute_T only
    Family family = Family::LatentEntropy;
    std::map<double, double> offsets;  // phase-A fitted f(T) per compression
    FitDiagnostics diagnostics;        // phase-A fit over the optima
};

struct OffsetsFit {
    double l0 = 0.0;
    double gamma = 0.0;
    std::map<double, double> offsets;
    FitDiagnostics diagnostics;
    std::size_t n_starts_tried = 0;
};

struct ResidualSample {
    double budget = 0.0;
    double compression = 0.0;
    double value = 0.0;  // residual f-value: L* - L0 C^gamma
};

struct ResidualParams {
    ResidualVariant variant = ResidualVariant::Mean;
    double e = 0.0;
    double f = 0.0;
    double t0 = 0.0;
    double delta = 0.0;
};

struct ResidualModelRow {
    ResidualVariant variant = ResidualVariant::Mean;
    double e = 0.0;
    double f = 0.0;
    double t0 = 0.0;
    double delta = 0.0;
    double rmse_holdout = 0.0;
    double r2 = 0.0;
    double adj_r2 = 0.0;
};

struct ResidualModelReport {
    std::vector<ResidualModelRow> rows;  // mean, const_T, compute_T
    ResidualVariant selected = ResidualVariant::Mean;
    double holdout_budget = 0.0;
    std::size_t n_train = 0;
    std::size_t n_holdout = 0;
};

struct LawTwoOptions {
    Family family = Family::LatentEntropy;
    int grid_values = 13;  // per parameter for (L0, gamma): 169 combinations
    std::size_t max_starts = kDefaultMaxStarts;
    // Nested: E frozen from the mean stage and F carried into compute_T,
    // matching the shared constants of the validation protocol. The joint
    // mode refits all residual parameters per variant.
    bool nested = true;
};

/// Phase A: fit L0, gamma and one offset per distinct compression jointly.
OffsetsFit fit_law2_offsets(const std::vector<LossOptimum>& optima, const LawTwoOptions& options = {});

/// Phase B: fit the chosen residual form to (C, T, f-value) samples.
ResidualParams fit_residual_model(const std::vector<ResidualSample>& samples, ResidualVariant variant,
                                  const LawTwoOptions& options = {});

/// Fits all three variants on the non-holdout split, scores extrapolation
/// RMSE on the holdout budget, selects the minimum.
ResidualModelReport select_residual_model(const std::vector<LossOptimum>& optima,
                                          double holdout_budget, const LawTwoOptions& options = {});

/// Convenience: phase A + phase B on the same optima.
LawTwoParams fit_law2(const std::vector<LossOptimum>& optima, ResidualVariant variant,
                      const LawTwoOptions& options = {});

double optimal_compression(const LawTwoParams& params, double budget);
double predict_loss(const LawTwoParams& params, double budget, double compression);
double loss_sensitivity(const LawTwoParams& params, double budget, double compression);

}  // namespace tokescale

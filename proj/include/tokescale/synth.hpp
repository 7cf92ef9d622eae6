#pragma once

#include <cstdint>
#include <vector>

#include "tokescale/records.hpp"

namespace tokescale {

/// Fully specified ground truth for synthetic experiment grids. Loss noise
/// is multiplicative log-normal so losses stay positive at any sigma.
struct TruthSpec {
    // Law I: B*(C,T) = b0 * C^alpha * T^beta.
    double b0 = 17.5;
    double alpha = 0.465;
    double beta = 0.471;
    // Law II: L*(C,T) = l0 * C^gamma + f * ln^2(C^delta T / t0) + e.
    double l0 = 3342.0;
    double gamma = -0.206;
    double e = 0.70;
    double f = 0.032;
    double t0 = 18.2;
    double delta = 0.035;
    double noise_sigma = 0.0;
    double curvature = 0.05;  // IsoFLOP second derivative in ln B
    std::uint64_t seed = 0;
};

/// Per (C, T) cell: models_per_cell points spaced evenly in ln B over
/// +/- 1.5 around the true optimum; N back-solved from C = 6 N B / T.
/// Deterministic per seed, independent of cell iteration order.
std::vector<RunRecord> generate_grid(const TruthSpec& spec, const std::vector<double>& budgets,
                                     const std::vector<double>& compressions,
                                     std::size_t models_per_cell);

/// True optimal loss of the spec at (C, T).
double truth_loss(const TruthSpec& spec, double budget, double compression);

/// True optimal bytes of the spec at (C, T).
double truth_bytes(const TruthSpec& spec, double budget, double compression);

}  // namespace tokescale

#include "tokescale/synth.hpp"

#include <cmath>
#include <numbers>

#include "tokescale/errors.hpp"

namespace tokescale {

namespace {

constexpr double kLogSpan = 1.5;  // ln-units around the optimum

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic standard normals: explicit Box-Muller over a splitmix64
// stream, so output is identical across platforms and iteration orders.
class CellNoise {
public:
    CellNoise(std::uint64_t seed, std::uint64_t cell) : state_(splitmix64(seed ^ splitmix64(cell))) {}

    double normal() {
        double u1 = next_uniform();
        double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi_v<double> * u2);
    }

private:
    double next_uniform() {
        state_ = splitmix64(state_);
        // (0, 1]: avoids log(0).
        return (double(state_ >> 11) + 1.0) / 9007199254740993.0;
    }

    std::uint64_t state_ = 0;
};

}  // namespace

double truth_bytes(const TruthSpec& spec, double budget, double compression) {
    return spec.b0 * std::pow(budget, spec.alpha) * std::pow(compression, spec.beta);
}

double truth_loss(const TruthSpec& spec, double budget, double compression) {
    double arg = spec.delta * std::log(budget) + std::log(compression) - std::log(spec.t0);
    return spec.l0 * std::pow(budget, spec.gamma) + spec.f * arg * arg + spec.e;
}

std::vector<RunRecord> generate_grid(const TruthSpec& spec, const std::vector<double>& budgets,
                                     const std::vector<double>& compressions,
                                     std::size_t models_per_cell) {
    if (models_per_cell < 3)
        throw DomainError("generate_grid: models_per_cell must be >= 3 for a parabola fit");
    if (budgets.empty() || compressions.empty())
        throw DomainError("generate_grid: budgets and compressions must be nonempty");
    if (!(spec.curvature > 0.0)) throw DomainError("generate_grid: curvature must be positive");
    if (spec.noise_sigma < 0.0) throw DomainError("generate_grid: noise_sigma must be nonnegative");

    std::vector<RunRecord> records;
    records.reserve(budgets.size() * compressions.size() * models_per_cell);
    for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
        for (std::size_t ci = 0; ci < compressions.size(); ++ci) {
            double budget = budgets[bi];
            double compression = compressions[ci];
            if (!(budget > 0.0) || !(compression >= 1.0))
                throw DomainError("generate_grid: budgets must be positive, compressions >= 1");
            double opt_log_bytes = std::log(truth_bytes(spec, budget, compression));
            double opt_loss = truth_loss(spec, budget, compression);
            CellNoise noise(spec.seed, bi * 0x10001ULL + ci);
            for (std::size_t m = 0; m < models_per_cell; ++m) {
                double frac = models_per_cell == 1
                                  ? 0.0
                                  : -1.0 + 2.0 * double(m) / double(models_per_cell - 1);
                double log_bytes = opt_log_bytes + frac * kLogSpan;
                double offset = log_bytes - opt_log_bytes;
                double loss = opt_loss + spec.curvature * offset * offset;
                if (spec.noise_sigma > 0.0) loss *= std::exp(spec.noise_sigma * noise.normal());
                RunRecord r;
                r.family = Family::LatentEntropy;
                r.budget_flops = budget;
                r.compression = compression;
                r.bytes = std::exp(log_bytes);
                // Eq.-2 back-solve keeps the declared budget exact.
                r.latent_params = budget * compression / (6.0 * r.bytes);
                r.loss_bpb = loss;
                r.dataset = "synthetic";
                records.push_back(std::move(r));
            }
        }
    }
    return records;
}

}  // namespace tokescale

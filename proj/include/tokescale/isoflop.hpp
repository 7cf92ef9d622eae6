#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tokescale/records.hpp"

namespace tokescale {

struct BytesLoss {
    double bytes = 0.0;
    double loss = 0.0;
};

struct BytesParams {
    double bytes = 0.0;
    double params = 0.0;
};

struct CompressionBppLoss {
    double compression = 0.0;
    double bytes_per_param = 0.0;
    double loss = 0.0;
};

/// Quadratic fit of loss against x = ln(bytes) at fixed (budget, compression).
struct Isoflop2D {
    double budget = 0.0;
    double compression = 0.0;
    double a = 0.0;  // loss = a x^2 + b x + c
    double b = 0.0;
    double c = 0.0;
    double opt_log_bytes = 0.0;  // -b / (2a)
    double opt_bytes = 0.0;
    double opt_loss = 0.0;
    double opt_params = 0.0;  // filled by interpolation; 0 when unavailable
    double opt_bpp = 0.0;
    std::size_t n_points = 0;
    double rmse = 0.0;
    bool vertex_outside_span = false;
    std::string language = "eng";
};

/// Full bivariate quadratic of loss over (u, v) = (ln T, ln rho).
struct Isoflop3D {
    double budget = 0.0;
    // loss = c0 + c1 u + c2 v + c3 u^2 + c4 u v + c5 v^2
    std::array<double, 6> coeffs{};
    double opt_compression = 0.0;
    double opt_bpp = 0.0;
    double opt_loss = 0.0;
    bool hessian_pd = false;
    std::size_t n_points = 0;
    double rmse = 0.0;
    std::string language = "eng";

    double evaluate(double compression, double bytes_per_param) const;
};

Isoflop2D fit_parabola(const std::vector<BytesLoss>& points, double budget, double compression);

struct Interpolated {
    double params = 0.0;
    bool extrapolated = false;
};

/// ln N piecewise-linear in ln B over the grid; continues the end segment
/// (with a flag) outside the span.
Interpolated interpolate_params(double target_bytes, std::vector<BytesParams> grid);

Isoflop3D fit_paraboloid(const std::vector<CompressionBppLoss>& points, double budget);

/// Groups records by (budget, compression), fits the parabola per cell and
/// interpolates the optimal parameter count from the cell's (B, N) grid.
std::vector<Isoflop2D> fit_cells(const std::vector<RunRecord>& records);

/// Groups records by budget and fits one paraboloid per budget over
/// (ln T, ln rho).
std::vector<Isoflop3D> fit_surfaces(const std::vector<RunRecord>& records);

}  // namespace tokescale

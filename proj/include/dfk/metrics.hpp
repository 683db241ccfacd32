#pragma once

#include <span>

#include "dfk/field.hpp"
#include "dfk/grid.hpp"

namespace dfk {

/// Mean squared error over all node values; shapes must match.
double mse(const GridField& ref, const GridField& test);

/// 10 log10(peak^2 / mse) with peak the reference value range, capped at
/// 99 dB (exact matches would otherwise be infinite).
double psnr(const GridField& ref, const GridField& test);

/// Mean SSIM (11x11 Gaussian window, sigma 1.5, K1 0.01, K2 0.03) over all
/// channels and, for 3D grids, z slices. Windows are fully interior; images
/// smaller than the window fall back to one whole-image uniform window.
double ssim(const GridField& ref, const GridField& test);

struct DivergenceStats {
    double mean_abs = 0.0;
    double max_abs = 0.0;
    double mean_jac_fro = 0.0;  // scale reference for relative divergence
};

/// Divergence magnitude statistics over the sample points: analytic when
/// fd_step == 0, central differences of width fd_step otherwise. The
/// Jacobian Frobenius mean is always analytic.
DivergenceStats divergence_stats(const KernelField& field, const HashGrid& grid, int frame,
                                 std::span<const Vec> points, double fd_step = 0.0);

}  // namespace dfk

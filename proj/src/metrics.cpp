#include "dfk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dfk/parallel.hpp"

namespace dfk {
namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;
constexpr double kPsnrCap = 99.0;

void check_shapes(const GridField& ref, const GridField& test) {
    if (ref.dim != test.dim || ref.channels != test.channels || ref.dims != test.dims)
        throw std::invalid_argument("grid shapes do not match");
}

std::pair<double, double> value_range(const GridField& g) {
    double lo = g.data.empty() ? 0.0 : g.data[0];
    double hi = lo;
    for (double v : g.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

std::vector<double> gaussian_window() {
    std::vector<double> w(kWindow * kWindow);
    const int c = kWindow / 2;
    double sum = 0.0;
    for (int j = 0; j < kWindow; ++j)
        for (int i = 0; i < kWindow; ++i) {
            const double d2 = static_cast<double>((i - c) * (i - c) + (j - c) * (j - c));
            w[static_cast<size_t>(j * kWindow + i)] =
                std::exp(-d2 / (2.0 * kWindowSigma * kWindowSigma));
            sum += w[static_cast<size_t>(j * kWindow + i)];
        }
    for (double& v : w) v /= sum;
    return w;
}

/// SSIM of one window given the weighted moments.
double ssim_from_moments(double mu_x, double mu_y, double xx, double yy, double xy, double c1,
                         double c2) {
    const double var_x = xx - mu_x * mu_x;
    const double var_y = yy - mu_y * mu_y;
    const double cov = xy - mu_x * mu_y;
    return ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) /
           ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
}

}  // namespace

double mse(const GridField& ref, const GridField& test) {
    check_shapes(ref, test);
    if (ref.data.empty()) return 0.0;
    double sum = 0.0;
    for (size_t i = 0; i < ref.data.size(); ++i) {
        const double d = ref.data[i] - test.data[i];
        sum += d * d;
    }
    return sum / static_cast<double>(ref.data.size());
}

double psnr(const GridField& ref, const GridField& test) {
    const double err = mse(ref, test);
    const auto [lo, hi] = value_range(ref);
    const double peak = hi - lo;
    if (err <= 0.0) return kPsnrCap;
    if (peak <= 0.0) return 0.0;
    return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / err));
}

double ssim(const GridField& ref, const GridField& test) {
    check_shapes(ref, test);
    static const std::vector<double> window = gaussian_window();
    const int nx = static_cast<int>(ref.dims[0]);
    const int ny = static_cast<int>(ref.dims[1]);
    const int nz = static_cast<int>(ref.dims[2]);
    const bool whole_image = nx < kWindow || ny < kWindow;

    double total = 0.0;
    size_t windows = 0;
    for (int c = 0; c < ref.channels; ++c) {
        const auto [lo, hi] = value_range(ref);
        const double range = std::max(hi - lo, 1e-12);
        const double c1 = (kK1 * range) * (kK1 * range);
        const double c2 = (kK2 * range) * (kK2 * range);
        for (int k = 0; k < nz; ++k) {
            if (whole_image) {
                double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
                const double inv = 1.0 / static_cast<double>(nx * ny);
                for (int j = 0; j < ny; ++j)
                    for (int i = 0; i < nx; ++i) {
                        const double a = ref.at(static_cast<uint32_t>(i), static_cast<uint32_t>(j),
                                                static_cast<uint32_t>(k), c);
                        const double b = test.at(static_cast<uint32_t>(i), static_cast<uint32_t>(j),
                                                 static_cast<uint32_t>(k), c);
                        mx += a * inv;
                        my += b * inv;
                        xx += a * a * inv;
                        yy += b * b * inv;
                        xy += a * b * inv;
                    }
                total += ssim_from_moments(mx, my, xx, yy, xy, c1, c2);
                ++windows;
                continue;
            }
            for (int cy = kWindow / 2; cy < ny - kWindow / 2; ++cy)
                for (int cx = kWindow / 2; cx < nx - kWindow / 2; ++cx) {
                    double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
                    for (int wy = 0; wy < kWindow; ++wy)
                        for (int wx = 0; wx < kWindow; ++wx) {
                            const double wgt = window[static_cast<size_t>(wy * kWindow + wx)];
                            const uint32_t i = static_cast<uint32_t>(cx + wx - kWindow / 2);
                            const uint32_t j = static_cast<uint32_t>(cy + wy - kWindow / 2);
                            const double a = ref.at(i, j, static_cast<uint32_t>(k), c);
                            const double b = test.at(i, j, static_cast<uint32_t>(k), c);
                            mx += wgt * a;
                            my += wgt * b;
                            xx += wgt * a * a;
                            yy += wgt * b * b;
                            xy += wgt * a * b;
                        }
                    total += ssim_from_moments(mx, my, xx, yy, xy, c1, c2);
                    ++windows;
                }
        }
    }
    return windows == 0 ? 1.0 : total / static_cast<double>(windows);
}

DivergenceStats divergence_stats(const KernelField& field, const HashGrid& grid, int frame,
                                 std::span<const Vec> points, double fd_step) {
    DivergenceStats stats;
    if (points.empty()) return stats;
    const auto chunks = make_chunks(points.size());
    std::vector<DivergenceStats> partial(chunks.size());
    for_each_chunk(points.size(), [&](const ChunkRange& c) {
        DivergenceStats local;
        std::vector<uint32_t> infl;
        for (size_t i = c.begin; i < c.end; ++i) {
            const Vec& p = points[i];
            double dv = 0.0;
            if (fd_step > 0.0) {
                dv = divergence_fd(field, grid, frame, p, fd_step);
            } else {
                query_support(grid, field, p, infl);
                for (uint32_t k : infl)
                    dv += divergence_contribution(field.type, p - field.centers[k],
                                                  field.radii[k], field.weight_vec(frame, k),
                                                  field.dim);
            }
            Mat jac{};
            query_support(grid, field, p, infl);
            for (uint32_t k : infl)
                jac += jacobian_contribution(field.type, p - field.centers[k], field.radii[k],
                                             field.weight_vec(frame, k), field.dim);
            double fro = 0.0;
            for (double v : jac.m) fro += v * v;
            local.mean_abs += std::abs(dv);
            local.max_abs = std::max(local.max_abs, std::abs(dv));
            local.mean_jac_fro += std::sqrt(fro);
        }
        partial[c.index] = local;
    });
    for (const auto& l : partial) {
        stats.mean_abs += l.mean_abs;
        stats.max_abs = std::max(stats.max_abs, l.max_abs);
        stats.mean_jac_fro += l.mean_jac_fro;
    }
    stats.mean_abs /= static_cast<double>(points.size());
    stats.mean_jac_fro /= static_cast<double>(points.size());
    return stats;
}

}  // namespace dfk

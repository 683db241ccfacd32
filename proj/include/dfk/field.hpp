#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dfk/kernels.hpp"
#include "dfk/vec.hpp"

namespace dfk {

/// The trainable field model: N kernels with shared geometry across F frames
/// and frame-major contiguous weights [frame][kernel][component].
struct KernelField {
    KernelType type;
    int dim = 3;
    int frames = 1;
    double frame_dt = 0.0;  // seconds between frames when frames > 1
    std::vector<Vec> centers;
    std::vector<double> radii;
    std::vector<double> weights;

    size_t kernel_count() const { return centers.size(); }
    int weight_width() const { return dfk::weight_width(type, dim); }
    size_t weight_offset(int frame, size_t kernel) const {
        const size_t w = static_cast<size_t>(weight_width());
        return (static_cast<size_t>(frame) * kernel_count() + kernel) * w;
    }

    /// Weight vector of one kernel; scalar 2D curl weights map to the z slot
    /// so the 3D cross-product formulas apply unchanged.
    Vec weight_vec(int frame, size_t kernel) const {
        const size_t off = weight_offset(frame, kernel);
        if (weight_width() == 1) return Vec{0.0, 0.0, weights[off]};
        Vec a{weights[off], weights[off + 1], 0.0};
        if (weight_width() == 3) a.z = weights[off + 2];
        return a;
    }

    void allocate_weights() {
        weights.assign(static_cast<size_t>(frames) * kernel_count() *
                           static_cast<size_t>(weight_width()),
                       0.0);
    }
};

/// Spatial hash over kernel supports. cell_size is the maximum radius and
/// every kernel is inserted into each cell its support box overlaps, so a
/// single-cell lookup returns a superset of the true influencers.
struct HashGrid {
    double cell_size = 0.0;
    std::unordered_map<uint64_t, std::vector<uint32_t>> cells;

    static HashGrid build(const KernelField& field);
    /// Raw cell content (superset, ascending kernel index); empty when the
    /// point is outside every support box.
    const std::vector<uint32_t>* raw_cell(const Vec& p) const;
};

/// Exact influencer list: indices i with ||p - center_i|| < h_i, ascending.
void query_support(const HashGrid& grid, const KernelField& field, const Vec& p,
                   std::vector<uint32_t>& out);

/// Per-point influencer lists frozen for fixed-geometry training.
struct PairCache {
    std::vector<uint32_t> offsets;  // size points + 1
    std::vector<uint32_t> indices;

    std::span<const uint32_t> influencers(size_t point) const {
        return {indices.data() + offsets[point], indices.data() + offsets[point + 1]};
    }
    size_t pair_count() const { return indices.size(); }
};

PairCache build_pair_cache(const KernelField& field, const HashGrid& grid,
                           std::span<const Vec> points);

std::vector<Vec> evaluate_velocity(const KernelField& field, const HashGrid& grid, int frame,
                                   std::span<const Vec> points);
std::vector<Vec> evaluate_velocity(const KernelField& field, int frame,
                                   std::span<const Vec> points);

/// Summed vorticity contributions (2D scalar in z). DivFree kinds only.
std::vector<Vec> evaluate_vorticity(const KernelField& field, const HashGrid& grid, int frame,
                                    std::span<const Vec> points);
std::vector<Vec> evaluate_vorticity(const KernelField& field, int frame,
                                    std::span<const Vec> points);

/// Central-difference divergence estimate of the represented field.
double divergence_fd(const KernelField& field, const HashGrid& grid, int frame, const Vec& point,
                     double step);
double divergence_fd(const KernelField& field, int frame, const Vec& point, double step);

/// Leray/Helmholtz split of a NegLapScalar field: the same geometry and
/// weights reinterpreted under the CurlFree and DivFree kinds. Their
/// pointwise sum reproduces the input field.
std::pair<KernelField, KernelField> decompose(const KernelField& regular_neglap_field);

}  // namespace dfk

#include "dfk/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dfk/parallel.hpp"

namespace dfk {

namespace {

// Cell coordinates are biased into 21-bit lanes; supports span well under
// 2^20 cells per axis for any sane domain/radius ratio.
constexpr int64_t kBias = int64_t{1} << 20;
constexpr uint64_t kLaneMask = (uint64_t{1} << 21) - 1;

uint64_t pack_cell(int64_t cx, int64_t cy, int64_t cz) {
    const uint64_t ux = static_cast<uint64_t>(cx + kBias) & kLaneMask;
    const uint64_t uy = static_cast<uint64_t>(cy + kBias) & kLaneMask;
    const uint64_t uz = static_cast<uint64_t>(cz + kBias) & kLaneMask;
    return (ux << 42) | (uy << 21) | uz;
}

int64_t cell_coord(double v, double cell) { return static_cast<int64_t>(std::floor(v / cell)); }

void check_frame(const KernelField& field, int frame) {
    if (frame < 0 || frame >= field.frames) throw std::invalid_argument("frame out of range");
}

}  // namespace

HashGrid HashGrid::build(const KernelField& field) {
    HashGrid grid;
    if (field.centers.empty()) return grid;
    grid.cell_size = *std::max_element(field.radii.begin(), field.radii.end());
    if (!(grid.cell_size > 0.0)) throw std::invalid_argument("kernel radii must be positive");

    const int d = field.dim;
    for (uint32_t i = 0; i < field.centers.size(); ++i) {
        const Vec& c = field.centers[i];
        const double h = field.radii[i];
        int64_t lo[3] = {0, 0, 0};
        int64_t hi[3] = {0, 0, 0};
        for (int axis = 0; axis < d; ++axis) {
            lo[axis] = cell_coord(c[axis] - h, grid.cell_size);
            hi[axis] = cell_coord(c[axis] + h, grid.cell_size);
        }
        for (int64_t cx = lo[0]; cx <= hi[0]; ++cx)
            for (int64_t cy = lo[1]; cy <= hi[1]; ++cy)
                for (int64_t cz = lo[2]; cz <= hi[2]; ++cz)
                    grid.cells[pack_cell(cx, cy, cz)].push_back(i);
    }
    return grid;
}

const std::vector<uint32_t>* HashGrid::raw_cell(const Vec& p) const {
    if (cells.empty()) return nullptr;
    const int64_t cx = cell_coord(p.x, cell_size);
    const int64_t cy = cell_coord(p.y, cell_size);
    const int64_t cz = cell_coord(p.z, cell_size);
    const auto it = cells.find(pack_cell(cx, cy, cz));
    return it == cells.end() ? nullptr : &it->second;
}

void query_support(const HashGrid& grid, const KernelField& field, const Vec& p,
                   std::vector<uint32_t>& out) {
    out.clear();
    const auto* cell = grid.raw_cell(p);
    if (!cell) return;
    for (uint32_t i : *cell) {
        const Vec off = p - field.centers[i];
        if (norm2(off) < field.radii[i] * field.radii[i]) out.push_back(i);
    }
}

PairCache build_pair_cache(const KernelField& field, const HashGrid& grid,
                           std::span<const Vec> points) {
    PairCache cache;
    cache.offsets.resize(points.size() + 1, 0);

    std::vector<std::vector<uint32_t>> lists(points.size());
    for_each_chunk(points.size(), [&](const ChunkRange& range) {
        std::vector<uint32_t> scratch;
        for (size_t p = range.begin; p < range.end; ++p) {
            query_support(grid, field, points[p], scratch);
            lists[p] = scratch;
        }
    });

    for (size_t p = 0; p < points.size(); ++p)
        cache.offsets[p + 1] = cache.offsets[p] + static_cast<uint32_t>(lists[p].size());
    cache.indices.reserve(cache.offsets.back());
    for (const auto& l : lists) cache.indices.insert(cache.indices.end(), l.begin(), l.end());
    return cache;
}

std::vector<Vec> evaluate_velocity(const KernelField& field, const HashGrid& grid, int frame,
                                   std::span<const Vec> points) {
    check_frame(field, frame);
    std::vector<Vec> out(points.size());
    for_each_chunk(points.size(), [&](const ChunkRange& range) {
        std::vector<uint32_t> scratch;
        for (size_t p = range.begin; p < range.end; ++p) {
            query_support(grid, field, points[p], scratch);
            Vec u;
            for (uint32_t i : scratch) {
                u += velocity_contribution(field.type, points[p] - field.centers[i],
                                           field.radii[i], field.weight_vec(frame, i), field.dim);
            }
            out[p] = u;
        }
    });
    return out;
}

std::vector<Vec> evaluate_velocity(const KernelField& field, int frame,
                                   std::span<const Vec> points) {
    return evaluate_velocity(field, HashGrid::build(field), frame, points);
}

std::vector<Vec> evaluate_vorticity(const KernelField& field, const HashGrid& grid, int frame,
                                    std::span<const Vec> points) {
    check_frame(field, frame);
    if (field.type.kind != KernelKind::DivFree)
        throw std::invalid_argument("evaluate_vorticity: DivFree fields only");
    std::vector<Vec> out(points.size());
    for_each_chunk(points.size(), [&](const ChunkRange& range) {
        std::vector<uint32_t> scratch;
        for (size_t p = range.begin; p < range.end; ++p) {
            query_support(grid, field, points[p], scratch);
            Vec w;
            for (uint32_t i : scratch) {
                w += vorticity_contribution(field.type.base, points[p] - field.centers[i],
                                            field.radii[i], field.weight_vec(frame, i), field.dim);
            }
            out[p] = w;
        }
    });
    return out;
}

std::vector<Vec> evaluate_vorticity(const KernelField& field, int frame,
                                    std::span<const Vec> points) {
    return evaluate_vorticity(field, HashGrid::build(field), frame, points);
}

double divergence_fd(const KernelField& field, const HashGrid& grid, int frame, const Vec& point,
                     double step) {
    if (!(step > 0.0)) throw std::invalid_argument("divergence_fd: step must be positive");
    check_frame(field, frame);
    std::vector<Vec> probes;
    probes.reserve(static_cast<size_t>(2 * field.dim));
    for (int axis = 0; axis < field.dim; ++axis) {
        Vec hi = point;
        Vec lo = point;
        hi[axis] += step;
        lo[axis] -= step;
        probes.push_back(hi);
        probes.push_back(lo);
    }
    const auto u = evaluate_velocity(field, grid, frame, probes);
    double div = 0.0;
    for (int axis = 0; axis < field.dim; ++axis)
        div += (u[static_cast<size_t>(2 * axis)][axis] - u[static_cast<size_t>(2 * axis + 1)][axis]) /
               (2.0 * step);
    return div;
}

double divergence_fd(const KernelField& field, int frame, const Vec& point, double step) {
    return divergence_fd(field, HashGrid::build(field), frame, point, step);
}

std::pair<KernelField, KernelField> decompose(const KernelField& regular_neglap_field) {
    if (regular_neglap_field.type.kind != KernelKind::NegLapScalar)
        throw std::invalid_argument("decompose: input kind must be NegLapScalar");
    KernelField curlfree = regular_neglap_field;
    curlfree.type.kind = KernelKind::CurlFree;
    KernelField divfree = regular_neglap_field;
    divfree.type.kind = KernelKind::DivFree;
    return {std::move(curlfree), std::move(divfree)};
}

}  // namespace dfk

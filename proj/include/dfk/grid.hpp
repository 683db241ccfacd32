#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dfk/vec.hpp"

namespace dfk {

/// Node-centered sampled field on an axis-aligned box. Storage is row-major
/// with x fastest and channels interleaved; nodes include the box corners
/// (spacing extent/(n-1)). 2D grids keep nz == 1.
struct GridField {
    int dim = 3;
    int channels = 1;
    std::array<uint32_t, 3> dims{1, 1, 1};  // nx, ny, nz
    Box bbox;
    std::vector<double> data;

    size_t node_count() const {
        return static_cast<size_t>(dims[0]) * dims[1] * dims[2];
    }
    size_t value_count() const { return node_count() * static_cast<size_t>(channels); }

    size_t node_index(uint32_t i, uint32_t j, uint32_t k) const {
        return (static_cast<size_t>(k) * dims[1] + j) * dims[0] + i;
    }
    double& at(uint32_t i, uint32_t j, uint32_t k, int c) {
        return data[node_index(i, j, k) * static_cast<size_t>(channels) + static_cast<size_t>(c)];
    }
    double at(uint32_t i, uint32_t j, uint32_t k, int c) const {
        return data[node_index(i, j, k) * static_cast<size_t>(channels) + static_cast<size_t>(c)];
    }

    double spacing(int axis) const {
        return dims[static_cast<size_t>(axis)] > 1
                   ? bbox.extent(axis) / static_cast<double>(dims[static_cast<size_t>(axis)] - 1)
                   : 0.0;
    }

    Vec node_pos(uint32_t i, uint32_t j, uint32_t k) const {
        Vec p = bbox.lo;
        p.x += spacing(0) * static_cast<double>(i);
        p.y += spacing(1) * static_cast<double>(j);
        if (dim == 3) p.z += spacing(2) * static_cast<double>(k);
        return p;
    }

    Vec vector_at(uint32_t i, uint32_t j, uint32_t k) const {
        Vec v{at(i, j, k, 0), channels > 1 ? at(i, j, k, 1) : 0.0,
              channels > 2 ? at(i, j, k, 2) : 0.0};
        return v;
    }

    static GridField make(int dim, int channels, std::array<uint32_t, 3> dims, const Box& bbox) {
        GridField g;
        g.dim = dim;
        g.channels = channels;
        g.dims = dims;
        if (dim == 2) g.dims[2] = 1;
        g.bbox = bbox;
        g.data.assign(g.value_count(), 0.0);
        return g;
    }

    /// All node positions in storage order.
    std::vector<Vec> node_positions() const {
        std::vector<Vec> out;
        out.reserve(node_count());
        for (uint32_t k = 0; k < dims[2]; ++k)
            for (uint32_t j = 0; j < dims[1]; ++j)
                for (uint32_t i = 0; i < dims[0]; ++i) out.push_back(node_pos(i, j, k));
        return out;
    }
};

}  // namespace dfk

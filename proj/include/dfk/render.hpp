#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfk/grid.hpp"

namespace dfk {

/// 8-bit RGB raster, row-major, row 0 at the top (max y).
struct Image {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> rgb;

    uint8_t* pixel(int x, int y) {
        return rgb.data() + 3 * (static_cast<size_t>(y) * static_cast<size_t>(width) + x);
    }
};

void write_ppm(const std::string& path, const Image& img);

/// 2D section of a 3D grid: the given axis fixed at one node index, channels
/// kept, the remaining axes becoming x/y of the slice.
GridField slice_field(const GridField& grid, int axis, uint32_t index);

/// Direction-as-hue rendering of a 2D vector slice: hue = atan2(uy, ux),
/// saturation = speed / p99(speed) against white, full value. A zero field
/// renders pure white.
Image render_velocity(const GridField& slice);

/// Signed scalar rendering (vorticity): five-anchor diverging map, symmetric
/// about zero, scaled by p99(|w|).
Image render_vorticity(const GridField& slice);

}  // namespace dfk

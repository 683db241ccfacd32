#include "dfk/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "dfk/errors.hpp"

namespace dfk {
namespace {

constexpr double kPi = 3.14159265358979323846;

uint8_t to_byte(double v) {
    return static_cast<uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

void hsv_to_rgb(double h, double s, double v, double rgb[3]) {
    h = h - 360.0 * std::floor(h / 360.0);
    const double c = v * s;
    const double x = c * (1.0 - std::abs(std::fmod(h / 60.0, 2.0) - 1.0));
    const double m = v - c;
    double r = 0, g = 0, b = 0;
    if (h < 60) r = c, g = x;
    else if (h < 120) r = x, g = c;
    else if (h < 180) g = c, b = x;
    else if (h < 240) g = x, b = c;
    else if (h < 300) r = x, b = c;
    else r = c, b = x;
    rgb[0] = r + m;
    rgb[1] = g + m;
    rgb[2] = b + m;
}

double percentile99(std::vector<double> values) {
    if (values.empty()) return 0.0;
    const size_t idx = static_cast<size_t>(0.99 * static_cast<double>(values.size() - 1));
    std::nth_element(values.begin(), values.begin() + static_cast<ptrdiff_t>(idx), values.end());
    return values[idx];
}

void check_slice(const GridField& slice, int min_channels) {
    if (slice.dims[2] != 1) throw std::invalid_argument("rendering expects a 2D slice");
    if (slice.channels < min_channels)
        throw std::invalid_argument("slice is missing required channels");
}

Image blank(const GridField& slice) {
    Image img;
    img.width = static_cast<int>(slice.dims[0]);
    img.height = static_cast<int>(slice.dims[1]);
    img.rgb.assign(static_cast<size_t>(img.width) * static_cast<size_t>(img.height) * 3, 255);
    return img;
}

}  // namespace

void write_ppm(const std::string& path, const Image& img) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(IoError::Code::FileAccess, path + ": cannot open for writing");
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.rgb.data()),
              static_cast<std::streamsize>(img.rgb.size()));
    if (!out) throw IoError(IoError::Code::FileAccess, path + ": write failed");
}

GridField slice_field(const GridField& grid, int axis, uint32_t index) {
    if (grid.dim != 3) throw std::invalid_argument("slicing expects a 3D grid");
    if (axis < 0 || axis > 2 || index >= grid.dims[static_cast<size_t>(axis)])
        throw std::invalid_argument("slice axis/index out of range");
    const int ax = axis == 0 ? 1 : 0;
    const int ay = axis == 2 ? 1 : 2;
    GridField out = GridField::make(
        2, grid.channels,
        {grid.dims[static_cast<size_t>(ax)], grid.dims[static_cast<size_t>(ay)], 1},
        Box{Vec{grid.bbox.lo[ax], grid.bbox.lo[ay], 0.0}, Vec{grid.bbox.hi[ax], grid.bbox.hi[ay], 0.0}});
    for (uint32_t j = 0; j < out.dims[1]; ++j)
        for (uint32_t i = 0; i < out.dims[0]; ++i) {
            uint32_t src[3];
            src[axis] = index;
            src[ax] = i;
            src[ay] = j;
            for (int c = 0; c < grid.channels; ++c)
                out.at(i, j, 0, c) = grid.at(src[0], src[1], src[2], c);
        }
    return out;
}

Image render_velocity(const GridField& slice) {
    check_slice(slice, 2);
    Image img = blank(slice);
    std::vector<double> speeds;
    speeds.reserve(slice.node_count());
    for (uint32_t j = 0; j < slice.dims[1]; ++j)
        for (uint32_t i = 0; i < slice.dims[0]; ++i)
            speeds.push_back(std::hypot(slice.at(i, j, 0, 0), slice.at(i, j, 0, 1)));
    const double scale = percentile99(speeds);
    if (scale <= 0.0) return img;  // zero field: white
    for (uint32_t j = 0; j < slice.dims[1]; ++j)
        for (uint32_t i = 0; i < slice.dims[0]; ++i) {
            const double ux = slice.at(i, j, 0, 0);
            const double uy = slice.at(i, j, 0, 1);
            const double hue = std::atan2(uy, ux) * (180.0 / kPi);
            const double sat = std::min(std::hypot(ux, uy) / scale, 1.0);
            double rgb[3];
            hsv_to_rgb(hue, sat, 1.0, rgb);
            uint8_t* px = img.pixel(static_cast<int>(i),
                                    static_cast<int>(slice.dims[1] - 1 - j));
            px[0] = to_byte(rgb[0]);
            px[1] = to_byte(rgb[1]);
            px[2] = to_byte(rgb[2]);
        }
    return img;
}

Image render_vorticity(const GridField& slice) {
    check_slice(slice, 1);
    Image img = blank(slice);
    std::vector<double> mags;
    mags.reserve(slice.node_count());
    for (uint32_t j = 0; j < slice.dims[1]; ++j)
        for (uint32_t i = 0; i < slice.dims[0]; ++i) mags.push_back(std::abs(slice.at(i, j, 0, 0)));
    const double scale = percentile99(mags);
    if (scale <= 0.0) return img;

    // Diverging anchors at t = 0, 0.25, 0.5, 0.75, 1 of (w/scale + 1)/2.
    static const double anchors[5][3] = {{0.05, 0.15, 0.6},
                                         {0.4, 0.65, 1.0},
                                         {1.0, 1.0, 1.0},
                                         {1.0, 0.55, 0.2},
                                         {0.6, 0.05, 0.05}};
    for (uint32_t j = 0; j < slice.dims[1]; ++j)
        for (uint32_t i = 0; i < slice.dims[0]; ++i) {
            const double w = slice.at(i, j, 0, 0);
            const double t = (std::clamp(w / scale, -1.0, 1.0) + 1.0) / 2.0;
            const double pos = t * 4.0;
            const int seg = std::min(static_cast<int>(pos), 3);
            const double frac = pos - seg;
            uint8_t* px = img.pixel(static_cast<int>(i),
                                    static_cast<int>(slice.dims[1] - 1 - j));
            for (int c = 0; c < 3; ++c)
                px[c] = to_byte(anchors[seg][c] * (1.0 - frac) + anchors[seg + 1][c] * frac);
        }
    return img;
}

}  // namespace dfk

#include "dfk/fieldgen.hpp"

#include <cmath>
#include <stdexcept>

#include "dfk/rng.hpp"

namespace dfk {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Vec eval_vortex3d(const Vec& p) {
    const double fx = 1.0 - p.x * p.x;
    const double fy = 1.0 - p.y * p.y;
    const double fz = 1.0 - p.z * p.z;
    const double px = -2.0 * p.x * fy * fz;
    const double py = -2.0 * p.y * fx * fz;
    const double pz = -2.0 * p.z * fx * fy;
    const double sx = kPi * std::cos(kPi * p.x) * std::sin(kPi * p.y) * std::sin(kPi * p.z);
    const double sz = kPi * std::sin(kPi * p.x) * std::sin(kPi * p.y) * std::cos(kPi * p.z);
    return Vec{py - pz - sz, pz - px, px + sx - py};
}

Vec eval_vortex2d(const Vec& p) {
    return Vec{std::sin(kPi * p.x) * std::cos(kPi * p.y),
               -std::cos(kPi * p.x) * std::sin(kPi * p.y), 0.0};
}

Vec eval_gradient_bump(const Vec& p, const Vec& center, double sigma) {
    const Vec d = p - center;
    const double g = std::exp(-norm2(d) / (2.0 * sigma * sigma));
    return d * (-g / (sigma * sigma));
}

Vec eval_mixed2d(const Vec& p) {
    return eval_vortex2d(p) + eval_gradient_bump(p, Vec{0.3, -0.2, 0.0}, 0.25);
}

double eval_blob(const Vec& p, const Vec& center, double sigma) {
    return std::exp(-norm2(p - center) / (2.0 * sigma * sigma));
}

GridField sample_velocity_grid(int dim, std::array<uint32_t, 3> dims, const Box& bbox,
                               const std::function<Vec(const Vec&)>& velocity) {
    GridField g = GridField::make(dim, dim, dims, bbox);
    for (uint32_t k = 0; k < g.dims[2]; ++k)
        for (uint32_t j = 0; j < g.dims[1]; ++j)
            for (uint32_t i = 0; i < g.dims[0]; ++i) {
                const Vec u = velocity(g.node_pos(i, j, k));
                for (int c = 0; c < dim; ++c) g.at(i, j, k, c) = u[c];
            }
    return g;
}

std::pair<GridField, GridField> gen_projection_pair(int dim, std::array<uint32_t, 3> dims,
                                                    const Box& bbox, double noise_amp,
                                                    uint64_t seed) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("projection pair needs dim 2 or 3");
    struct Bump {
        Vec center;
        double sigma, amp;
    };
    std::vector<Bump> bumps;
    if (noise_amp > 0.0) {
        Rng rng(seed, rng_stream::kFieldgenNoise);
        double min_extent = bbox.extent(0);
        for (int a = 1; a < dim; ++a) min_extent = std::min(min_extent, bbox.extent(a));
        for (int b = 0; b < 5; ++b) {
            Bump bump;
            for (int a = 0; a < dim; ++a) bump.center[a] = rng.uniform(bbox.lo[a], bbox.hi[a]);
            bump.sigma = rng.uniform(0.15, 0.35) * min_extent;
            bump.amp = rng.uniform(-noise_amp, noise_amp);
            bumps.push_back(bump);
        }
    }
    auto clean = [dim](const Vec& p) { return dim == 2 ? eval_vortex2d(p) : eval_vortex3d(p); };
    auto contaminated = [&](const Vec& p) {
        Vec u = clean(p);
        for (const Bump& b : bumps) u += eval_gradient_bump(p, b.center, b.sigma) * b.amp;
        return u;
    };
    return {sample_velocity_grid(dim, dims, bbox, clean),
            sample_velocity_grid(dim, dims, bbox, contaminated)};
}

StitchData gen_laminar_stitch(double angle_deg, const Box& outer, const Box& inner,
                              std::array<uint32_t, 3> dims, const Box& domain) {
    for (int a = 0; a < 2; ++a)
        if (!(inner.lo[a] > outer.lo[a] && inner.hi[a] < outer.hi[a] &&
              inner.lo[a] < inner.hi[a]))
            throw std::invalid_argument("stitch inner box must lie strictly inside the outer box");
    const double rad = angle_deg * kPi / 180.0;
    const Vec outer_flow{1.0, 0.0, 0.0};
    const Vec inner_flow{std::cos(rad), std::sin(rad), 0.0};

    StitchData data;
    data.mask = GridField::make(2, 1, dims, domain);
    data.field = GridField::make(2, 2, dims, domain);
    for (uint32_t j = 0; j < data.mask.dims[1]; ++j)
        for (uint32_t i = 0; i < data.mask.dims[0]; ++i) {
            const Vec p = data.mask.node_pos(i, j, 0);
            const bool in_inner = inner.contains(p, 2);
            const bool in_outer = outer.contains(p, 2);
            const Vec u = in_inner ? inner_flow : outer_flow;
            data.field.at(i, j, 0, 0) = u.x;
            data.field.at(i, j, 0, 1) = u.y;
            if (in_outer && !in_inner) continue;  // annulus: unsupervised
            data.mask.at(i, j, 0, 0) = 1.0;
            data.observations.points.push_back(p);
            data.observations.values.push_back(u);
        }
    return data;
}

ScalarSequence gen_advected_scalar(std::array<uint32_t, 3> dims, const Box& bbox, int frames,
                                   double dt, const Vec& velocity, const Vec& blob_center,
                                   double blob_sigma) {
    if (frames < 1) throw std::invalid_argument("sequence needs at least one frame");
    ScalarSequence seq;
    seq.dt = dt;
    seq.grid = GridField::make(2, frames, dims, bbox);
    for (int f = 0; f < frames; ++f) {
        const Vec shift = velocity * (dt * static_cast<double>(f));
        for (uint32_t j = 0; j < seq.grid.dims[1]; ++j)
            for (uint32_t i = 0; i < seq.grid.dims[0]; ++i)
                seq.grid.at(i, j, 0, f) =
                    eval_blob(seq.grid.node_pos(i, j, 0) - shift, blob_center, blob_sigma);
    }
    return seq;
}

ScalarSequence gen_advected_scalar(std::array<uint32_t, 3> dims, const Box& bbox, int frames,
                                   double dt, const std::function<Vec(const Vec&)>& velocity,
                                   int substeps, const Vec& blob_center, double blob_sigma) {
    if (frames < 1) throw std::invalid_argument("sequence needs at least one frame");
    if (substeps < 1) throw std::invalid_argument("backtrace needs at least one substep");
    ScalarSequence seq;
    seq.dt = dt;
    seq.grid = GridField::make(2, frames, dims, bbox);
    for (int f = 0; f < frames; ++f) {
        const double steps = static_cast<double>(f * substeps);
        const double h = steps > 0.0 ? -dt * static_cast<double>(f) / steps : 0.0;
        for (uint32_t j = 0; j < seq.grid.dims[1]; ++j)
            for (uint32_t i = 0; i < seq.grid.dims[0]; ++i) {
                Vec p = seq.grid.node_pos(i, j, 0);
                for (int s = 0; s < f * substeps; ++s) {
                    const Vec k1 = velocity(p);
                    const Vec k2 = velocity(p + k1 * (h / 2.0));
                    const Vec k3 = velocity(p + k2 * (h / 2.0));
                    const Vec k4 = velocity(p + k3 * h);
                    p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                }
                seq.grid.at(i, j, 0, f) = eval_blob(p, blob_center, blob_sigma);
            }
    }
    return seq;
}

void add_grid_noise(GridField& grid, double sigma, uint64_t seed) {
    if (sigma <= 0.0) return;
    Rng rng(seed, rng_stream::kFieldgenNoise);
    size_t i = 0;
    while (i < grid.data.size()) {
        // Box-Muller; u1 bounded away from zero keeps the log finite.
        const double u1 = std::max(rng.uniform(), 1e-300);
        const double u2 = rng.uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        grid.data[i++] += sigma * r * std::cos(2.0 * kPi * u2);
        if (i < grid.data.size()) grid.data[i++] += sigma * r * std::sin(2.0 * kPi * u2);
    }
}

GridField generate_named(const std::string& name, std::array<uint32_t, 3> dims, const Box& bbox) {
    if (name == "vortex3d" || name == "analytic-vortices")
        return sample_velocity_grid(3, dims, bbox, eval_vortex3d);
    if (name == "vortex2d") return sample_velocity_grid(2, dims, bbox, eval_vortex2d);
    if (name == "mixed2d") return sample_velocity_grid(2, dims, bbox, eval_mixed2d);
    throw std::invalid_argument("unknown generator: " + name);
}

}  // namespace dfk

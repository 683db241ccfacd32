#pragma once

#include <array>
#include <functional>
#include <string>
#include <utility>

#include "dfk/grid.hpp"
#include "dfk/losses.hpp"

namespace dfk {

/// Analytic 3D test flow on [-1,1]^3: the curl of A = (P, P + S, P) with
/// P = (1-x^2)(1-y^2)(1-z^2) and S = sin(pi x) sin(pi y) sin(pi z), hence
/// exactly divergence-free. u(0,0,0) = 0 and u(0.5,0,0) = (0,1,-1).
Vec eval_vortex3d(const Vec& p);

/// Classic 2D cellular vortex (sin pi x cos pi y, -cos pi x sin pi y):
/// divergence-free on any box, zero normal flow through integer-coordinate
/// cell walls.
Vec eval_vortex2d(const Vec& p);

/// Gradient of a Gaussian bump exp(-|p-c|^2 / (2 sigma^2)): curl-free.
Vec eval_gradient_bump(const Vec& p, const Vec& center, double sigma);

/// vortex2d plus a fixed curl-free bump; its divergence-free part is exactly
/// eval_vortex2d.
Vec eval_mixed2d(const Vec& p);

double eval_blob(const Vec& p, const Vec& center, double sigma);

/// Samples an analytic velocity on grid nodes (channels = dim).
GridField sample_velocity_grid(int dim, std::array<uint32_t, 3> dims, const Box& bbox,
                               const std::function<Vec(const Vec&)>& velocity);

/// Clean divergence-free base (vortex2d / vortex3d) and the same field
/// contaminated by the gradient of a seeded smooth random potential (sum of
/// Gaussian bumps) of the given amplitude. The contamination is curl-free,
/// so the clean field is the exact divergence-free part.
std::pair<GridField, GridField> gen_projection_pair(int dim, std::array<uint32_t, 3> dims,
                                                    const Box& bbox, double noise_amp,
                                                    uint64_t seed);

/// Piecewise-laminar inpainting scenario: unit +x flow outside the outer
/// box, unit flow rotated by angle_deg inside the inner box, and the annulus
/// between them unsupervised.
struct StitchData {
    ObservationSet observations;  // supervised grid samples only
    GridField mask;               // scalar grid: 1 supervised, 0 hidden
    GridField field;              // velocity at every node (annulus: outer flow)
};
StitchData gen_laminar_stitch(double angle_deg, const Box& outer, const Box& inner,
                              std::array<uint32_t, 3> dims, const Box& domain);

/// Gaussian blob advected by a constant velocity, sampled exactly:
/// sigma(x, f dt) = blob(x - f dt u).
ScalarSequence gen_advected_scalar(std::array<uint32_t, 3> dims, const Box& bbox, int frames,
                                   double dt, const Vec& velocity, const Vec& blob_center,
                                   double blob_sigma);

/// Gaussian blob advected by a steady velocity field, sampled by RK4
/// backtracing of characteristics with `substeps` stages per frame step
/// (truncation O(dt^4) per stage).
ScalarSequence gen_advected_scalar(std::array<uint32_t, 3> dims, const Box& bbox, int frames,
                                   double dt, const std::function<Vec(const Vec&)>& velocity,
                                   int substeps, const Vec& blob_center, double blob_sigma);

/// Adds iid Gaussian noise to every channel value (Box-Muller over the
/// seeded generator).
void add_grid_noise(GridField& grid, double sigma, uint64_t seed);

/// Named velocity generators for the command line.
GridField generate_named(const std::string& name, std::array<uint32_t, 3> dims, const Box& bbox);

}  // namespace dfk

#pragma once

#include <cstdint>
#include <vector>

#include "dfk/field.hpp"
#include "dfk/vec.hpp"

namespace dfk {

/// Kernel placement configuration. eta scales the common radius assigned to
/// all kernels after placement.
struct InitConfig {
    Box domain;
    int dim = 3;
    size_t target_count = 1000;
    double eta = 6.0;
    int attempts = 30;  // Bridson candidate attempts per active point
    uint64_t seed = 0;
};

/// Bridson fast Poisson-disk sampling: pairwise distances >= r_min,
/// near-maximal coverage, deterministic for a fixed seed.
std::vector<Vec> poisson_disk(const Box& domain, int dim, double r_min, int attempts,
                              uint64_t seed);

/// Common kernel radius h = eta * [Gamma(1 + d/2) V / (N pi^(d/2))]^(1/d),
/// evaluated with the exact d = 2/3 constants (Gamma(2) = 1,
/// Gamma(5/2)/pi^(3/2) = 3/(4 pi)).
double init_radii(size_t count, double volume, int d, double eta);

/// Poisson-disk centers calibrated to land within +/-20% of the requested
/// count, uniform radii from the achieved count, all weights zero.
KernelField init_field(const InitConfig& config, KernelType type, int frames);

}  // namespace dfk

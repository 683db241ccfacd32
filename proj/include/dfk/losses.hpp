#pragma once

#include <span>
#include <vector>

#include "dfk/field.hpp"
#include "dfk/grid.hpp"

namespace dfk {

/// Velocity supervision samples (one frame).
struct ObservationSet {
    std::vector<Vec> points;
    std::vector<Vec> values;
    int frame = 0;
    double region_volume = 1.0;  // bookkeeping only
};

/// No-penetration / solid-velocity samples on domain boundaries.
struct BoundarySet {
    std::vector<Vec> points;
    std::vector<Vec> velocities;  // target solid velocity, default zero
};

/// Passive-scalar sequence: F frames stored as interleaved channels of one
/// grid, plus the frame spacing.
struct ScalarSequence {
    GridField grid;  // channels == frame count
    double dt = 1.0;

    int frames() const { return grid.channels; }
    double sigma(int frame, uint32_t i, uint32_t j, uint32_t k) const {
        return grid.at(i, j, k, frame);
    }
};

/// Which parameter classes receive gradients / optimizer updates.
struct TrainMask {
    bool weights = true;
    bool centers = false;
    bool radii = false;

    bool geometry() const { return centers || radii; }
};

/// Gradient accumulator shaped like the enabled parameter classes.
struct ParamGrads {
    std::vector<double> weights;  // like field.weights when enabled
    std::vector<Vec> centers;     // N when enabled
    std::vector<double> radii;    // N when enabled

    static ParamGrads like(const KernelField& field, const TrainMask& mask);
    void add(const ParamGrads& other);
    void add_alpha(const KernelField& field, int frame, size_t kernel, const Vec& dalpha);
};

struct LossReport {
    double obs = 0.0;
    double div = 0.0;
    double bou = 0.0;
    double reg = 0.0;
    double con = 0.0;
    double total = 0.0;
};

/// Term weights and shared evaluation points for the volume terms.
struct LossConfig {
    double lambda_div = 0.0;
    double lambda_bou = 0.0;
    double lambda_reg = 0.0;
    double lambda_con = 0.0;
    std::vector<Vec> eval_points;  // L_div / L_reg / L_con sample set
};

enum class TimeScheme { Central, ForwardOneSided, BackwardOneSided };

/// Mean Euclidean residual norm over the observation set (optionally a batch
/// subset given as indices). Gradients are scaled by grad_scale and added to
/// *grads for every class enabled in mask; the norm subgradient at residuals
/// below 1e-12 is zero.
double loss_obs_fit(const KernelField& field, const HashGrid& grid, const ObservationSet& obs,
                    const TrainMask& mask, ParamGrads* grads, double grad_scale = 1.0,
                    std::span<const uint32_t> subset = {}, const PairCache* cache = nullptr);

/// Mean |sigma_t + u . grad(sigma)| over interior grid nodes of one frame.
/// The public contract requires an interior frame (central sigma_t); the
/// scheme parameter lets the inference task use one-sided second-order
/// differences at the sequence ends.
double loss_obs_advection(const KernelField& field, const HashGrid& grid,
                          const ScalarSequence& scalars, int frame, const TrainMask& mask,
                          ParamGrads* grads, double grad_scale = 1.0,
                          TimeScheme scheme = TimeScheme::Central,
                          const PairCache* cache = nullptr);

/// Mean |analytic divergence| over eval_points; exactly zero (no evaluation,
/// no gradient) for divergence-free kinds.
double loss_div(const KernelField& field, const HashGrid& grid, std::span<const Vec> eval_points,
                const TrainMask& mask, ParamGrads* grads, double grad_scale = 1.0,
                const PairCache* cache = nullptr);

/// Mean residual norm against boundary velocities.
double loss_bou(const KernelField& field, const HashGrid& grid, const BoundarySet& boundary,
                const TrainMask& mask, ParamGrads* grads, double grad_scale = 1.0);

/// Mean velocity norm over eval_points and frames.
double loss_reg(const KernelField& field, const HashGrid& grid, std::span<const Vec> eval_points,
                const TrainMask& mask, ParamGrads* grads, double grad_scale = 1.0,
                const PairCache* cache = nullptr);

/// Mean norm of the temporal velocity derivative over eval_points and
/// frames; interior frames use central differences, end frames one-sided.
double loss_con(const KernelField& field, const HashGrid& grid, std::span<const Vec> eval_points,
                const TrainMask& mask, ParamGrads* grads, double grad_scale = 1.0,
                const PairCache* cache = nullptr);

/// Inputs of the combined objective; null members disable their terms.
struct LossInputs {
    const ObservationSet* obs = nullptr;
    const ScalarSequence* scalars = nullptr;  // advection supervision (all frames)
    const BoundarySet* boundary = nullptr;
    // Influencer caches, valid only while geometry is frozen:
    const PairCache* obs_cache = nullptr;     // aligned with obs->points
    const PairCache* scalar_cache = nullptr;  // aligned with interior grid nodes
    const PairCache* eval_cache = nullptr;    // aligned with cfg.eval_points
};

/// L = L_obs + lambda_div L_div + lambda_bou L_bou + lambda_reg L_reg +
/// lambda_con L_con, with per-term values reported unweighted. The subset
/// restricts the fit observation term (minibatch); scalar advection
/// supervision averages over all frames with one-sided ends.
LossReport total_loss(const KernelField& field, const HashGrid& grid, const LossInputs& inputs,
                      const LossConfig& cfg, const TrainMask& mask, ParamGrads* grads,
                      std::span<const uint32_t> subset = {});

/// sigma_t and spatial gradient helpers (one-sided second-order at grid and
/// sequence boundaries).
double scalar_time_derivative(const ScalarSequence& seq, int frame, uint32_t i, uint32_t j,
                              uint32_t k, TimeScheme scheme);
Vec scalar_gradient(const ScalarSequence& seq, int frame, uint32_t i, uint32_t j, uint32_t k);

}  // namespace dfk

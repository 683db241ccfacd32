#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dfk/losses.hpp"

namespace dfk {

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First and second moment buffers over the flattened trainable vector
/// (weights, then center components, then radii, per the mask).
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    int64_t t = 0;
};

size_t flat_param_count(const KernelField& field, const TrainMask& mask);

/// One bias-corrected Adam update in place. The state is sized on first use
/// and must keep matching the mask afterwards.
void adam_step(KernelField& field, const ParamGrads& grads, const TrainMask& mask,
               AdamState& state, const AdamHyper& hp);

struct TrainConfig {
    int epochs = 2000;
    int batch_size = 0;  // 0: full batch with plateau decay, else minibatch
    AdamHyper adam;
    double gamma = 0.95;           // per-epoch step decay (minibatch regime)
    double plateau_factor = 0.9;   // step decay on plateau (full batch regime)
    double plateau_rel = 1e-4;     // required relative improvement
    int plateau_epochs = 20;       // epochs without improvement before decay
    TrainMask mask;
    uint64_t seed = 0;             // batch shuffling
    double min_radius = 0.0;       // radii clamp after every step (0: off)
    // Reductions always run in fixed chunk order, so training is reproducible
    // regardless of thread count; the flag is carried for config echo.
    bool deterministic = true;
};

struct EpochStats {
    int epoch = 0;
    LossReport loss;  // minibatch regime: mean over the epoch's batches
    double lr = 0.0;
};

struct TrainResult {
    std::vector<EpochStats> history;
    double final_loss = 0.0;
};

/// Objective callback: evaluates the loss (optionally restricted to a batch
/// subset of the supervision samples) and accumulates gradients.
using LossFn = std::function<LossReport(const KernelField&, const HashGrid&, const TrainMask&,
                                        ParamGrads*, std::span<const uint32_t>)>;

/// Adam training loop. sample_count is the size of the supervision set that
/// minibatching shuffles; the spatial hash is rebuilt per step while geometry
/// trains and reused otherwise. Throws TrainingDiverged on non-finite loss.
TrainResult run_training(KernelField& field, const TrainConfig& cfg, size_t sample_count,
                         const LossFn& loss);

}  // namespace dfk

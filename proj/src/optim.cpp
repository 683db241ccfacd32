#include "dfk/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dfk/errors.hpp"
#include "dfk/rng.hpp"

namespace dfk {

size_t flat_param_count(const KernelField& field, const TrainMask& mask) {
    size_t n = 0;
    if (mask.weights) n += field.weights.size();
    if (mask.centers) n += field.kernel_count() * static_cast<size_t>(field.dim);
    if (mask.radii) n += field.kernel_count();
    return n;
}

void adam_step(KernelField& field, const ParamGrads& grads, const TrainMask& mask,
               AdamState& state, const AdamHyper& hp) {
    const size_t count = flat_param_count(field, mask);
    if (state.m.empty()) {
        state.m.assign(count, 0.0);
        state.v.assign(count, 0.0);
    }
    if (state.m.size() != count) throw std::invalid_argument("optimizer state size mismatch");

    state.t += 1;
    const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));
    size_t cursor = 0;
    auto update = [&](double& p, double g) {
        if (!std::isfinite(g)) throw TrainingDiverged("non-finite gradient");
        double& m = state.m[cursor];
        double& v = state.v[cursor];
        ++cursor;
        m = hp.beta1 * m + (1.0 - hp.beta1) * g;
        v = hp.beta2 * v + (1.0 - hp.beta2) * g * g;
        p -= hp.lr * (m / c1) / (std::sqrt(v / c2) + hp.eps);
    };

    if (mask.weights)
        for (size_t i = 0; i < field.weights.size(); ++i) update(field.weights[i], grads.weights[i]);
    if (mask.centers)
        for (size_t k = 0; k < field.kernel_count(); ++k)
            for (int axis = 0; axis < field.dim; ++axis)
                update(field.centers[k][axis], grads.centers[k][axis]);
    if (mask.radii)
        for (size_t k = 0; k < field.kernel_count(); ++k) update(field.radii[k], grads.radii[k]);
}

namespace {

void clamp_radii(KernelField& field, double min_radius) {
    if (min_radius <= 0.0) return;
    for (double& h : field.radii) h = std::max(h, min_radius);
}

void check_finite(const LossReport& rep) {
    if (!std::isfinite(rep.total))
        throw TrainingDiverged("non-finite training loss; lower the step size");
}

}  // namespace

TrainResult run_training(KernelField& field, const TrainConfig& cfg, size_t sample_count,
                         const LossFn& loss) {
    TrainResult result;
    result.history.reserve(static_cast<size_t>(std::max(cfg.epochs, 0)));

    HashGrid grid = HashGrid::build(field);
    const bool moving_geometry = cfg.mask.geometry();
    AdamState state;
    AdamHyper hp = cfg.adam;

    Rng rng(cfg.seed, rng_stream::kBatchShuffle);
    std::vector<uint32_t> order(cfg.batch_size > 0 ? sample_count : 0);
    std::iota(order.begin(), order.end(), 0u);

    double best = std::numeric_limits<double>::infinity();
    int stale = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        LossReport epoch_loss;
        const double epoch_lr = hp.lr;
        if (cfg.batch_size > 0) {
            rng.shuffle(std::span<uint32_t>(order));
            const size_t bs = static_cast<size_t>(cfg.batch_size);
            const size_t batches = (sample_count + bs - 1) / bs;
            for (size_t b = 0; b < batches; ++b) {
                const size_t lo = b * bs;
                const size_t hi = std::min(lo + bs, sample_count);
                std::span<const uint32_t> subset(order.data() + lo, hi - lo);
                if (moving_geometry) grid = HashGrid::build(field);
                ParamGrads grads = ParamGrads::like(field, cfg.mask);
                const LossReport rep = loss(field, grid, cfg.mask, &grads, subset);
                check_finite(rep);
                adam_step(field, grads, cfg.mask, state, hp);
                clamp_radii(field, cfg.min_radius);
                epoch_loss.obs += rep.obs;
                epoch_loss.div += rep.div;
                epoch_loss.bou += rep.bou;
                epoch_loss.reg += rep.reg;
                epoch_loss.con += rep.con;
                epoch_loss.total += rep.total;
            }
            const double inv = 1.0 / static_cast<double>(batches);
            epoch_loss.obs *= inv;
            epoch_loss.div *= inv;
            epoch_loss.bou *= inv;
            epoch_loss.reg *= inv;
            epoch_loss.con *= inv;
            epoch_loss.total *= inv;
            hp.lr *= cfg.gamma;
        } else {
            if (moving_geometry) grid = HashGrid::build(field);
            ParamGrads grads = ParamGrads::like(field, cfg.mask);
            epoch_loss = loss(field, grid, cfg.mask, &grads, {});
            check_finite(epoch_loss);
            adam_step(field, grads, cfg.mask, state, hp);
            clamp_radii(field, cfg.min_radius);
            if (epoch_loss.total < best * (1.0 - cfg.plateau_rel)) {
                stale = 0;
            } else if (++stale >= cfg.plateau_epochs) {
                hp.lr *= cfg.plateau_factor;
                stale = 0;
            }
            best = std::min(best, epoch_loss.total);
        }
        result.history.push_back({epoch, epoch_loss, epoch_lr});
        result.final_loss = epoch_loss.total;
    }
    return result;
}

}  // namespace dfk

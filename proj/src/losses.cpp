#include "dfk/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "dfk/parallel.hpp"

namespace dfk {
namespace {

/// Residuals below this norm contribute a zero subgradient.
constexpr double kNormFloor = 1e-12;

/// Chunked mean of per_sample(i, local, scratch) with ordered reduction of
/// both the value and (when requested) per-chunk gradient accumulators.
template <typename Fn>
double mean_term(size_t count, const KernelField& field, const TrainMask& mask, ParamGrads* out,
                 Fn&& per_sample) {
    if (count == 0) return 0.0;
    const auto chunks = make_chunks(count);
    std::vector<double> sums(chunks.size(), 0.0);
    std::vector<ParamGrads> locals;
    if (out) {
        locals.reserve(chunks.size());
        for (size_t c = 0; c < chunks.size(); ++c) locals.push_back(ParamGrads::like(field, mask));
    }
    for_each_chunk(count, [&](const ChunkRange& c) {
        ParamGrads* local = out ? &locals[c.index] : nullptr;
        std::vector<uint32_t> scratch;
        double s = 0.0;
        for (size_t i = c.begin; i < c.end; ++i) s += per_sample(i, local, scratch);
        sums[c.index] = s;
    });
    double total = 0.0;
    for (size_t c = 0; c < chunks.size(); ++c) total += sums[c];
    if (out)
        for (const auto& l : locals) out->add(l);
    return total / static_cast<double>(count);
}

/// Adds velocity-path adjoints of every influencer for upstream derivative q.
void add_velocity_adjoints(const KernelField& field, int frame, std::span<const uint32_t> infl,
                           const Vec& p, const Vec& q, const TrainMask& mask, ParamGrads* local) {
    AdjointBuffers adj{};
    adj.dl_du = q;
    for (uint32_t k : infl) {
        const Vec off = p - field.centers[k];
        const double h = field.radii[k];
        if (mask.weights)
            local->add_alpha(field, frame, k,
                             adjoint_weights(field.type, off, h, field.dim, adj,
                                             AdjointPath::Velocity));
        if (mask.geometry()) {
            const GeometryGrad gg =
                adjoint_geometry(field.type, off, h, field.weight_vec(frame, k), q, field.dim);
            if (mask.centers) local->centers[k] += gg.d_center;
            if (mask.radii) local->radii[k] += gg.d_radius;
        }
    }
}

Vec summed_velocity(const KernelField& field, int frame, std::span<const uint32_t> infl,
                    const Vec& p) {
    Vec u{};
    for (uint32_t k : infl)
        u += velocity_contribution(field.type, p - field.centers[k], field.radii[k],
                                   field.weight_vec(frame, k), field.dim);
    return u;
}

std::span<const uint32_t> influencers(const KernelField& field, const HashGrid& grid,
                                      const PairCache* cache, size_t point_idx, const Vec& p,
                                      std::vector<uint32_t>& scratch) {
    if (cache) return cache->influencers(point_idx);
    query_support(grid, field, p, scratch);
    return scratch;
}

/// One sample of a mean-residual-norm velocity term: value |u - target| and
/// the scaled adjoints of every enabled parameter class.
double velocity_norm_sample(const KernelField& field, const HashGrid& grid, const PairCache* cache,
                            size_t point_idx, const Vec& p, const Vec& target, int frame,
                            const TrainMask& mask, ParamGrads* local, double w,
                            std::vector<uint32_t>& scratch) {
    const auto infl = influencers(field, grid, cache, point_idx, p, scratch);
    const Vec resid = summed_velocity(field, frame, infl, p) - target;
    const double n = norm(resid);
    if (local && n > kNormFloor)
        add_velocity_adjoints(field, frame, infl, p, resid * (w / n), mask, local);
    return n;
}

/// Frame stencil of the second-order temporal derivative at frame f.
struct TimeStencil {
    int frames[3];
    double coefs[3];
    int taps;
};

TimeStencil time_stencil(int f, int total, double dt) {
    const double c = 1.0 / (2.0 * dt);
    if (total == 2) return {{0, 1, 0}, {-1.0 / dt, 1.0 / dt, 0.0}, 2};
    if (f == 0) return {{0, 1, 2}, {-3.0 * c, 4.0 * c, -c}, 3};
    if (f == total - 1) return {{f, f - 1, f - 2}, {3.0 * c, -4.0 * c, c}, 3};
    return {{f - 1, f + 1, 0}, {-c, c, 0.0}, 2};
}

}  // namespace

ParamGrads ParamGrads::like(const KernelField& field, const TrainMask& mask) {
    ParamGrads g;
    if (mask.weights) g.weights.assign(field.weights.size(), 0.0);
    if (mask.centers) g.centers.assign(field.kernel_count(), Vec{});
    if (mask.radii) g.radii.assign(field.kernel_count(), 0.0);
    return g;
}

void ParamGrads::add(const ParamGrads& other) {
    for (size_t i = 0; i < other.weights.size(); ++i) weights[i] += other.weights[i];
    for (size_t i = 0; i < other.centers.size(); ++i) centers[i] += other.centers[i];
    for (size_t i = 0; i < other.radii.size(); ++i) radii[i] += other.radii[i];
}

void ParamGrads::add_alpha(const KernelField& field, int frame, size_t kernel, const Vec& dalpha) {
    const size_t off = field.weight_offset(frame, kernel);
    if (field.weight_width() == 1) {
        weights[off] += dalpha.z;
        return;
    }
    weights[off] += dalpha.x;
    weights[off + 1] += dalpha.y;
    if (field.weight_width() == 3) weights[off + 2] += dalpha.z;
}

double loss_obs_fit(const KernelField& field, const HashGrid& grid, const ObservationSet& obs,
                    const TrainMask& mask, ParamGrads* grads, double grad_scale,
                    std::span<const uint32_t> subset, const PairCache* cache) {
    if (obs.points.size() != obs.values.size())
        throw std::invalid_argument("observation points/values size mismatch");
    const size_t count = subset.empty() ? obs.points.size() : subset.size();
    const double w = grad_scale / static_cast<double>(count == 0 ? 1 : count);
    return mean_term(count, field, mask, grads,
                     [&](size_t i, ParamGrads* local, std::vector<uint32_t>& scratch) {
                         const size_t idx = subset.empty() ? i : subset[i];
                         return velocity_norm_sample(field, grid, cache, idx, obs.points[idx],
                                                     obs.values[idx], obs.frame, mask, local, w,
                                                     scratch);
                     });
}

double loss_bou(const KernelField& field, const HashGrid& grid, const BoundarySet& boundary,
                const TrainMask& mask, ParamGrads* grads, double grad_scale) {
    if (!boundary.velocities.empty() && boundary.velocities.size() != boundary.points.size())
        throw std::invalid_argument("boundary points/velocities size mismatch");
    const size_t count = boundary.points.size();
    const double w = grad_scale / static_cast<double>(count == 0 ? 1 : count);
    return mean_term(count, field, mask, grads,
                     [&](size_t i, ParamGrads* local, std::vector<uint32_t>& scratch) {
                         const Vec target =
                             boundary.velocities.empty() ? Vec{} : boundary.velocities[i];
                         return velocity_norm_sample(field, grid, nullptr, i, boundary.points[i],
                                                     target, 0, mask, local, w, scratch);
                     });
}

double loss_div(const KernelField& field, const HashGrid& grid, std::span<const Vec> eval_points,
                const TrainMask& mask, ParamGrads* grads, double grad_scale,
                const PairCache* cache) {
    if (divergence_free_kind(field.type.kind)) return 0.0;
    const size_t count = eval_points.size();
    const int frames = field.frames;
    const double w = grad_scale / static_cast<double>((count == 0 ? 1 : count) * frames);
    return mean_term(
        count, field, mask, grads,
        [&](size_t i, ParamGrads* local, std::vector<uint32_t>& scratch) {
            const Vec& p = eval_points[i];
            const auto infl = influencers(field, grid, cache, i, p, scratch);
            double result = 0.0;
            for (int f = 0; f < frames; ++f) {
                double dv = 0.0;
                for (uint32_t k : infl)
                    dv += divergence_contribution(field.type, p - field.centers[k],
                                                  field.radii[k], field.weight_vec(f, k),
                                                  field.dim);
                result += std::abs(dv);
                if (!local || std::abs(dv) <= kNormFloor) continue;
                const double sign = dv > 0.0 ? w : -w;
                for (uint32_t k : infl) {
                    const DivergenceGrads dg =
                        divergence_with_grads(field.type, p - field.centers[k], field.radii[k],
                                              field.weight_vec(f, k), field.dim, sign);
                    if (mask.weights) local->add_alpha(field, f, k, dg.d_alpha);
                    if (mask.centers) local->centers[k] += dg.d_center;
                    if (mask.radii) local->radii[k] += dg.d_radius;
                }
            }
            return result / static_cast<double>(frames);
        });
}

double loss_reg(const KernelField& field, const HashGrid& grid, std::span<const Vec> eval_points,
                const TrainMask& mask, ParamGrads* grads, double grad_scale,
                const PairCache* cache) {
    const size_t count = eval_points.size();
    const int frames = field.frames;
    const double w = grad_scale / static_cast<double>((count == 0 ? 1 : count) * frames);
    return mean_term(count, field, mask, grads,
                     [&](size_t i, ParamGrads* local, std::vector<uint32_t>& scratch) {
                         const Vec& p = eval_points[i];
                         const auto infl = influencers(field, grid, cache, i, p, scratch);
                         double result = 0.0;
                         for (int f = 0; f < frames; ++f) {
                             const Vec u = summed_velocity(field, f, infl, p);
                             const double n = norm(u);
                             result += n;
                             if (local && n > kNormFloor)
                                 add_velocity_adjoints(field, f, infl, p, u * (w / n), mask,
                                                       local);
                         }
                         return result / static_cast<double>(frames);
                     });
}

double loss_con(const KernelField& field, const HashGrid& grid, std::span<const Vec> eval_points,
                const TrainMask& mask, ParamGrads* grads, double grad_scale,
                const PairCache* cache) {
    const int frames = field.frames;
    if (frames < 2) return 0.0;
    if (!(field.frame_dt > 0.0))
        throw std::invalid_argument("temporal smoothness requires a positive frame spacing");
    const size_t count = eval_points.size();
    const double w = grad_scale / static_cast<double>((count == 0 ? 1 : count) * frames);
    return mean_term(
        count, field, mask, grads,
        [&](size_t i, ParamGrads* local, std::vector<uint32_t>& scratch) {
            const Vec& p = eval_points[i];
            const auto infl = influencers(field, grid, cache, i, p, scratch);
            double result = 0.0;
            for (int f = 0; f < frames; ++f) {
                const TimeStencil st = time_stencil(f, frames, field.frame_dt);
                Vec ut{};
                for (uint32_t k : infl) {
                    Vec alpha{};
                    for (int t = 0; t < st.taps; ++t)
                        alpha += field.weight_vec(st.frames[t], k) * st.coefs[t];
                    ut += velocity_contribution(field.type, p - field.centers[k], field.radii[k],
                                                alpha, field.dim);
                }
                const double n = norm(ut);
                result += n;
                if (!local || n <= kNormFloor) continue;
                const Vec q = ut * (w / n);
                AdjointBuffers adj{};
                adj.dl_du = q;
                for (uint32_t k : infl) {
                    const Vec off = p - field.centers[k];
                    const double h = field.radii[k];
                    if (mask.weights) {
                        const Vec base = adjoint_weights(field.type, off, h, field.dim, adj,
                                                         AdjointPath::Velocity);
                        for (int t = 0; t < st.taps; ++t)
                            local->add_alpha(field, st.frames[t], k, base * st.coefs[t]);
                    }
                    if (mask.geometry()) {
                        Vec alpha{};
                        for (int t = 0; t < st.taps; ++t)
                            alpha += field.weight_vec(st.frames[t], k) * st.coefs[t];
                        const GeometryGrad gg =
                            adjoint_geometry(field.type, off, h, alpha, q, field.dim);
                        if (mask.centers) local->centers[k] += gg.d_center;
                        if (mask.radii) local->radii[k] += gg.d_radius;
                    }
                }
            }
            return result / static_cast<double>(frames);
        });
}

double scalar_time_derivative(const ScalarSequence& seq, int frame, uint32_t i, uint32_t j,
                              uint32_t k, TimeScheme scheme) {
    const int total = seq.frames();
    const double c = 1.0 / (2.0 * seq.dt);
    switch (scheme) {
        case TimeScheme::Central:
            if (frame < 1 || frame > total - 2)
                throw std::out_of_range("central time derivative needs an interior frame");
            return (seq.sigma(frame + 1, i, j, k) - seq.sigma(frame - 1, i, j, k)) * c;
        case TimeScheme::ForwardOneSided:
            if (frame > total - 3)
                throw std::out_of_range("forward time derivative needs two later frames");
            return (-3.0 * seq.sigma(frame, i, j, k) + 4.0 * seq.sigma(frame + 1, i, j, k) -
                    seq.sigma(frame + 2, i, j, k)) *
                   c;
        case TimeScheme::BackwardOneSided:
            if (frame < 2)
                throw std::out_of_range("backward time derivative needs two earlier frames");
            return (3.0 * seq.sigma(frame, i, j, k) - 4.0 * seq.sigma(frame - 1, i, j, k) +
                    seq.sigma(frame - 2, i, j, k)) *
                   c;
    }
    return 0.0;
}

namespace {

/// Second-order first derivative along one axis of one frame channel.
double axis_derivative(const ScalarSequence& seq, int frame, uint32_t idx[3], int axis,
                       uint32_t n, double spacing) {
    if (n < 2 || spacing == 0.0) return 0.0;
    auto sample = [&](uint32_t v) {
        uint32_t at[3] = {idx[0], idx[1], idx[2]};
        at[axis] = v;
        return seq.sigma(frame, at[0], at[1], at[2]);
    };
    const uint32_t i = idx[axis];
    if (n == 2) return (sample(1) - sample(0)) / spacing;
    if (i == 0) return (-3.0 * sample(0) + 4.0 * sample(1) - sample(2)) / (2.0 * spacing);
    if (i == n - 1)
        return (3.0 * sample(n - 1) - 4.0 * sample(n - 2) + sample(n - 3)) / (2.0 * spacing);
    return (sample(i + 1) - sample(i - 1)) / (2.0 * spacing);
}

}  // namespace

Vec scalar_gradient(const ScalarSequence& seq, int frame, uint32_t i, uint32_t j, uint32_t k) {
    uint32_t idx[3] = {i, j, k};
    Vec g{axis_derivative(seq, frame, idx, 0, seq.grid.dims[0], seq.grid.spacing(0)),
          axis_derivative(seq, frame, idx, 1, seq.grid.dims[1], seq.grid.spacing(1)), 0.0};
    if (seq.grid.dim == 3)
        g.z = axis_derivative(seq, frame, idx, 2, seq.grid.dims[2], seq.grid.spacing(2));
    return g;
}

double loss_obs_advection(const KernelField& field, const HashGrid& grid,
                          const ScalarSequence& scalars, int frame, const TrainMask& mask,
                          ParamGrads* grads, double grad_scale, TimeScheme scheme,
                          const PairCache* cache) {
    const auto& g = scalars.grid;
    if (g.dims[0] < 3 || g.dims[1] < 3 || (g.dim == 3 && g.dims[2] < 3))
        throw std::invalid_argument("advection loss needs at least 3 nodes per axis");
    if (!(scalars.dt > 0.0)) throw std::invalid_argument("scalar sequence needs dt > 0");
    const uint32_t ix = g.dims[0] - 2;
    const uint32_t iy = g.dims[1] - 2;
    const uint32_t iz = g.dim == 3 ? g.dims[2] - 2 : 1;
    const size_t count = static_cast<size_t>(ix) * iy * iz;
    const double w = grad_scale / static_cast<double>(count);
    return mean_term(
        count, field, mask, grads,
        [&](size_t n, ParamGrads* local, std::vector<uint32_t>& scratch) {
            const uint32_t i = 1 + static_cast<uint32_t>(n % ix);
            const uint32_t j = 1 + static_cast<uint32_t>((n / ix) % iy);
            const uint32_t k = g.dim == 3 ? 1 + static_cast<uint32_t>(n / (static_cast<size_t>(ix) * iy))
                                          : 0;
            const Vec p = g.node_pos(i, j, k);
            const double st = scalar_time_derivative(scalars, frame, i, j, k, scheme);
            const Vec sg = scalar_gradient(scalars, frame, i, j, k);
            const auto infl = influencers(field, grid, cache, n, p, scratch);
            const double resid = st + dot(summed_velocity(field, frame, infl, p), sg);
            const double a = std::abs(resid);
            if (local && a > kNormFloor)
                add_velocity_adjoints(field, frame, infl, p, sg * (resid > 0.0 ? w : -w), mask,
                                      local);
            return a;
        });
}

LossReport total_loss(const KernelField& field, const HashGrid& grid, const LossInputs& inputs,
                      const LossConfig& cfg, const TrainMask& mask, ParamGrads* grads,
                      std::span<const uint32_t> subset) {
    LossReport r;
    if (inputs.obs)
        r.obs += loss_obs_fit(field, grid, *inputs.obs, mask, grads, 1.0, subset,
                              inputs.obs_cache);
    if (inputs.scalars) {
        const int total = inputs.scalars->frames();
        if (total < 3)
            throw std::invalid_argument("scalar supervision needs at least 3 frames");
        const double inv = 1.0 / static_cast<double>(total);
        double s = 0.0;
        for (int f = 0; f < total; ++f) {
            const TimeScheme scheme = f == 0 ? TimeScheme::ForwardOneSided
                                     : f == total - 1 ? TimeScheme::BackwardOneSided
                                                      : TimeScheme::Central;
            s += loss_obs_advection(field, grid, *inputs.scalars, f, mask, grads, inv, scheme,
                                    inputs.scalar_cache);
        }
        r.obs += s * inv;
    }
    if (cfg.lambda_div > 0.0)
        r.div = loss_div(field, grid, cfg.eval_points, mask, grads, cfg.lambda_div,
                         inputs.eval_cache);
    if (cfg.lambda_bou > 0.0 && inputs.boundary)
        r.bou = loss_bou(field, grid, *inputs.boundary, mask, grads, cfg.lambda_bou);
    if (cfg.lambda_reg > 0.0)
        r.reg = loss_reg(field, grid, cfg.eval_points, mask, grads, cfg.lambda_reg,
                         inputs.eval_cache);
    if (cfg.lambda_con > 0.0 && field.frames > 1)
        r.con = loss_con(field, grid, cfg.eval_points, mask, grads, cfg.lambda_con,
                         inputs.eval_cache);
    r.total = r.obs + cfg.lambda_div * r.div + cfg.lambda_bou * r.bou + cfg.lambda_reg * r.reg +
              cfg.lambda_con * r.con;
    return r;
}

}  // namespace dfk

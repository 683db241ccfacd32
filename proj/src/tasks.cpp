#include "dfk/tasks.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "dfk/errors.hpp"
#include "dfk/io.hpp"
#include "dfk/metrics.hpp"
#include "dfk/rng.hpp"

namespace dfk {
namespace {

using nlohmann::json;

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// "a/b.dfkm" + "curlfree" -> "a/b.curlfree.dfkm".
std::string derived_path(const std::string& path, const std::string& tag) {
    const size_t slash = path.find_last_of('/');
    const size_t dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path + "." + tag;
    return path.substr(0, dot) + "." + tag + path.substr(dot);
}

double relative_l1(const GridField& ref, const GridField& test) {
    double num = 0.0, den = 0.0;
    for (uint32_t k = 0; k < ref.dims[2]; ++k)
        for (uint32_t j = 0; j < ref.dims[1]; ++j)
            for (uint32_t i = 0; i < ref.dims[0]; ++i) {
                num += norm(test.vector_at(i, j, k) - ref.vector_at(i, j, k));
                den += norm(ref.vector_at(i, j, k));
            }
    return den > 0.0 ? num / den : 0.0;
}

json loss_json(const LossReport& rep) {
    return json{{"obs", rep.obs}, {"div", rep.div}, {"bou", rep.bou},
                {"reg", rep.reg}, {"con", rep.con}, {"total", rep.total}};
}

void write_manifest(const TaskSpec& spec, const TaskResult& result,
                    const std::vector<std::pair<std::string, std::string>>& extra_outputs) {
    if (spec.manifest_path.empty()) return;
    const KernelField& model = result.model;
    double mean_radius = 0.0;
    for (double h : model.radii) mean_radius += h;
    if (!model.radii.empty()) mean_radius /= static_cast<double>(model.radii.size());

    json trainable = json::array();
    if (spec.train.mask.weights) trainable.push_back("weights");
    if (spec.train.mask.centers) trainable.push_back("centers");
    if (spec.train.mask.radii) trainable.push_back("radii");

    json outputs{{"model", spec.output_model},
                 {"field", spec.output_field},
                 {"history", spec.history_path}};
    for (const auto& [key, value] : extra_outputs) outputs[key] = value;

    json doc{
        {"task", task_name(spec.task)},
        {"input", spec.input_path},
        {"reference", spec.reference_path},
        {"outputs", outputs},
        {"kernel",
         {{"kind", kind_name(model.type.kind)},
          {"base", family_name(model.type.base)},
          {"dim", model.dim},
          {"frames", model.frames},
          {"count", model.kernel_count()},
          {"target_count", spec.init.target_count},
          {"eta", spec.init.eta},
          {"mean_radius", mean_radius}}},
        {"train",
         {{"epochs", spec.train.epochs},
          {"batch_size", spec.train.batch_size},
          {"lr", spec.train.adam.lr},
          {"gamma", spec.train.gamma},
          {"plateau_epochs", spec.train.plateau_epochs},
          {"seed", spec.train.seed},
          {"deterministic", spec.train.deterministic},
          {"trainable", trainable}}},
        {"lambdas",
         {{"div", spec.loss.lambda_div},
          {"bou", spec.loss.lambda_bou},
          {"reg", spec.loss.lambda_reg},
          {"con", spec.loss.lambda_con}}},
        {"final_loss", loss_json(result.final_loss)},
        {"seconds", result.seconds},
    };
    json metrics = json::object();
    for (const auto& [name, value] : result.metrics) metrics[name] = value;
    doc["metrics"] = metrics;

    std::ofstream out(spec.manifest_path, std::ios::trunc);
    if (!out) throw IoError(IoError::Code::FileAccess, spec.manifest_path + ": cannot write");
    out << doc.dump(2) << "\n";
}

}  // namespace

const char* task_name(TaskKind task) {
    switch (task) {
        case TaskKind::Fit: return "fit";
        case TaskKind::Project: return "project";
        case TaskKind::Inpaint: return "inpaint";
        case TaskKind::Superres: return "superres";
        case TaskKind::Infer: return "infer";
    }
    return "?";
}

ObservationSet observations_from_grid(const GridField& grid, int frame) {
    if (grid.channels < grid.dim)
        throw std::invalid_argument("velocity grid needs one channel per axis");
    ObservationSet obs;
    obs.frame = frame;
    obs.region_volume = grid.bbox.volume(grid.dim);
    obs.points.reserve(grid.node_count());
    obs.values.reserve(grid.node_count());
    for (uint32_t k = 0; k < grid.dims[2]; ++k)
        for (uint32_t j = 0; j < grid.dims[1]; ++j)
            for (uint32_t i = 0; i < grid.dims[0]; ++i) {
                obs.points.push_back(grid.node_pos(i, j, k));
                obs.values.push_back(grid.vector_at(i, j, k));
            }
    return obs;
}

ObservationSet masked_observations(const GridField& grid, const GridField& mask) {
    if (mask.dims != grid.dims) throw std::invalid_argument("mask resolution mismatch");
    ObservationSet obs;
    obs.region_volume = grid.bbox.volume(grid.dim);
    for (uint32_t k = 0; k < grid.dims[2]; ++k)
        for (uint32_t j = 0; j < grid.dims[1]; ++j)
            for (uint32_t i = 0; i < grid.dims[0]; ++i) {
                if (mask.at(i, j, k, 0) <= 0.5) continue;
                obs.points.push_back(grid.node_pos(i, j, k));
                obs.values.push_back(grid.vector_at(i, j, k));
            }
    if (obs.points.empty()) throw std::invalid_argument("mask hides every sample");
    return obs;
}

std::vector<Vec> uniform_domain_points(const Box& box, int dim, size_t count, uint64_t seed) {
    Rng rng(seed, rng_stream::kEvalPoints);
    std::vector<Vec> points(count);
    for (Vec& p : points)
        for (int a = 0; a < dim; ++a) p[a] = rng.uniform(box.lo[a], box.hi[a]);
    return points;
}

std::vector<Vec> interior_node_positions(const GridField& grid) {
    std::vector<Vec> points;
    const uint32_t kz_lo = grid.dim == 3 ? 1 : 0;
    const uint32_t kz_hi = grid.dim == 3 ? grid.dims[2] - 1 : 1;
    for (uint32_t k = kz_lo; k < kz_hi; ++k)
        for (uint32_t j = 1; j + 1 < grid.dims[1]; ++j)
            for (uint32_t i = 1; i + 1 < grid.dims[0]; ++i)
                points.push_back(grid.node_pos(i, j, k));
    return points;
}

GridField sample_model_grid(const KernelField& field, int frame, std::array<uint32_t, 3> dims,
                            const Box& bbox) {
    GridField g = GridField::make(field.dim, field.dim, dims, bbox);
    const std::vector<Vec> velocities = evaluate_velocity(field, frame, g.node_positions());
    for (size_t n = 0; n < velocities.size(); ++n)
        for (int c = 0; c < field.dim; ++c)
            g.data[n * static_cast<size_t>(field.dim) + static_cast<size_t>(c)] = velocities[n][c];
    return g;
}

GridField sample_model_vorticity(const KernelField& field, int frame,
                                 std::array<uint32_t, 3> dims, const Box& bbox) {
    const int channels = field.dim == 2 ? 1 : 3;
    GridField g = GridField::make(field.dim, channels, dims, bbox);
    const std::vector<Vec> vort = evaluate_vorticity(field, frame, g.node_positions());
    for (size_t n = 0; n < vort.size(); ++n) {
        if (channels == 1) {
            g.data[n] = vort[n].z;
        } else {
            for (int c = 0; c < 3; ++c)
                g.data[n * 3 + static_cast<size_t>(c)] = vort[n][c];
        }
    }
    return g;
}

void write_history_csv(const std::string& path, const TrainResult& result) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError(IoError::Code::FileAccess, path + ": cannot write");
    out << "epoch,lr,obs,div,bou,reg,con,total\n";
    char line[256];
    for (const EpochStats& e : result.history) {
        std::snprintf(line, sizeof line, "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                      e.epoch, e.lr, e.loss.obs, e.loss.div, e.loss.bou, e.loss.reg, e.loss.con,
                      e.loss.total);
        out << line;
    }
}

namespace {

/// Shared fitting core: observations -> trained model + final loss. Artifact
/// emission stays with the public wrappers.
TaskResult fit_core(const TaskSpec& spec, KernelType type, double preset_lambda_div,
                    const GridField& input, const ObservationSet& obs) {
    const auto start = std::chrono::steady_clock::now();

    InitConfig init = spec.init;
    init.dim = input.dim;
    if (!(init.domain.volume(input.dim) > 0.0)) init.domain = input.bbox;
    KernelField field = init_field(init, type, 1);

    LossConfig loss = spec.loss;
    if (!spec.lambdas_explicit) {
        loss.lambda_div = divergence_free_kind(type.kind) ? 0.0 : preset_lambda_div;
        loss.lambda_bou = spec.boundary ? 1.0 : 0.0;
        loss.lambda_reg = 0.0;
        loss.lambda_con = 0.0;
    }
    const bool needs_eval_points =
        loss.lambda_div > 0.0 || loss.lambda_reg > 0.0 || loss.lambda_con > 0.0;
    if (needs_eval_points && loss.eval_points.empty())
        loss.eval_points = spec.mask ? uniform_domain_points(init.domain, input.dim, 4096,
                                                             spec.train.seed)
                                     : obs.points;

    TrainConfig train = spec.train;
    if (train.min_radius <= 0.0) train.min_radius = 1e-4 * init.domain.diagonal(input.dim);

    LossInputs inputs;
    inputs.obs = &obs;
    if (spec.boundary) inputs.boundary = &*spec.boundary;
    PairCache obs_cache, eval_cache;
    if (!train.mask.geometry()) {
        const HashGrid frozen = HashGrid::build(field);
        obs_cache = build_pair_cache(field, frozen, obs.points);
        inputs.obs_cache = &obs_cache;
        if (!loss.eval_points.empty()) {
            eval_cache = build_pair_cache(field, frozen, loss.eval_points);
            inputs.eval_cache = &eval_cache;
        }
    }

    TaskResult result;
    result.training = run_training(
        field, train, obs.points.size(),
        [&](const KernelField& f, const HashGrid& g, const TrainMask& m, ParamGrads* grads,
            std::span<const uint32_t> subset) {
            return total_loss(f, g, inputs, loss, m, grads, subset);
        });

    const HashGrid grid = HashGrid::build(field);
    result.final_loss = total_loss(field, grid, inputs, loss, train.mask, nullptr, {});
    result.model = std::move(field);
    result.seconds = elapsed_seconds(start);
    return result;
}

/// Sampled-output dims: explicit eval_dims, else reference dims, else input.
std::array<uint32_t, 3> output_dims(const TaskSpec& spec, const GridField& input,
                                    const GridField* reference) {
    if (spec.eval_dims[0] != 0) return spec.eval_dims;
    if (reference) return reference->dims;
    return input.dims;
}

void add_grid_metrics(TaskResult& result, const GridField& reference, const GridField& sampled) {
    result.metrics.emplace_back("psnr", psnr(reference, sampled));
    result.metrics.emplace_back("ssim", ssim(reference, sampled));
    result.metrics.emplace_back("rel_l1", relative_l1(reference, sampled));
    result.metrics.emplace_back("mse", mse(reference, sampled));
}

}  // namespace

TaskResult run_fit(const TaskSpec& spec) {
    const auto start = std::chrono::steady_clock::now();
    const GridField input = read_vfld(spec.input_path);
    if (input.channels < input.dim)
        throw std::invalid_argument("fit expects a velocity grid (channels >= dim)");
    const ObservationSet obs =
        spec.mask ? masked_observations(input, *spec.mask) : observations_from_grid(input);

    TaskResult result = fit_core(spec, spec.type, 0.5, input, obs);

    GridField reference;
    const bool have_ref = !spec.reference_path.empty();
    if (have_ref) reference = read_vfld(spec.reference_path);
    const std::array<uint32_t, 3> dims = output_dims(spec, input, have_ref ? &reference : nullptr);
    const Box& bbox = have_ref ? reference.bbox : input.bbox;
    const GridField sampled = sample_model_grid(result.model, 0, dims, bbox);
    if (!spec.output_field.empty()) write_vfld(spec.output_field, sampled);
    if (have_ref && reference.dims == sampled.dims && reference.channels == sampled.channels)
        add_grid_metrics(result, reference, sampled);

    if (!spec.output_model.empty()) write_dfkm(spec.output_model, result.model);
    write_history_csv(spec.history_path, result.training);
    result.seconds = elapsed_seconds(start);
    write_manifest(spec, result, {});
    return result;
}

TaskResult run_superres(const TaskSpec& spec) {
    TaskSpec s = spec;
    s.task = TaskKind::Superres;
    return run_fit(s);
}

ProjectResult run_project(const TaskSpec& spec) {
    const auto start = std::chrono::steady_clock::now();
    const GridField input = read_vfld(spec.input_path);
    if (input.channels < input.dim)
        throw std::invalid_argument("projection expects a velocity grid");
    const ObservationSet obs =
        spec.mask ? masked_observations(input, *spec.mask) : observations_from_grid(input);

    // The unconstrained fit must reproduce the divergent part, so the
    // divergence penalty stays off.
    const KernelType fit_type{KernelKind::NegLapScalar, ScalarRbf::Wen4};
    ProjectResult result;
    result.fit = fit_core(spec, fit_type, 0.0, input, obs);
    auto [curlfree, divfree] = decompose(result.fit.model);
    result.curlfree = std::move(curlfree);
    result.divfree = std::move(divfree);

    GridField reference;
    const bool have_ref = !spec.reference_path.empty();
    if (have_ref) reference = read_vfld(spec.reference_path);
    const std::array<uint32_t, 3> dims = output_dims(spec, input, have_ref ? &reference : nullptr);
    const Box& bbox = have_ref ? reference.bbox : input.bbox;
    const GridField sampled = sample_model_grid(result.divfree, 0, dims, bbox);
    if (!spec.output_field.empty()) write_vfld(spec.output_field, sampled);
    if (have_ref && reference.dims == sampled.dims && reference.channels == sampled.channels)
        add_grid_metrics(result.fit, reference, sampled);

    std::vector<std::pair<std::string, std::string>> extras;
    if (!spec.output_model.empty()) {
        write_dfkm(spec.output_model, result.divfree);
        const std::string full = derived_path(spec.output_model, "full");
        const std::string curl = derived_path(spec.output_model, "curlfree");
        write_dfkm(full, result.fit.model);
        write_dfkm(curl, result.curlfree);
        extras = {{"model_full", full}, {"model_curlfree", curl}};
    }
    write_history_csv(spec.history_path, result.fit.training);
    result.fit.seconds = elapsed_seconds(start);
    // Manifest reports the projection output (the divergence-free part).
    TaskResult for_manifest;
    for_manifest.model = result.divfree;
    for_manifest.training = result.fit.training;
    for_manifest.final_loss = result.fit.final_loss;
    for_manifest.seconds = result.fit.seconds;
    for_manifest.metrics = result.fit.metrics;
    write_manifest(spec, for_manifest, extras);
    return result;
}

TaskResult run_infer(const TaskSpec& spec) {
    const auto start = std::chrono::steady_clock::now();
    const ScalarSequence seq = read_sfld(spec.input_path);
    if (seq.frames() < 3) throw std::invalid_argument("inference needs at least 3 frames");

    InitConfig init = spec.init;
    init.dim = seq.grid.dim;
    if (!(init.domain.volume(init.dim) > 0.0)) init.domain = seq.grid.bbox;
    KernelField field = init_field(init, spec.type, seq.frames());
    field.frame_dt = seq.dt;

    LossConfig loss = spec.loss;
    if (!spec.lambdas_explicit) {
        loss.lambda_div = 0.1;  // identically zero for DivFree kinds
        loss.lambda_bou = spec.boundary ? 1.0 : 0.0;
        loss.lambda_reg = 0.1;
        loss.lambda_con = 0.1;
    }
    if (loss.eval_points.empty())
        loss.eval_points = uniform_domain_points(init.domain, init.dim, 2048, spec.train.seed);

    TrainConfig train = spec.train;
    train.batch_size = 0;                      // full batch
    train.mask = TrainMask{true, false, false};  // fixed geometry
    if (train.min_radius <= 0.0) train.min_radius = 1e-4 * init.domain.diagonal(init.dim);

    const HashGrid frozen = HashGrid::build(field);
    const std::vector<Vec> interior = interior_node_positions(seq.grid);
    const PairCache scalar_cache = build_pair_cache(field, frozen, interior);
    const PairCache eval_cache = build_pair_cache(field, frozen, loss.eval_points);
    LossInputs inputs;
    inputs.scalars = &seq;
    inputs.scalar_cache = &scalar_cache;
    inputs.eval_cache = &eval_cache;
    if (spec.boundary) inputs.boundary = &*spec.boundary;

    TaskResult result;
    result.training = run_training(
        field, train, interior.size(),
        [&](const KernelField& f, const HashGrid& g, const TrainMask& m, ParamGrads* grads,
            std::span<const uint32_t> subset) {
            return total_loss(f, g, inputs, loss, m, grads, subset);
        });
    result.final_loss = total_loss(field, HashGrid::build(field), inputs, loss, train.mask,
                                   nullptr, {});
    result.model = std::move(field);

    const int mid_frame = result.model.frames / 2;
    GridField reference;
    const bool have_ref = !spec.reference_path.empty();
    if (have_ref) reference = read_vfld(spec.reference_path);
    const std::array<uint32_t, 3> dims =
        output_dims(spec, seq.grid, have_ref ? &reference : nullptr);
    const Box& bbox = have_ref ? reference.bbox : seq.grid.bbox;
    const GridField sampled = sample_model_grid(result.model, mid_frame, dims, bbox);
    if (!spec.output_field.empty()) write_vfld(spec.output_field, sampled);
    if (have_ref && reference.dims == sampled.dims && reference.channels == sampled.channels)
        add_grid_metrics(result, reference, sampled);

    if (!spec.output_model.empty()) write_dfkm(spec.output_model, result.model);
    write_history_csv(spec.history_path, result.training);
    result.seconds = elapsed_seconds(start);
    write_manifest(spec, result, {});
    return result;
}

}  // namespace dfk

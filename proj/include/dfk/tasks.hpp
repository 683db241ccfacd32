#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dfk/grid.hpp"
#include "dfk/init.hpp"
#include "dfk/losses.hpp"
#include "dfk/optim.hpp"

namespace dfk {

enum class TaskKind { Fit, Project, Inpaint, Superres, Infer };

const char* task_name(TaskKind task);

/// Everything one reconstruction run needs. Empty output paths skip the
/// corresponding artifact; unset lambdas take task presets.
struct TaskSpec {
    TaskKind task = TaskKind::Fit;
    KernelType type;
    InitConfig init;
    TrainConfig train;
    LossConfig loss;
    bool lambdas_explicit = false;  // user lambdas win over task presets

    std::string input_path;      // VFLD (SFLD for inference)
    std::string reference_path;  // optional dense reference for metrics
    std::string output_model;
    std::string output_field;  // sampled velocity VFLD
    std::string history_path;  // per-epoch CSV
    std::string manifest_path;

    std::optional<GridField> mask;  // inpainting: >0.5 supervised, else hidden
    std::optional<BoundarySet> boundary;
    std::array<uint32_t, 3> eval_dims{0, 0, 0};  // output resolution (0: input dims)
};

struct TaskResult {
    KernelField model;
    TrainResult training;
    LossReport final_loss;
    double seconds = 0.0;
    std::vector<std::pair<std::string, double>> metrics;
};

/// Velocity fitting; also covers inpainting (mask) and is the first stage of
/// projection and super-resolution.
TaskResult run_fit(const TaskSpec& spec);

struct ProjectResult {
    TaskResult fit;  // model: the full NegLapScalar fit
    KernelField curlfree;
    KernelField divfree;  // the projection output
};

/// Leray projection: fit the data with the unconstrained NegLapScalar kind,
/// then split it into curl-free and divergence-free parts.
ProjectResult run_project(const TaskSpec& spec);

/// Fit on the coarse input, evaluate on eval_dims (metrics vs the reference
/// when provided).
TaskResult run_superres(const TaskSpec& spec);

/// Velocity-from-scalar inference: shared geometry, per-frame weights,
/// full-batch weights-only training on the advection objective.
TaskResult run_infer(const TaskSpec& spec);

ObservationSet observations_from_grid(const GridField& grid, int frame = 0);

/// Grid observations restricted to mask > 0.5; throws when nothing remains.
ObservationSet masked_observations(const GridField& grid, const GridField& mask);

/// Fixed seeded uniform sample of the box (volume-term evaluation points).
std::vector<Vec> uniform_domain_points(const Box& box, int dim, size_t count, uint64_t seed);

/// Interior grid nodes in the advection-loss flat order.
std::vector<Vec> interior_node_positions(const GridField& grid);

/// Model velocity / vorticity sampled on a node grid (channels: dim / 1).
GridField sample_model_grid(const KernelField& field, int frame, std::array<uint32_t, 3> dims,
                            const Box& bbox);
GridField sample_model_vorticity(const KernelField& field, int frame,
                                 std::array<uint32_t, 3> dims, const Box& bbox);

void write_history_csv(const std::string& path, const TrainResult& result);

}  // namespace dfk

#include "dfk/cli.hpp"

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "dfk/fieldgen.hpp"
#include "dfk/io.hpp"
#include "dfk/metrics.hpp"
#include "dfk/render.hpp"
#include "dfk/tasks.hpp"

namespace dfk {
namespace {

ScalarRbf parse_family(const std::string& name) {
    if (name == "wen4") return ScalarRbf::Wen4;
    if (name == "wen2") return ScalarRbf::Wen2;
    if (name == "poly6") return ScalarRbf::Poly6;
    if (name == "gauss") return ScalarRbf::Gauss;
    throw CLI::ValidationError("--family", "unknown family: " + name);
}

KernelKind parse_kind(const std::string& name) {
    if (name == "divfree") return KernelKind::DivFree;
    if (name == "curlfree") return KernelKind::CurlFree;
    if (name == "neglap") return KernelKind::NegLapScalar;
    if (name == "curl") return KernelKind::CurlKernel;
    if (name == "regular") return KernelKind::RegularScalar;
    throw CLI::ValidationError("--kind", "unknown kind: " + name);
}

Box cube(double lo, double hi, int dim) {
    Box b;
    for (int a = 0; a < dim; ++a) {
        b.lo[a] = lo;
        b.hi[a] = hi;
    }
    return b;
}

std::array<uint32_t, 3> res_dims(uint32_t res, int dim) {
    return {res, res, dim == 3 ? res : 1};
}

/// Flags shared by the training subcommands.
struct TaskOpts {
    std::string input, out, field_out, history, manifest, reference, mask, boundary;
    std::string family = "wen4";
    std::string kind = "divfree";
    std::string mode = "all";  // trainable classes: all | weights
    size_t kernels = 1000;
    double eta = 6.0;
    int epochs = 100;
    int batch = 0;
    double lr = 5e-3;
    double lambda_div = -1.0, lambda_bou = -1.0, lambda_reg = -1.0, lambda_con = -1.0;
    uint64_t seed = 0;
    bool deterministic = false;
    uint32_t eval_res = 0;
};

void add_task_options(CLI::App* cmd, TaskOpts& o, int default_epochs, int default_batch) {
    o.epochs = default_epochs;
    o.batch = default_batch;
    cmd->add_option("--input", o.input, "input field file")->required();
    cmd->add_option("--out", o.out, "output model (.dfkm)");
    cmd->add_option("--field-out", o.field_out, "sampled velocity output (.vfld)");
    cmd->add_option("--history", o.history, "training history CSV");
    cmd->add_option("--manifest", o.manifest, "run manifest JSON");
    cmd->add_option("--reference", o.reference, "reference field for metrics");
    cmd->add_option("--family", o.family, "radial family: wen4|wen2|poly6|gauss");
    cmd->add_option("--kind", o.kind, "kernel kind: divfree|curlfree|neglap|curl|regular");
    cmd->add_option("--kernels", o.kernels, "target kernel count");
    cmd->add_option("--eta", o.eta, "radius scale");
    cmd->add_option("--epochs", o.epochs, "training epochs");
    cmd->add_option("--batch", o.batch, "minibatch size (0: full batch)");
    cmd->add_option("--lr", o.lr, "initial learning rate");
    cmd->add_option("--lambda-div", o.lambda_div, "divergence penalty weight");
    cmd->add_option("--lambda-bou", o.lambda_bou, "boundary penalty weight");
    cmd->add_option("--lambda-reg", o.lambda_reg, "velocity regularizer weight");
    cmd->add_option("--lambda-con", o.lambda_con, "temporal smoothness weight");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_flag("--deterministic", o.deterministic, "seed-deterministic run");
    cmd->add_option("--mask", o.mask, "supervision mask grid (.vfld, inpainting)");
    cmd->add_option("--boundary", o.boundary, "boundary samples CSV");
    cmd->add_option("--mode", o.mode, "trainable parameters: all|weights");
    cmd->add_option("--eval-res", o.eval_res, "output sampling resolution");
}

TaskSpec build_spec(const TaskOpts& o, TaskKind task) {
    TaskSpec spec;
    spec.task = task;
    spec.type = KernelType{parse_kind(o.kind), parse_family(o.family)};
    spec.init.target_count = o.kernels;
    spec.init.eta = o.eta;
    spec.init.seed = o.seed;
    spec.train.epochs = o.epochs;
    spec.train.batch_size = o.batch;
    spec.train.adam.lr = o.lr;
    spec.train.seed = o.seed;
    spec.train.deterministic = o.deterministic;
    if (o.mode == "weights")
        spec.train.mask = TrainMask{true, false, false};
    else if (o.mode == "all")
        spec.train.mask = TrainMask{true, true, true};
    else
        throw CLI::ValidationError("--mode", "unknown mode: " + o.mode);
    if (o.lambda_div >= 0.0 || o.lambda_bou >= 0.0 || o.lambda_reg >= 0.0 || o.lambda_con >= 0.0) {
        spec.lambdas_explicit = true;
        spec.loss.lambda_div = std::max(o.lambda_div, 0.0);
        spec.loss.lambda_bou = std::max(o.lambda_bou, 0.0);
        spec.loss.lambda_reg = std::max(o.lambda_reg, 0.0);
        spec.loss.lambda_con = std::max(o.lambda_con, 0.0);
    }
    spec.input_path = o.input;
    spec.reference_path = o.reference;
    spec.output_model = o.out;
    spec.output_field = o.field_out;
    spec.history_path = o.history;
    spec.manifest_path = o.manifest;
    if (!o.mask.empty()) spec.mask = read_vfld(o.mask);
    if (!o.boundary.empty()) spec.boundary = read_boundary_csv(o.boundary);
    if (o.eval_res > 0) {
        spec.eval_dims = {o.eval_res, o.eval_res, 1};
        // dimension fixed later by the input; 3D fills z below
    }
    return spec;
}

void fix_eval_dims(TaskSpec& spec, int dim) {
    if (spec.eval_dims[0] > 0 && dim == 3) spec.eval_dims[2] = spec.eval_dims[0];
}

void print_result(const TaskResult& result) {
    std::printf("kernels=%zu final_total=%.6g seconds=%.1f\n", result.model.kernel_count(),
                result.final_loss.total, result.seconds);
    for (const auto& [name, value] : result.metrics)
        std::printf("%s=%.6g\n", name.c_str(), value);
}

int cmd_gen(const std::string& gen_case, uint32_t res, const std::string& out,
            const std::string& mask_out, const std::string& clean_out, double noise_amp,
            double noise, uint64_t seed, double angle, int frames, double dt,
            std::vector<double> velocity, std::vector<double> blob, double blob_sigma) {
    if (gen_case == "projection-pair") {
        const int dim = 2;
        auto [clean, contaminated] =
            gen_projection_pair(dim, res_dims(res, dim), cube(-1, 1, dim), noise_amp, seed);
        write_vfld(out, contaminated);
        if (!clean_out.empty()) write_vfld(clean_out, clean);
        std::printf("projection pair: %ux%u noise_amp=%g\n", res, res, noise_amp);
        return 0;
    }
    if (gen_case == "laminar-stitch") {
        const Box domain = cube(-1, 1, 2);
        const Box outer = cube(-0.6, 0.6, 2);
        const Box inner = cube(-0.25, 0.25, 2);
        StitchData data = gen_laminar_stitch(angle, outer, inner, res_dims(res, 2), domain);
        write_vfld(out, data.field);
        if (!mask_out.empty()) write_vfld(mask_out, data.mask);
        std::printf("laminar stitch: angle=%g supervised=%zu/%zu\n", angle,
                    data.observations.points.size(), data.mask.node_count());
        return 0;
    }
    if (gen_case == "advected-blob") {
        Vec u{0.3, 0.2, 0.0};
        if (velocity.size() == 2) u = Vec{velocity[0], velocity[1], 0.0};
        Vec center{-0.4, -0.3, 0.0};
        if (blob.size() == 2) center = Vec{blob[0], blob[1], 0.0};
        ScalarSequence seq = gen_advected_scalar(res_dims(res, 2), cube(-1, 1, 2), frames, dt, u,
                                                 center, blob_sigma);
        write_sfld(out, seq);
        std::printf("advected blob: %d frames dt=%g u=(%g,%g)\n", frames, dt, u.x, u.y);
        return 0;
    }
    GridField grid = generate_named(gen_case, res_dims(res, gen_case == "vortex3d" || gen_case == "analytic-vortices" ? 3 : 2),
                                    cube(-1, 1, gen_case == "vortex3d" || gen_case == "analytic-vortices" ? 3 : 2));
    if (noise > 0.0) add_grid_noise(grid, noise, seed);
    write_vfld(out, grid);
    std::printf("%s: %d channels at %u^%d\n", gen_case.c_str(), grid.channels, res, grid.dim);
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& like, uint32_t res,
             const std::string& out, int frame) {
    const KernelField model = read_dfkm(model_path);
    std::array<uint32_t, 3> dims;
    Box bbox;
    if (!like.empty()) {
        const GridField ref = read_vfld(like);
        dims = ref.dims;
        bbox = ref.bbox;
    } else {
        dims = res_dims(res, model.dim);
        bbox = cube(-1, 1, model.dim);
    }
    if (frame < 0 || frame >= model.frames)
        throw std::invalid_argument("--frame out of range");
    write_vfld(out, sample_model_grid(model, frame, dims, bbox));
    std::printf("sampled frame %d at %ux%ux%u\n", frame, dims[0], dims[1], dims[2]);
    return 0;
}

int cmd_metrics(const std::string& input, const std::string& ref_path, const std::string& out) {
    const GridField test = read_vfld(input);
    const GridField ref = read_vfld(ref_path);
    const double p = psnr(ref, test);
    const double s = ssim(ref, test);
    const double m = mse(ref, test);
    std::printf("psnr=%.4f\nssim=%.6f\nmse=%.8g\n", p, s, m);
    if (!out.empty()) {
        std::ofstream o(out, std::ios::trunc);
        o << "{\n  \"psnr\": " << p << ",\n  \"ssim\": " << s << ",\n  \"mse\": " << m << "\n}\n";
    }
    return 0;
}

int cmd_render(const std::string& input, const std::string& out, const std::string& mode,
               const std::string& slice) {
    GridField grid = read_vfld(input);
    GridField flat = grid;
    if (grid.dim == 3) {
        int axis = 2;
        uint32_t index = grid.dims[2] / 2;
        if (!slice.empty()) {
            if (slice.size() < 3 || slice[1] != ':' ||
                (slice[0] != 'x' && slice[0] != 'y' && slice[0] != 'z'))
                throw std::invalid_argument("--slice expects axis:index, e.g. z:24");
            axis = slice[0] - 'x';
            index = static_cast<uint32_t>(std::stoul(slice.substr(2)));
        }
        flat = slice_field(grid, axis, index);
    }
    if (mode == "velocity") {
        write_ppm(out, render_velocity(flat));
    } else if (mode == "vorticity") {
        GridField w = flat;
        if (flat.channels >= 2) {
            // z-vorticity of the slice by central differences
            w = GridField::make(2, 1, flat.dims, flat.bbox);
            const double dx = flat.spacing(0), dy = flat.spacing(1);
            for (uint32_t j = 0; j < flat.dims[1]; ++j)
                for (uint32_t i = 0; i < flat.dims[0]; ++i) {
                    const uint32_t il = i > 0 ? i - 1 : i, ir = i + 1 < flat.dims[0] ? i + 1 : i;
                    const uint32_t jl = j > 0 ? j - 1 : j, jr = j + 1 < flat.dims[1] ? j + 1 : j;
                    const double duy_dx =
                        (flat.at(ir, j, 0, 1) - flat.at(il, j, 0, 1)) / (dx * (ir - il));
                    const double dux_dy =
                        (flat.at(i, jr, 0, 0) - flat.at(i, jl, 0, 0)) / (dy * (jr - jl));
                    w.at(i, j, 0, 0) = duy_dx - dux_dy;
                }
        }
        write_ppm(out, render_vorticity(w));
    } else {
        throw std::invalid_argument("--mode must be velocity or vorticity");
    }
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"incompressible flow fields as sums of divergence-free kernels"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "write an analytic test dataset");
    std::string gen_case = "vortex3d", gen_out, gen_mask_out, gen_clean_out;
    uint32_t gen_res = 48;
    double gen_noise_amp = 1.0, gen_noise = 0.0, gen_angle = 0.0, gen_dt = 0.05,
           gen_blob_sigma = 0.15;
    uint64_t gen_seed = 0;
    int gen_frames = 21;
    std::vector<double> gen_velocity, gen_blob;
    gen->add_option("--case", gen_case,
                    "vortex3d|vortex2d|mixed2d|projection-pair|laminar-stitch|advected-blob");
    gen->add_option("--res", gen_res, "nodes per axis");
    gen->add_option("--out", gen_out, "output file")->required();
    gen->add_option("--mask-out", gen_mask_out, "supervision mask output (laminar-stitch)");
    gen->add_option("--clean-out", gen_clean_out, "clean field output (projection-pair)");
    gen->add_option("--noise-amp", gen_noise_amp, "potential amplitude (projection-pair)");
    gen->add_option("--noise", gen_noise, "additive Gaussian noise sigma");
    gen->add_option("--seed", gen_seed, "random seed");
    gen->add_option("--angle", gen_angle, "inner flow angle in degrees (laminar-stitch)");
    gen->add_option("--frames", gen_frames, "frame count (advected-blob)");
    gen->add_option("--dt", gen_dt, "frame spacing (advected-blob)");
    gen->add_option("--velocity", gen_velocity, "advecting velocity vx vy")->expected(2);
    gen->add_option("--blob-center", gen_blob, "blob center x y")->expected(2);
    gen->add_option("--blob-sigma", gen_blob_sigma, "blob radius");

    // training tasks
    TaskOpts fit_o, project_o, inpaint_o, superres_o, infer_o;
    auto* fit = app.add_subcommand("fit", "fit a kernel field to velocity samples");
    add_task_options(fit, fit_o, 100, 1024);
    auto* project = app.add_subcommand("project", "Leray projection via an unconstrained fit");
    add_task_options(project, project_o, 100, 1024);
    auto* inpaint = app.add_subcommand("inpaint", "masked fit (flow completion)");
    add_task_options(inpaint, inpaint_o, 200, 0);
    auto* superres = app.add_subcommand("superres", "fit coarse samples, evaluate dense");
    add_task_options(superres, superres_o, 100, 1024);
    auto* infer = app.add_subcommand("infer", "velocity from a passive-scalar sequence");
    add_task_options(infer, infer_o, 400, 0);

    // eval
    auto* eval = app.add_subcommand("eval", "sample a model onto a grid");
    std::string eval_model, eval_like, eval_out;
    uint32_t eval_res = 64;
    int eval_frame = 0;
    eval->add_option("--model", eval_model, "model file (.dfkm)")->required();
    eval->add_option("--like", eval_like, "copy grid shape/bounds from this field");
    eval->add_option("--res", eval_res, "nodes per axis (bbox [-1,1]^d)");
    eval->add_option("--frame", eval_frame, "frame index");
    eval->add_option("--out", eval_out, "output field (.vfld)")->required();

    // metrics
    auto* metrics = app.add_subcommand("metrics", "PSNR/SSIM/MSE of a field vs a reference");
    std::string met_input, met_ref, met_out;
    metrics->add_option("--input", met_input, "field under test")->required();
    metrics->add_option("--ref", met_ref, "reference field")->required();
    metrics->add_option("--out", met_out, "metrics JSON output");

    // render
    auto* render = app.add_subcommand("render", "render a field slice to PPM");
    std::string ren_input, ren_out, ren_mode = "velocity", ren_slice;
    render->add_option("--input", ren_input, "field file (.vfld)")->required();
    render->add_option("--out", ren_out, "image output (.ppm)")->required();
    render->add_option("--mode", ren_mode, "velocity|vorticity");
    render->add_option("--slice", ren_slice, "3D slice, e.g. z:24");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (gen->parsed())
            return cmd_gen(gen_case, gen_res, gen_out, gen_mask_out, gen_clean_out, gen_noise_amp,
                           gen_noise, gen_seed, gen_angle, gen_frames, gen_dt, gen_velocity,
                           gen_blob, gen_blob_sigma);
        if (fit->parsed()) {
            TaskSpec spec = build_spec(fit_o, TaskKind::Fit);
            fix_eval_dims(spec, read_vfld(spec.input_path).dim);
            print_result(run_fit(spec));
            return 0;
        }
        if (project->parsed()) {
            TaskSpec spec = build_spec(project_o, TaskKind::Project);
            fix_eval_dims(spec, read_vfld(spec.input_path).dim);
            print_result(run_project(spec).fit);
            return 0;
        }
        if (inpaint->parsed()) {
            TaskSpec spec = build_spec(inpaint_o, TaskKind::Inpaint);
            if (!spec.mask) throw std::invalid_argument("inpaint requires --mask");
            fix_eval_dims(spec, read_vfld(spec.input_path).dim);
            print_result(run_fit(spec));
            return 0;
        }
        if (superres->parsed()) {
            TaskSpec spec = build_spec(superres_o, TaskKind::Superres);
            fix_eval_dims(spec, read_vfld(spec.input_path).dim);
            print_result(run_superres(spec));
            return 0;
        }
        if (infer->parsed()) {
            TaskSpec spec = build_spec(infer_o, TaskKind::Infer);
            print_result(run_infer(spec));
            return 0;
        }
        if (eval->parsed()) return cmd_eval(eval_model, eval_like, eval_res, eval_out, eval_frame);
        if (metrics->parsed()) return cmd_metrics(met_input, met_ref, met_out);
        if (render->parsed()) return cmd_render(ren_input, ren_out, ren_mode, ren_slice);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace dfk

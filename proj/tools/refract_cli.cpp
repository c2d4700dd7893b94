// Command-line front end: generate / reconstruct / evaluate / benchmark /
// energy-grid workflows over the RFRC/RFDM file formats.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "refract/io.hpp"
#include "refract/metrics.hpp"
#include "refract/reconstruction.hpp"
#include "refract/scenes.hpp"
#include "refract/tracer.hpp"

namespace {

using namespace refract;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitGridMismatch = 3;

// Serial implementation; the env var caps parallelism (0 = auto) and is
// validated here so configurations stay portable.
void apply_thread_cap() {
    if (const char* env = std::getenv("REFRACT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 0)
            throw InvalidInputError("REFRACT_THREADS must be a non-negative integer");
    }
}

InitScheme parse_init(const std::string& text, double& fixed_depth) {
    if (text == "flat" || text == "indep" || text == "independent")
        return InitScheme::independent_flat;
    if (text == "sequential") return InitScheme::sequential;
    if (text.rfind("fixed:", 0) == 0) {
        fixed_depth = std::stod(text.substr(6));
        return InitScheme::fixed;
    }
    throw InvalidInputError("unknown init scheme '" + text + "' (flat|sequential|fixed:<d0>)");
}

GridRange parse_range(const std::string& text) {
    GridRange r;
    std::istringstream ss(text);
    char sep1 = 0, sep2 = 0;
    if (!(ss >> r.lo >> sep1 >> r.hi >> sep2 >> r.n) || sep1 != ':' || sep2 != ':' || r.n <= 0)
        throw InvalidInputError("bad range '" + text + "', expected lo:hi:n with n > 0");
    return r;
}

std::vector<int> parse_frames(const std::string& text) {
    if (text == "all") {
        std::vector<int> all(100);
        for (int i = 0; i < 100; ++i) all[i] = i;
        return all;
    }
    std::vector<int> frames;
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) frames.push_back(std::stoi(tok));
    if (frames.empty()) throw InvalidInputError("empty frame list");
    return frames;
}

struct SolverFlags {
    int max_iters = 500;
    double energy_tol = 1e-9;
    double grad_tol = 1e-7;
    int memory = 10;
    double tir_penalty = 10.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--max-iters", max_iters, "L-BFGS iteration cap");
        cmd->add_option("--energy-tol", energy_tol, "absolute energy-change stop tolerance");
        cmd->add_option("--grad-tol", grad_tol, "gradient infinity-norm stop tolerance");
        cmd->add_option("--memory", memory, "L-BFGS memory");
        cmd->add_option("--tir-penalty", tir_penalty, "penalty per total-internal-reflection pixel");
    }

    SolverOptions options() const {
        SolverOptions o;
        o.max_iterations = max_iters;
        o.energy_tolerance = energy_tol;
        o.gradient_tolerance = grad_tol;
        o.lbfgs_memory = memory;
        o.tir_penalty = tir_penalty;
        return o;
    }
};

int cmd_generate(const std::string& config_path, const std::string& out_prefix,
                 double noise_std, std::uint64_t seed, bool flow_csv) {
    const SceneSpec scene = load_scene_config(config_path);
    const TraceOutput traced = generate(scene, noise_std, seed);
    write_rfrc(out_prefix + ".rfrc", traced.correspondences);
    write_depth_rfdm(out_prefix + ".gt_depth.rfdm", traced.ground_truth.depth);
    write_normals_rfdm(out_prefix + ".gt_normals.rfdm", traced.ground_truth.normals, scene.camera);
    const FlowField flow = synthesize_flow(traced.correspondences);
    write_flow_ppm(out_prefix + ".flow.ppm", flow);
    if (flow_csv) write_flow_csv(out_prefix + ".flow.csv", flow);
    std::cout << "generated " << scene.rows << "x" << scene.cols << " scene -> " << out_prefix
              << ".rfrc\n";
    return kExitOk;
}

int cmd_reconstruct(const std::string& rfrc_path, const std::string& out_prefix,
                    const std::string& init, const std::string& prev_path,
                    const SolverFlags& flags) {
    const CorrespondenceMap corr = read_rfrc(rfrc_path);
    SolverOptions opts = flags.options();
    opts.init_scheme = parse_init(init, opts.fixed_init_depth);
    std::optional<DepthMap> prev;
    if (!prev_path.empty()) prev = read_depth_rfdm(prev_path);

    const ReconstructionResult result = reconstruct(corr, opts, prev);
    write_depth_rfdm(out_prefix + ".est_depth.rfdm", result.depth);
    write_normals_rfdm(out_prefix + ".est_normals.rfdm", result.normals, corr.camera);
    write_iteration_csv(out_prefix + ".iters.csv", result.history);
    std::cout << "final_energy " << result.final_energy << "\n"
              << "iterations " << result.iterations << "\n"
              << "converged " << (result.converged ? "true" : "false") << "\n";
    return kExitOk;
}

int cmd_evaluate(const std::string& est_path, const std::string& gt_path,
                 const std::string& est_normals_path, const std::string& gt_normals_path,
                 bool ortho, const std::string& csv_path, const std::string& heatmap_path) {
    DepthMap est = read_depth_rfdm(est_path);
    DepthMap gt = read_depth_rfdm(gt_path);
    if (est.rows != gt.rows || est.cols != gt.cols) {
        std::cerr << "error: depth map grids differ (" << est.rows << "x" << est.cols << " vs "
                  << gt.rows << "x" << gt.cols << ")\n";
        return kExitGridMismatch;
    }

    NormalField est_normals = est_normals_path.empty()
                                  ? estimate_normals(est, est.camera)
                                  : read_normals_rfdm(est_normals_path).normals;
    NormalField gt_normals = gt_normals_path.empty()
                                 ? estimate_normals(gt, gt.camera)
                                 : read_normals_rfdm(gt_normals_path).normals;
    if (est_normals.rows != gt_normals.rows || est_normals.cols != gt_normals.cols) {
        std::cerr << "error: normal field grids differ\n";
        return kExitGridMismatch;
    }

    if (ortho) {
        if (est.camera.mode == ProjectionMode::perspective)
            std::cerr << "warning: zero-mean normalization applied to perspective depth maps\n";
        est = zero_mean_normalize(est);
        gt = zero_mean_normalize(gt);
    }
    const double rmse = rmse_depth(est, gt);
    const double mae = mae_normals(est_normals, gt_normals);
    std::cout << "RMSE " << rmse << "\nMAE_deg " << mae << "\n";

    if (!csv_path.empty()) {
        BenchmarkReport report;
        FrameMetrics fm;
        fm.rmse_depth = rmse;
        fm.mae_normals_deg = mae;
        const std::size_t total = static_cast<std::size_t>(est.rows) * est.cols;
        fm.excluded_pixels = total - jointly_valid_count(est_normals.valid, gt_normals.valid);
        report.frames.push_back(fm);
        write_benchmark_csv(csv_path, report);
    }
    if (!heatmap_path.empty()) write_depth_error_pgm(heatmap_path, est, gt);
    return kExitOk;
}

int cmd_benchmark(const std::string& surface, const std::string& background,
                  const std::string& camera_mode, int res, double mu,
                  const std::string& frames_text, const std::string& init,
                  const std::string& out_dir, bool heatmaps, const SolverFlags& flags) {
    SceneSpec scene;
    scene.rows = res;
    scene.cols = res;
    if (surface == "wave1") {
        scene.surface = SurfaceSpec::wave1(0);
    } else if (surface == "wave2") {
        scene.surface = SurfaceSpec::wave2(0);
    } else {
        throw InvalidInputError("benchmark surface must be wave1 or wave2");
    }
    if (background == "flat") {
        scene.background.kind = BackgroundKind::flat;
    } else if (background == "func") {
        scene.background.kind = BackgroundKind::func;
    } else {
        throw InvalidInputError("benchmark background must be flat or func");
    }
    const ProjectionMode mode = camera_mode == "orthographic" ? ProjectionMode::orthographic
                                                              : ProjectionMode::perspective;
    scene.camera = CameraModel::default_for_grid(mode, res, res);
    scene.media = MediumPair(mu);

    SolverOptions opts = flags.options();
    const InitScheme scheme = parse_init(init, opts.fixed_init_depth);
    const std::vector<int> t_list = parse_frames(frames_text);

    std::filesystem::create_directories(out_dir);
    FrameCallback on_frame;
    if (heatmaps) {
        on_frame = [&out_dir](int t, const ReconstructionResult& rec, const DepthMap& gt_depth) {
            std::ostringstream name;
            name << out_dir << "/frame_" << t << ".err.pgm";
            write_depth_error_pgm(name.str(), rec.depth, gt_depth);
        };
    }

    BenchmarkReport report = run_benchmark(scene, t_list, scheme, opts, on_frame);
    report.scene_descriptor = surface + "-" + background + "-" + camera_mode;
    write_benchmark_csv(out_dir + "/benchmark.csv", report);
    const std::string summary = format_benchmark_summary(report);
    {
        std::ofstream out(out_dir + "/summary.txt");
        out << summary;
    }
    std::cout << summary;
    return kExitOk;
}

int cmd_energy_grid(double gt_d1, double gt_d2, double background_z, double mu,
                    const std::string& d1_text, const std::string& d2_text,
                    const std::string& out_prefix) {
    const GridRange d1 = parse_range(d1_text);
    const GridRange d2 = parse_range(d2_text);
    const TwoPointSetup setup = make_two_point_setup(gt_d1, gt_d2, background_z, mu);
    const EnergyGrid grid = energy_grid_2pt(setup, d1, d2);
    write_energy_grid_csv(out_prefix + ".csv", grid);
    write_energy_grid_pgm(out_prefix + ".pgm", grid);
    std::cout << "argmin d1 " << d1.at(grid.argmin_i1) << " d2 " << d2.at(grid.argmin_i2)
              << " energy " << grid.min_energy << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Refractive surface reconstruction from single-frame correspondences"};
    app.require_subcommand(1);

    // generate
    std::string gen_config, gen_out = "scene";
    double gen_noise = 0.0;
    std::uint64_t gen_seed = 0;
    bool gen_flow_csv = false;
    auto* gen = app.add_subcommand("generate", "trace a scene into correspondence + ground-truth files");
    gen->add_option("config", gen_config, "scene configuration file")->required();
    gen->add_option("--out", gen_out, "output path prefix");
    gen->add_option("--noise-std", gen_noise, "Gaussian perturbation of X_B (world units)");
    gen->add_option("--seed", gen_seed, "noise RNG seed");
    gen->add_flag("--flow-csv", gen_flow_csv, "also write the flow field as CSV");

    // reconstruct
    std::string rec_input, rec_out = "recon", rec_init = "flat", rec_prev;
    SolverFlags rec_flags;
    auto* rec = app.add_subcommand("reconstruct", "reconstruct a depth map from an .rfrc file");
    rec->add_option("input", rec_input, "correspondence file (.rfrc)")->required();
    rec->add_option("--out", rec_out, "output path prefix");
    rec->add_option("--init", rec_init, "initialization: flat | sequential | fixed:<d0>");
    rec->add_option("--prev", rec_prev, "previous-frame depth map for sequential init");
    rec_flags.attach(rec);

    // evaluate
    std::string ev_est, ev_gt, ev_est_n, ev_gt_n, ev_csv, ev_heatmap;
    bool ev_ortho = false;
    auto* ev = app.add_subcommand("evaluate", "compare an estimated depth map against ground truth");
    ev->add_option("est", ev_est, "estimated depth (.rfdm)")->required();
    ev->add_option("gt", ev_gt, "ground-truth depth (.rfdm)")->required();
    ev->add_option("--est-normals", ev_est_n, "estimated normals (.rfdm); derived from depth if omitted");
    ev->add_option("--gt-normals", ev_gt_n, "ground-truth normals (.rfdm); derived from depth if omitted");
    ev->add_flag("--ortho", ev_ortho, "zero-mean normalize both depth maps (orthographic height ambiguity)");
    ev->add_option("--csv", ev_csv, "write a metrics CSV row to this path");
    ev->add_option("--heatmap", ev_heatmap, "write a |z_est - z_gt| PGM heatmap to this path");

    // benchmark
    std::string bm_surface = "wave1", bm_background = "flat", bm_camera = "perspective";
    std::string bm_frames = "0,25,50,75,99", bm_init = "fixed:2", bm_out = "benchmark_out";
    int bm_res = 64;
    double bm_mu = 1.0 / 1.33;
    bool bm_heatmaps = false;
    SolverFlags bm_flags;
    auto* bm = app.add_subcommand("benchmark", "frame-wise generate/reconstruct/evaluate sweep");
    bm->add_option("--surface", bm_surface, "wave1 | wave2");
    bm->add_option("--background", bm_background, "flat | func");
    bm->add_option("--camera", bm_camera, "perspective | orthographic");
    bm->add_option("--res", bm_res, "grid resolution (NxN)");
    bm->add_option("--mu", bm_mu, "IOR ratio n1/n2");
    bm->add_option("--frames", bm_frames, "comma-separated t values, or 'all'");
    bm->add_option("--init", bm_init, "flat | sequential | fixed:<d0>");
    bm->add_option("--out", bm_out, "output directory");
    bm->add_flag("--heatmaps", bm_heatmaps, "write per-frame error heatmaps");
    bm_flags.attach(bm);

    // energy-grid
    double eg_d1 = 2.5, eg_d2 = 2.5, eg_bgz = 3.0, eg_mu = 1.0 / 1.33;
    std::string eg_r1 = "1.0:2.9:101", eg_r2 = "1.0:2.9:101", eg_out = "energy_grid";
    auto* eg = app.add_subcommand("energy-grid", "two-point energy landscape over a depth grid");
    eg->add_option("--gt-d1", eg_d1, "ground-truth depth of point 1");
    eg->add_option("--gt-d2", eg_d2, "ground-truth depth of point 2");
    eg->add_option("--background-z", eg_bgz, "background plane depth");
    eg->add_option("--mu", eg_mu, "IOR ratio n1/n2");
    eg->add_option("--d1-range", eg_r1, "d1 grid as lo:hi:n");
    eg->add_option("--d2-range", eg_r2, "d2 grid as lo:hi:n");
    eg->add_option("--out", eg_out, "output path prefix");

    CLI11_PARSE(app, argc, argv);

    try {
        apply_thread_cap();
        if (gen->parsed())
            return cmd_generate(gen_config, gen_out, gen_noise, gen_seed, gen_flow_csv);
        if (rec->parsed())
            return cmd_reconstruct(rec_input, rec_out, rec_init, rec_prev, rec_flags);
        if (ev->parsed())
            return cmd_evaluate(ev_est, ev_gt, ev_est_n, ev_gt_n, ev_ortho, ev_csv, ev_heatmap);
        if (bm->parsed())
            return cmd_benchmark(bm_surface, bm_background, bm_camera, bm_res, bm_mu, bm_frames,
                                 bm_init, bm_out, bm_heatmaps, bm_flags);
        if (eg->parsed())
            return cmd_energy_grid(eg_d1, eg_d2, eg_bgz, eg_mu, eg_r1, eg_r2, eg_out);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const InvalidInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}

#include "refract/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "refract/tracer.hpp"

namespace refract {

namespace {

double pixel_z(const DepthMap& m, int r, int c) {
    const Ray ray = unproject(m.camera, Pixel{c + 0.5, r + 0.5});
    return ray.origin.z + m.d[m.index(r, c)] * ray.dir.z;
}

}  // namespace

std::size_t jointly_valid_count(const std::vector<std::uint8_t>& a,
                                const std::vector<std::uint8_t>& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] && b[i]) ++n;
    return n;
}

double rmse_depth(const DepthMap& est, const DepthMap& gt) {
    if (est.rows != gt.rows || est.cols != gt.cols)
        throw InvalidInputError("rmse_depth: grid dimensions differ");
    double sum = 0.0;
    std::size_t n = 0;
    for (int r = 0; r < est.rows; ++r) {
        for (int c = 0; c < est.cols; ++c) {
            const std::size_t i = est.index(r, c);
            if (!est.valid[i] || !gt.valid[i]) continue;
            const double dz = pixel_z(est, r, c) - pixel_z(gt, r, c);
            sum += dz * dz;
            ++n;
        }
    }
    if (n == 0) throw InvalidInputError("rmse_depth: no jointly valid pixels");
    return std::sqrt(sum / n);
}

double mae_normals(const NormalField& est, const NormalField& gt) {
    if (est.rows != gt.rows || est.cols != gt.cols)
        throw InvalidInputError("mae_normals: grid dimensions differ");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < est.n.size(); ++i) {
        if (!est.valid[i] || !gt.valid[i]) continue;
        const double d = std::clamp(dot(est.n[i], gt.n[i]), -1.0, 1.0);
        sum += std::acos(d);
        ++n;
    }
    if (n == 0) throw InvalidInputError("mae_normals: no jointly valid pixels");
    return sum / n * 180.0 / M_PI;
}

DepthMap zero_mean_normalize(const DepthMap& depth) {
    double mean_z = 0.0;
    std::size_t n = 0;
    for (int r = 0; r < depth.rows; ++r)
        for (int c = 0; c < depth.cols; ++c)
            if (depth.valid[depth.index(r, c)]) {
                mean_z += pixel_z(depth, r, c);
                ++n;
            }
    if (n == 0) throw InvalidInputError("zero_mean_normalize: no valid pixels");
    mean_z /= n;

    DepthMap out = depth;
    for (int r = 0; r < depth.rows; ++r) {
        for (int c = 0; c < depth.cols; ++c) {
            const std::size_t i = depth.index(r, c);
            if (!depth.valid[i]) continue;
            const Ray ray = unproject(depth.camera, Pixel{c + 0.5, r + 0.5});
            const double z = ray.origin.z + depth.d[i] * ray.dir.z;
            out.d[i] = (z - mean_z - ray.origin.z) / ray.dir.z;
        }
    }
    return out;
}

BenchmarkReport run_benchmark(const SceneSpec& scene, const std::vector<int>& t_list,
                              InitScheme init_scheme, const SolverOptions& opts,
                              const FrameCallback& on_frame) {
    BenchmarkReport report;
    report.init_scheme = init_scheme;

    SolverOptions frame_opts = opts;
    frame_opts.init_scheme = init_scheme;
    const bool ortho = scene.camera.mode == ProjectionMode::orthographic;
    if (scene.media.mu == 1.0) report.degenerate_energy = true;

    std::optional<DepthMap> prev;
    double rmse_sum = 0.0, mae_sum = 0.0;
    std::size_t ok_frames = 0;
    for (const int t : t_list) {
        FrameMetrics fm;
        fm.frame_t = t;
        try {
            SceneSpec frame_scene = scene;
            if (frame_scene.surface.kind == SurfaceKind::wave1 ||
                frame_scene.surface.kind == SurfaceKind::wave2)
                frame_scene.surface.t = t;
            const TraceOutput traced = generate(frame_scene);
            const ReconstructionResult rec = reconstruct(traced.correspondences, frame_opts, prev);
            if (init_scheme == InitScheme::sequential) prev = rec.depth;

            DepthMap est = rec.depth;
            DepthMap gt = traced.ground_truth.depth;
            if (ortho) {
                est = zero_mean_normalize(est);
                gt = zero_mean_normalize(gt);
            }
            fm.rmse_depth = rmse_depth(est, gt);
            fm.mae_normals_deg = mae_normals(rec.normals, traced.ground_truth.normals);
            fm.energy_final = rec.final_energy;
            fm.iterations = rec.iterations;
            const std::size_t total = static_cast<std::size_t>(scene.rows) * scene.cols;
            fm.excluded_pixels =
                total - jointly_valid_count(rec.normals.valid, traced.ground_truth.normals.valid);
            rmse_sum += fm.rmse_depth;
            mae_sum += fm.mae_normals_deg;
            ++ok_frames;
            if (on_frame) on_frame(t, rec, traced.ground_truth.depth);
        } catch (const std::exception& e) {
            fm.failed = true;
            fm.error = e.what();
        }
        report.frames.push_back(std::move(fm));
    }
    if (ok_frames > 0) {
        report.mean_rmse = rmse_sum / ok_frames;
        report.mean_mae_deg = mae_sum / ok_frames;
    }
    return report;
}

}  // namespace refract

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "refract/maps.hpp"
#include "refract/reconstruction.hpp"
#include "refract/scenes.hpp"

namespace refract {

// RMSE of the point-cloud z-coordinates over the jointly valid pixels.
double rmse_depth(const DepthMap& est, const DepthMap& gt);

// Mean arccos(est . gt) in degrees over the jointly valid pixels.
double mae_normals(const NormalField& est, const NormalField& gt);

std::size_t jointly_valid_count(const std::vector<std::uint8_t>& a,
                                const std::vector<std::uint8_t>& b);

// Subtracts the mean z over the valid pixels from every z, adjusting d along
// each line of sight. Used for orthographic comparisons (height ambiguity);
// meaningful for perspective input only when forced.
DepthMap zero_mean_normalize(const DepthMap& depth);

struct FrameMetrics {
    int frame_t{0};
    double rmse_depth{0.0};
    double mae_normals_deg{0.0};
    double energy_final{0.0};
    int iterations{0};
    std::size_t excluded_pixels{0};
    bool failed{false};
    std::string error;
};

struct BenchmarkReport {
    std::string scene_descriptor;
    InitScheme init_scheme{InitScheme::fixed};
    std::vector<FrameMetrics> frames;
    double mean_rmse{0.0};
    double mean_mae_deg{0.0};
    bool degenerate_energy{false};  // e.g. mu = 1: the energy carries no signal
};

// Called after each successfully reconstructed frame (e.g. to write plots).
using FrameCallback =
    std::function<void(int t, const ReconstructionResult& rec, const DepthMap& gt_depth)>;

// Scene template: the surface kind/background/camera of `scene` are reused
// for every t in t_list (generate, reconstruct, evaluate). Sequential
// initialization threads the previous frame's estimate.
BenchmarkReport run_benchmark(const SceneSpec& scene, const std::vector<int>& t_list,
                              InitScheme init_scheme, const SolverOptions& opts,
                              const FrameCallback& on_frame = nullptr);

}  // namespace refract

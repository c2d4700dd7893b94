#pragma once

#include <array>
#include <optional>
#include <utility>

#include "refract/maps.hpp"
#include "refract/scenes.hpp"

namespace refract {

struct GroundTruth {
    DepthMap depth;
    NormalField normals;
    SurfaceSpec surface;
};

// Smallest d > 0 with point_on_ray(ray, d) on the height field; second
// element is the surface point. Root residual |z - f(x, y)| < 1e-10.
std::pair<double, Vec3d> intersect_surface(const Ray& ray, const SurfaceSpec& spec);

// One forward light path: unproject, hit the surface, refract at the
// analytic normal, intersect the background. nullopt on TIR or a miss.
std::optional<Vec3d> trace_pixel(const SceneSpec& scene, const Pixel& pixel);

struct TraceOutput {
    CorrespondenceMap correspondences;
    GroundTruth ground_truth;
};

// Traces every pixel center. An optional Gaussian perturbation of X_B
// (off by default) is available for robustness experiments.
TraceOutput generate(const SceneSpec& scene, double noise_std = 0.0, std::uint64_t seed = 0);

// Per-pixel displacement between the refracted observation and the
// unrefracted projection of the same background point (visualization only).
struct FlowField {
    int rows{0};
    int cols{0};
    std::vector<std::array<double, 2>> flow;
    std::vector<std::uint8_t> valid;
};

FlowField synthesize_flow(const CorrespondenceMap& map);

}  // namespace refract

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "refract/geometry.hpp"
#include "refract/snell.hpp"

namespace refract {

enum class SurfaceKind { wave1, wave2, flat_plane, custom_heightfield };

// Sample grid for externally supplied surfaces; bilinear interpolation with
// clamped edges over the rectangle [x_min, x_max] x [y_min, y_max].
struct HeightfieldSamples {
    int rows{0};
    int cols{0};
    double x_min{-1.0};
    double x_max{1.0};
    double y_min{-1.0};
    double y_max{1.0};
    std::vector<double> z;  // row-major, rows*cols
};

// Analytic benchmark surfaces: height fields z = f(x, y).
// wave1 and wave2 are the time-varying benchmark waves (t in [0, 99]);
// flat_plane is z = c.
struct SurfaceSpec {
    SurfaceKind kind{SurfaceKind::flat_plane};
    int t{0};
    double c{2.0};
    double z_offset{0.0};  // rigid translation along the optical axis
    HeightfieldSamples samples;

    static SurfaceSpec wave1(int t);
    static SurfaceSpec wave2(int t);
    static SurfaceSpec flat_plane(double c);
    static SurfaceSpec heightfield(HeightfieldSamples samples);
};

enum class BackgroundKind { flat, func };

// Background geometry: a plane at z0 (default 2.5) or the fixed sinusoidal
// depth function z(x, y) = 2.5 + 0.05 (sin 2*pi*x + cos 2*pi*y).
struct BackgroundSpec {
    BackgroundKind kind{BackgroundKind::flat};
    double z0{2.5};
};

struct SceneSpec {
    SurfaceSpec surface;
    BackgroundSpec background;
    MediumPair media{1.0 / 1.33};
    CameraModel camera;
    int rows{0};
    int cols{0};

    // Validates grid/camera agreement and that the background lies behind
    // the surface over the imaged domain.
    void validate() const;
};

double surface_height(const SurfaceSpec& spec, double x, double y);
std::pair<double, double> surface_gradient(const SurfaceSpec& spec, double x, double y);

// Ground-truth normal at (x, y): normalize((dz/dx, dz/dy, -1)), oriented
// toward the camera (negative z-component).
Vec3d surface_normal(const SurfaceSpec& spec, double x, double y);

double background_height(const BackgroundSpec& spec, double x, double y);

// Intersection of a forward ray (dir.z > 0) with the background surface.
Vec3d background_point(const BackgroundSpec& spec, const Ray& ray);

// Flat key-value scene configuration ("key value" or "key = value" lines,
// '#' comments). Unknown keys are an error.
SceneSpec parse_scene_config(const std::string& text);
SceneSpec load_scene_config(const std::string& path);

}  // namespace refract

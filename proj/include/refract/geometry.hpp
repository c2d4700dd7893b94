#pragma once

#include "refract/errors.hpp"
#include "refract/vec3.hpp"

namespace refract {

// Continuous pixel coordinates (column u, row v). Integer grid samples are
// taken at pixel centers, i.e. callers pass (u + 0.5, v + 0.5).
struct Pixel {
    double u{};
    double v{};
};

// A ray with a unit direction. Perspective rays start at the camera origin;
// orthographic rays are parallel with distinct origins on the z = 0 plane.
struct Ray {
    Vec3d origin;
    Vec3d dir;
};

enum class ProjectionMode { perspective, orthographic };

// Camera at the world origin looking toward +Z.
// Perspective: upper-triangular K with focal lengths fx, fy and principal
// point cx, cy (all in pixels, zero skew).
// Orthographic: world-units-per-pixel pitch and image center cx, cy.
struct CameraModel {
    ProjectionMode mode{ProjectionMode::perspective};
    double fx{1.0};
    double fy{1.0};
    double cx{0.0};
    double cy{0.0};
    double pitch{1.0};
    int width{0};
    int height{0};

    static CameraModel make_perspective(double fx, double fy, double cx, double cy,
                                        int width, int height);
    static CameraModel make_orthographic(double pitch, double cx, double cy,
                                         int width, int height);

    // Default cameras used by the benchmark scenes: the pixel grid images the
    // world patch (x, y) in [-1, 1]^2 at the surface mean depth z = 2.
    static CameraModel default_for_grid(ProjectionMode mode, int rows, int cols);
};

Ray unproject(const CameraModel& camera, const Pixel& pixel);
Pixel project(const CameraModel& camera, const Vec3d& point);
Vec3d point_on_ray(const Ray& ray, double d);

}  // namespace refract

#include "refract/geometry.hpp"

#include <cmath>

namespace refract {

CameraModel CameraModel::make_perspective(double fx, double fy, double cx, double cy,
                                          int width, int height) {
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(cx) || !std::isfinite(cy))
        throw InvalidInputError("perspective camera requires fx > 0, fy > 0 and finite principal point");
    CameraModel c;
    c.mode = ProjectionMode::perspective;
    c.fx = fx;
    c.fy = fy;
    c.cx = cx;
    c.cy = cy;
    c.width = width;
    c.height = height;
    return c;
}

CameraModel CameraModel::make_orthographic(double pitch, double cx, double cy,
                                           int width, int height) {
    if (!(pitch > 0.0) || !std::isfinite(cx) || !std::isfinite(cy))
        throw InvalidInputError("orthographic camera requires pitch > 0 and a finite center");
    CameraModel c;
    c.mode = ProjectionMode::orthographic;
    c.pitch = pitch;
    c.cx = cx;
    c.cy = cy;
    c.width = width;
    c.height = height;
    return c;
}

CameraModel CameraModel::default_for_grid(ProjectionMode mode, int rows, int cols) {
    if (rows <= 0 || cols <= 0) throw InvalidInputError("grid dimensions must be positive");
    if (mode == ProjectionMode::perspective) {
        // (u - cx)/fx * z spans [-1, 1] at z = 2 for u in [0, cols].
        return make_perspective(static_cast<double>(cols), static_cast<double>(rows),
                                cols / 2.0, rows / 2.0, cols, rows);
    }
    return make_orthographic(2.0 / cols, cols / 2.0, rows / 2.0, cols, rows);
}

Ray unproject(const CameraModel& camera, const Pixel& pixel) {
    if (!std::isfinite(pixel.u) || !std::isfinite(pixel.v))
        throw InvalidInputError("unproject: non-finite pixel coordinates");
    if (camera.mode == ProjectionMode::perspective) {
        // K^-1 [u, v, 1]^T with zero skew, normalized to unit length.
        const Vec3d d{(pixel.u - camera.cx) / camera.fx, (pixel.v - camera.cy) / camera.fy, 1.0};
        return Ray{Vec3d{0.0, 0.0, 0.0}, normalized(d)};
    }
    return Ray{Vec3d{(pixel.u - camera.cx) * camera.pitch, (pixel.v - camera.cy) * camera.pitch, 0.0},
               Vec3d{0.0, 0.0, 1.0}};
}

Pixel project(const CameraModel& camera, const Vec3d& point) {
    if (camera.mode == ProjectionMode::perspective) {
        if (!(point.z > 0.0)) throw GeometryError("project: point is behind the perspective camera");
        return Pixel{camera.fx * point.x / point.z + camera.cx,
                     camera.fy * point.y / point.z + camera.cy};
    }
    return Pixel{point.x / camera.pitch + camera.cx, point.y / camera.pitch + camera.cy};
}

Vec3d point_on_ray(const Ray& ray, double d) {
    if (!(d > 0.0)) throw InvalidInputError("point_on_ray: distance must be positive");
    return ray.origin + d * ray.dir;
}

}  // namespace refract

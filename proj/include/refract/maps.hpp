#pragma once

#include <cstdint>
#include <vector>

#include "refract/geometry.hpp"
#include "refract/snell.hpp"

namespace refract {

// Per-pixel distance d along the line of sight. Invalid pixels carry no
// meaningful value.
struct DepthMap {
    int rows{0};
    int cols{0};
    CameraModel camera;
    std::vector<double> d;
    std::vector<std::uint8_t> valid;

    DepthMap() = default;
    DepthMap(int rows_, int cols_, const CameraModel& camera_)
        : rows(rows_), cols(cols_), camera(camera_),
          d(static_cast<std::size_t>(rows_) * cols_, 0.0),
          valid(static_cast<std::size_t>(rows_) * cols_, 0) {}

    std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * cols + c; }
};

// Per-pixel unit surface normals oriented toward the camera (n.z < 0).
struct NormalField {
    int rows{0};
    int cols{0};
    std::vector<Vec3d> n;
    std::vector<std::uint8_t> valid;

    NormalField() = default;
    NormalField(int rows_, int cols_)
        : rows(rows_), cols(cols_),
          n(static_cast<std::size_t>(rows_) * cols_),
          valid(static_cast<std::size_t>(rows_) * cols_, 0) {}

    std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * cols + c; }
};

// Per-pixel known background 3D point; the reconstruction input.
struct CorrespondenceMap {
    int rows{0};
    int cols{0};
    CameraModel camera;
    MediumPair media{1.0};
    std::vector<Vec3d> xb;
    std::vector<std::uint8_t> valid;

    CorrespondenceMap() = default;
    CorrespondenceMap(int rows_, int cols_, const CameraModel& camera_, const MediumPair& media_)
        : rows(rows_), cols(cols_), camera(camera_), media(media_),
          xb(static_cast<std::size_t>(rows_) * cols_),
          valid(static_cast<std::size_t>(rows_) * cols_, 0) {}

    std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * cols + c; }

    // Pixel center sampled by grid cell (r, c).
    Pixel pixel_center(int r, int c) const { return Pixel{c + 0.5, r + 0.5}; }
};

}  // namespace refract

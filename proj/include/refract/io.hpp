#pragma once

#include <string>
#include <vector>

#include "refract/maps.hpp"
#include "refract/metrics.hpp"
#include "refract/reconstruction.hpp"
#include "refract/tracer.hpp"

namespace refract {

// Correspondence-map binary format "RFRC" (little-endian): magic, version
// u32 = 1, rows u32, cols u32, camera block (mode u8, 6 f64 params), mu f64,
// then rows*cols records of (valid u8, xb f64, yb f64, zb f64).
void write_rfrc(const std::string& path, const CorrespondenceMap& map);
CorrespondenceMap read_rfrc(const std::string& path);

// Sibling format "RFDM" for depth/normal maps: magic, version u32 = 1, rows,
// cols, channels u32 (1 for depth, 3 for normals), camera block, then f64
// payload row-major. Invalid pixels are stored as NaN.
void write_depth_rfdm(const std::string& path, const DepthMap& depth);
DepthMap read_depth_rfdm(const std::string& path);

void write_normals_rfdm(const std::string& path, const NormalField& normals,
                        const CameraModel& camera);

struct NormalsFile {
    NormalField normals;
    CameraModel camera;
};
NormalsFile read_normals_rfdm(const std::string& path);

// CSV uses '.' decimal separator, '\n' line endings and a header row.
void write_iteration_csv(const std::string& path, const std::vector<IterationRecord>& history);
void write_benchmark_csv(const std::string& path, const BenchmarkReport& report);
std::string format_benchmark_summary(const BenchmarkReport& report);
void write_flow_csv(const std::string& path, const FlowField& flow);
void write_energy_grid_csv(const std::string& path, const EnergyGrid& grid);

// Plain binary portable pixmap/graymap writers.
void write_ppm(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& rgb);
void write_pgm(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& gray);

// Standard optical-flow color wheel encoding (hue = direction, saturation =
// magnitude, normalized by the maximum valid magnitude; invalid pixels black).
std::vector<std::uint8_t> flow_to_rgb(const FlowField& flow);
void write_flow_ppm(const std::string& path, const FlowField& flow);

// Per-pixel |z_est - z_gt| as a linear-scale PGM; the scale maximum is
// written to a sidecar text file "<path>.max.txt".
void write_depth_error_pgm(const std::string& path, const DepthMap& est, const DepthMap& gt);

void write_energy_grid_pgm(const std::string& path, const EnergyGrid& grid);

}  // namespace refract

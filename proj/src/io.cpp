#include "refract/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace refract {

namespace {

constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void write_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw IoError("unexpected end of file");
    return v;
}

void write_camera_block(std::ostream& out, const CameraModel& cam) {
    const std::uint8_t mode = cam.mode == ProjectionMode::perspective ? 0 : 1;
    write_raw(out, mode);
    double params[6] = {0, 0, 0, 0, 0, 0};
    if (cam.mode == ProjectionMode::perspective) {
        params[0] = cam.fx;
        params[1] = cam.fy;
        params[2] = cam.cx;
        params[3] = cam.cy;
    } else {
        params[0] = cam.pitch;
        params[1] = cam.cx;
        params[2] = cam.cy;
    }
    for (double p : params) write_raw(out, p);
}

CameraModel read_camera_block(std::istream& in, int rows, int cols) {
    const auto mode = read_raw<std::uint8_t>(in);
    double params[6];
    for (double& p : params) p = read_raw<double>(in);
    if (mode == 0)
        return CameraModel::make_perspective(params[0], params[1], params[2], params[3], cols, rows);
    if (mode == 1)
        return CameraModel::make_orthographic(params[0], params[1], params[2], cols, rows);
    throw IoError("unknown camera mode byte");
}

void check_magic(std::istream& in, const char* magic) {
    char buf[4];
    in.read(buf, 4);
    if (!in || std::memcmp(buf, magic, 4) != 0)
        throw IoError(std::string("bad magic, expected ") + magic);
    const auto version = read_raw<std::uint32_t>(in);
    if (version != kFormatVersion) throw IoError("unsupported format version");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    return in;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_rfrc(const std::string& path, const CorrespondenceMap& map) {
    auto out = open_out(path);
    out.write("RFRC", 4);
    write_raw(out, kFormatVersion);
    write_raw(out, static_cast<std::uint32_t>(map.rows));
    write_raw(out, static_cast<std::uint32_t>(map.cols));
    write_camera_block(out, map.camera);
    write_raw(out, map.media.mu);
    for (std::size_t i = 0; i < map.xb.size(); ++i) {
        write_raw(out, map.valid[i]);
        write_raw(out, map.xb[i].x);
        write_raw(out, map.xb[i].y);
        write_raw(out, map.xb[i].z);
    }
    if (!out) throw IoError("write failed: " + path);
}

CorrespondenceMap read_rfrc(const std::string& path) {
    auto in = open_in(path);
    check_magic(in, "RFRC");
    const int rows = static_cast<int>(read_raw<std::uint32_t>(in));
    const int cols = static_cast<int>(read_raw<std::uint32_t>(in));
    const CameraModel cam = read_camera_block(in, rows, cols);
    const double mu = read_raw<double>(in);
    CorrespondenceMap map(rows, cols, cam, MediumPair(mu));
    for (std::size_t i = 0; i < map.xb.size(); ++i) {
        map.valid[i] = read_raw<std::uint8_t>(in);
        map.xb[i].x = read_raw<double>(in);
        map.xb[i].y = read_raw<double>(in);
        map.xb[i].z = read_raw<double>(in);
    }
    return map;
}

namespace {

void write_rfdm(const std::string& path, int rows, int cols, std::uint32_t channels,
                const CameraModel& cam, const std::vector<double>& payload) {
    auto out = open_out(path);
    out.write("RFDM", 4);
    write_raw(out, kFormatVersion);
    write_raw(out, static_cast<std::uint32_t>(rows));
    write_raw(out, static_cast<std::uint32_t>(cols));
    write_raw(out, channels);
    write_camera_block(out, cam);
    for (double v : payload) write_raw(out, v);
    if (!out) throw IoError("write failed: " + path);
}

struct RfdmFile {
    int rows, cols;
    std::uint32_t channels;
    CameraModel camera;
    std::vector<double> payload;
};

RfdmFile read_rfdm(const std::string& path, std::uint32_t expect_channels) {
    auto in = open_in(path);
    check_magic(in, "RFDM");
    RfdmFile f;
    f.rows = static_cast<int>(read_raw<std::uint32_t>(in));
    f.cols = static_cast<int>(read_raw<std::uint32_t>(in));
    f.channels = read_raw<std::uint32_t>(in);
    if (f.channels != expect_channels)
        throw IoError("RFDM channel count mismatch in " + path);
    f.camera = read_camera_block(in, f.rows, f.cols);
    f.payload.resize(static_cast<std::size_t>(f.rows) * f.cols * f.channels);
    for (double& v : f.payload) v = read_raw<double>(in);
    return f;
}

}  // namespace

void write_depth_rfdm(const std::string& path, const DepthMap& depth) {
    std::vector<double> payload(depth.d.size());
    for (std::size_t i = 0; i < depth.d.size(); ++i)
        payload[i] = depth.valid[i] ? depth.d[i] : std::numeric_limits<double>::quiet_NaN();
    write_rfdm(path, depth.rows, depth.cols, 1, depth.camera, payload);
}

DepthMap read_depth_rfdm(const std::string& path) {
    const RfdmFile f = read_rfdm(path, 1);
    DepthMap depth(f.rows, f.cols, f.camera);
    for (std::size_t i = 0; i < f.payload.size(); ++i) {
        if (std::isnan(f.payload[i])) continue;
        depth.d[i] = f.payload[i];
        depth.valid[i] = 1;
    }
    return depth;
}

void write_normals_rfdm(const std::string& path, const NormalField& normals,
                        const CameraModel& camera) {
    std::vector<double> payload(normals.n.size() * 3);
    for (std::size_t i = 0; i < normals.n.size(); ++i) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        payload[3 * i + 0] = normals.valid[i] ? normals.n[i].x : nan;
        payload[3 * i + 1] = normals.valid[i] ? normals.n[i].y : nan;
        payload[3 * i + 2] = normals.valid[i] ? normals.n[i].z : nan;
    }
    write_rfdm(path, normals.rows, normals.cols, 3, camera, payload);
}

NormalsFile read_normals_rfdm(const std::string& path) {
    const RfdmFile f = read_rfdm(path, 3);
    NormalsFile out{NormalField(f.rows, f.cols), f.camera};
    for (std::size_t i = 0; i < out.normals.n.size(); ++i) {
        const double x = f.payload[3 * i + 0];
        if (std::isnan(x)) continue;
        out.normals.n[i] = Vec3d{x, f.payload[3 * i + 1], f.payload[3 * i + 2]};
        out.normals.valid[i] = 1;
    }
    return out;
}

void write_iteration_csv(const std::string& path, const std::vector<IterationRecord>& history) {
    auto out = open_out(path);
    out << "iteration,energy,grad_inf_norm,step_length\n";
    for (const auto& rec : history)
        out << rec.iteration << ',' << fmt_double(rec.energy) << ','
            << fmt_double(rec.grad_inf_norm) << ',' << fmt_double(rec.step_length) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

void write_benchmark_csv(const std::string& path, const BenchmarkReport& report) {
    auto out = open_out(path);
    out << "t,rmse,mae_deg,energy,iterations,excluded_pixels\n";
    for (const auto& fm : report.frames) {
        if (fm.failed) {
            out << fm.frame_t << ",nan,nan,nan,0,0\n";
            continue;
        }
        out << fm.frame_t << ',' << fmt_double(fm.rmse_depth) << ','
            << fmt_double(fm.mae_normals_deg) << ',' << fmt_double(fm.energy_final) << ','
            << fm.iterations << ',' << fm.excluded_pixels << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::string format_benchmark_summary(const BenchmarkReport& report) {
    std::ostringstream out;
    out << "scene: " << report.scene_descriptor << '\n';
    const char* scheme = report.init_scheme == InitScheme::independent_flat ? "independent_flat"
                         : report.init_scheme == InitScheme::sequential    ? "sequential"
                                                                           : "fixed";
    out << "init scheme: " << scheme << '\n';
    out << "frames: " << report.frames.size() << '\n';
    std::size_t failed = 0;
    for (const auto& fm : report.frames)
        if (fm.failed) ++failed;
    if (failed) out << "failed frames: " << failed << '\n';
    if (report.degenerate_energy)
        out << "warning: mu = 1, the energy is degenerate and the reconstruction ill-posed\n";
    out << "mean RMSE: " << fmt_double(report.mean_rmse) << '\n';
    out << "mean MAE [deg]: " << fmt_double(report.mean_mae_deg) << '\n';
    return out.str();
}

void write_flow_csv(const std::string& path, const FlowField& flow) {
    auto out = open_out(path);
    out << "row,col,flow_u,flow_v,valid\n";
    for (int r = 0; r < flow.rows; ++r) {
        for (int c = 0; c < flow.cols; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * flow.cols + c;
            out << r << ',' << c << ',' << fmt_double(flow.flow[i][0]) << ','
                << fmt_double(flow.flow[i][1]) << ',' << int(flow.valid[i]) << '\n';
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_energy_grid_csv(const std::string& path, const EnergyGrid& grid) {
    auto out = open_out(path);
    out << "d1,d2,log10_energy\n";
    for (int i2 = 0; i2 < grid.d2.n; ++i2)
        for (int i1 = 0; i1 < grid.d1.n; ++i1)
            out << fmt_double(grid.d1.at(i1)) << ',' << fmt_double(grid.d2.at(i2)) << ','
                << fmt_double(grid.value(i1, i2)) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

void write_ppm(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& rgb) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
        throw InvalidInputError("write_ppm: buffer size mismatch");
    auto out = open_out(path);
    out << "P6\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()), rgb.size());
    if (!out) throw IoError("write failed: " + path);
}

void write_pgm(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& gray) {
    if (gray.size() != static_cast<std::size_t>(width) * height)
        throw InvalidInputError("write_pgm: buffer size mismatch");
    auto out = open_out(path);
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(gray.data()), gray.size());
    if (!out) throw IoError("write failed: " + path);
}

namespace {

// Middlebury-style color wheel: 55 hues over RY/YG/GC/CB/BM/MR arcs.
std::vector<std::array<int, 3>> make_color_wheel() {
    const int RY = 15, YG = 6, GC = 4, CB = 11, BM = 13, MR = 6;
    std::vector<std::array<int, 3>> wheel;
    for (int i = 0; i < RY; ++i) wheel.push_back({255, 255 * i / RY, 0});
    for (int i = 0; i < YG; ++i) wheel.push_back({255 - 255 * i / YG, 255, 0});
    for (int i = 0; i < GC; ++i) wheel.push_back({0, 255, 255 * i / GC});
    for (int i = 0; i < CB; ++i) wheel.push_back({0, 255 - 255 * i / CB, 255});
    for (int i = 0; i < BM; ++i) wheel.push_back({255 * i / BM, 0, 255});
    for (int i = 0; i < MR; ++i) wheel.push_back({255, 0, 255 - 255 * i / MR});
    return wheel;
}

}  // namespace

std::vector<std::uint8_t> flow_to_rgb(const FlowField& flow) {
    static const auto wheel = make_color_wheel();
    const int ncols = static_cast<int>(wheel.size());

    double max_mag = 0.0;
    for (std::size_t i = 0; i < flow.flow.size(); ++i)
        if (flow.valid[i])
            max_mag = std::max(max_mag, std::hypot(flow.flow[i][0], flow.flow[i][1]));
    if (max_mag == 0.0) max_mag = 1.0;

    std::vector<std::uint8_t> rgb(flow.flow.size() * 3, 0);
    for (std::size_t i = 0; i < flow.flow.size(); ++i) {
        if (!flow.valid[i]) continue;
        const double fu = flow.flow[i][0] / max_mag;
        const double fv = flow.flow[i][1] / max_mag;
        const double rad = std::min(std::hypot(fu, fv), 1.0);
        const double a = std::atan2(-fv, -fu) / M_PI;
        const double fk = (a + 1.0) / 2.0 * (ncols - 1);
        const int k0 = static_cast<int>(fk) % ncols;
        const int k1 = (k0 + 1) % ncols;
        const double f = fk - static_cast<int>(fk);
        for (int ch = 0; ch < 3; ++ch) {
            double col = (1.0 - f) * (wheel[k0][ch] / 255.0) + f * (wheel[k1][ch] / 255.0);
            col = 1.0 - rad * (1.0 - col);  // desaturate toward white at zero flow
            rgb[3 * i + ch] = static_cast<std::uint8_t>(std::lround(255.0 * col));
        }
    }
    return rgb;
}

void write_flow_ppm(const std::string& path, const FlowField& flow) {
    write_ppm(path, flow.cols, flow.rows, flow_to_rgb(flow));
}

void write_depth_error_pgm(const std::string& path, const DepthMap& est, const DepthMap& gt) {
    if (est.rows != gt.rows || est.cols != gt.cols)
        throw InvalidInputError("write_depth_error_pgm: grid dimensions differ");
    std::vector<double> err(est.d.size(), 0.0);
    double max_err = 0.0;
    for (int r = 0; r < est.rows; ++r) {
        for (int c = 0; c < est.cols; ++c) {
            const std::size_t i = est.index(r, c);
            if (!est.valid[i] || !gt.valid[i]) continue;
            const Ray re = unproject(est.camera, Pixel{c + 0.5, r + 0.5});
            const Ray rg = unproject(gt.camera, Pixel{c + 0.5, r + 0.5});
            err[i] = std::abs((re.origin.z + est.d[i] * re.dir.z) -
                              (rg.origin.z + gt.d[i] * rg.dir.z));
            max_err = std::max(max_err, err[i]);
        }
    }
    std::vector<std::uint8_t> gray(err.size(), 0);
    const double scale = max_err > 0.0 ? 255.0 / max_err : 0.0;
    for (std::size_t i = 0; i < err.size(); ++i)
        gray[i] = static_cast<std::uint8_t>(std::lround(err[i] * scale));
    write_pgm(path, est.cols, est.rows, gray);

    auto sidecar = open_out(path + ".max.txt");
    sidecar << "max_abs_z_error " << fmt_double(max_err) << '\n';
}

void write_energy_grid_pgm(const std::string& path, const EnergyGrid& grid) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : grid.log10_energy) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
    std::vector<std::uint8_t> gray(grid.log10_energy.size());
    for (std::size_t i = 0; i < gray.size(); ++i)
        gray[i] = static_cast<std::uint8_t>(std::lround((grid.log10_energy[i] - lo) * scale));
    write_pgm(path, grid.d1.n, grid.d2.n, gray);
}

}  // namespace refract

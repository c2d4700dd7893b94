#include "refract/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "refract/rootfind.hpp"

namespace refract {

namespace {

constexpr double kWaveAmplitude = 0.1;

void validate_wave_time(int t) {
    if (t < 0 || t > 99)
        throw InvalidInputError("wave surfaces require t in [0, 99]");
}

// Bilinear interpolation with clamped edges; also returns the cell gradient.
struct BilinearSample {
    double z;
    double dzdx;
    double dzdy;
};

BilinearSample sample_heightfield(const HeightfieldSamples& hf, double x, double y) {
    if (hf.rows < 2 || hf.cols < 2 || static_cast<int>(hf.z.size()) != hf.rows * hf.cols)
        throw InvalidInputError("custom heightfield needs at least a 2x2 sample grid");
    const double dx = (hf.x_max - hf.x_min) / (hf.cols - 1);
    const double dy = (hf.y_max - hf.y_min) / (hf.rows - 1);
    double gx = (x - hf.x_min) / dx;
    double gy = (y - hf.y_min) / dy;
    gx = std::clamp(gx, 0.0, static_cast<double>(hf.cols - 1));
    gy = std::clamp(gy, 0.0, static_cast<double>(hf.rows - 1));
    const int c0 = std::min(static_cast<int>(gx), hf.cols - 2);
    const int r0 = std::min(static_cast<int>(gy), hf.rows - 2);
    const double fx = gx - c0;
    const double fy = gy - r0;
    const double z00 = hf.z[r0 * hf.cols + c0];
    const double z01 = hf.z[r0 * hf.cols + c0 + 1];
    const double z10 = hf.z[(r0 + 1) * hf.cols + c0];
    const double z11 = hf.z[(r0 + 1) * hf.cols + c0 + 1];
    const double z = z00 * (1 - fx) * (1 - fy) + z01 * fx * (1 - fy) +
                     z10 * (1 - fx) * fy + z11 * fx * fy;
    const double dzdx = ((z01 - z00) * (1 - fy) + (z11 - z10) * fy) / dx;
    const double dzdy = ((z10 - z00) * (1 - fx) + (z11 - z01) * fx) / dy;
    return {z, dzdx, dzdy};
}

struct RadialWave {
    double center_x;
    double center_y;
    double freq;   // angular frequency against the radius
    double sign;   // +1: crest at the center, -1: trough
};

RadialWave wave_params(const SurfaceSpec& spec) {
    if (spec.kind == SurfaceKind::wave1)
        return {1.0, 0.5, M_PI * (spec.t + 50) / 80.0, +1.0};
    return {-0.05, -0.05, M_PI * (spec.t + 60) / 75.0, -1.0};
}

}  // namespace

SurfaceSpec SurfaceSpec::wave1(int t) {
    validate_wave_time(t);
    SurfaceSpec s;
    s.kind = SurfaceKind::wave1;
    s.t = t;
    return s;
}

SurfaceSpec SurfaceSpec::wave2(int t) {
    validate_wave_time(t);
    SurfaceSpec s;
    s.kind = SurfaceKind::wave2;
    s.t = t;
    return s;
}

SurfaceSpec SurfaceSpec::flat_plane(double c) {
    if (!(c > 0.0) || !std::isfinite(c))
        throw InvalidInputError("flat_plane depth must be positive and finite");
    SurfaceSpec s;
    s.kind = SurfaceKind::flat_plane;
    s.c = c;
    return s;
}

SurfaceSpec SurfaceSpec::heightfield(HeightfieldSamples samples) {
    SurfaceSpec s;
    s.kind = SurfaceKind::custom_heightfield;
    s.samples = std::move(samples);
    sample_heightfield(s.samples, 0.0, 0.0);  // validates the grid
    return s;
}

double surface_height(const SurfaceSpec& spec, double x, double y) {
    switch (spec.kind) {
        case SurfaceKind::flat_plane:
            return spec.z_offset + spec.c;
        case SurfaceKind::custom_heightfield:
            return spec.z_offset + sample_heightfield(spec.samples, x, y).z;
        case SurfaceKind::wave1:
        case SurfaceKind::wave2: {
            const RadialWave w = wave_params(spec);
            const double r = std::hypot(x - w.center_x, y - w.center_y);
            return spec.z_offset + 2.0 + w.sign * kWaveAmplitude * std::cos(w.freq * r);
        }
    }
    throw InvalidInputError("surface_height: unknown surface kind");
}

std::pair<double, double> surface_gradient(const SurfaceSpec& spec, double x, double y) {
    switch (spec.kind) {
        case SurfaceKind::flat_plane:
            return {0.0, 0.0};
        case SurfaceKind::custom_heightfield: {
            const BilinearSample s = sample_heightfield(spec.samples, x, y);
            return {s.dzdx, s.dzdy};
        }
        case SurfaceKind::wave1:
        case SurfaceKind::wave2: {
            const RadialWave w = wave_params(spec);
            const double ux = x - w.center_x;
            const double uy = y - w.center_y;
            const double r = std::hypot(ux, uy);
            if (r == 0.0) return {0.0, 0.0};  // radial extremum
            const double dz_dr = -w.sign * kWaveAmplitude * w.freq * std::sin(w.freq * r);
            return {dz_dr * ux / r, dz_dr * uy / r};
        }
    }
    throw InvalidInputError("surface_gradient: unknown surface kind");
}

Vec3d surface_normal(const SurfaceSpec& spec, double x, double y) {
    const auto [zx, zy] = surface_gradient(spec, x, y);
    return normalized(Vec3d{zx, zy, -1.0});
}

double background_height(const BackgroundSpec& spec, double x, double y) {
    if (spec.kind == BackgroundKind::flat) return spec.z0;
    return 2.5 + 0.05 * (std::sin(2.0 * M_PI * x) + std::cos(2.0 * M_PI * y));
}

Vec3d background_point(const BackgroundSpec& spec, const Ray& ray) {
    if (!(ray.dir.z > 0.0))
        throw GeometryError("background_point: ray must travel toward +Z");
    if (spec.kind == BackgroundKind::flat) {
        const double t = (spec.z0 - ray.origin.z) / ray.dir.z;
        if (!(t > 0.0)) throw GeometryError("background_point: plane is behind the ray origin");
        return ray.origin + t * ray.dir;
    }
    auto g = [&](double t) {
        const Vec3d p = ray.origin + t * ray.dir;
        return p.z - background_height(spec, p.x, p.y);
    };
    // z_func stays within 2.5 +/- 0.1; once the ray z passes 2.7 there is no root.
    const double t_max = (2.7 - ray.origin.z) / ray.dir.z;
    const auto root = first_root_along(g, 1e-9, 0.01, t_max);
    if (!root) throw GeometryError("background_point: ray does not reach the background");
    return ray.origin + *root * ray.dir;
}

void SceneSpec::validate() const {
    if (rows <= 0 || cols <= 0) throw InvalidInputError("scene grid must be positive");
    if (camera.width != cols || camera.height != rows)
        throw InvalidInputError("scene grid dimensions must match the camera");
    // The background must lie behind the surface over the imaged domain.
    for (int r = 0; r <= 16; ++r) {
        for (int c = 0; c <= 16; ++c) {
            const Pixel px{cols * (c / 16.0), rows * (r / 16.0)};
            const Ray ray = unproject(camera, px);
            // Nominal lateral position near the surface mean depth.
            const double scale = camera.mode == ProjectionMode::perspective ? 2.0 / ray.dir.z : 1.0;
            const double x = ray.origin.x + scale * ray.dir.x;
            const double y = ray.origin.y + scale * ray.dir.y;
            if (!(surface_height(surface, x, y) < background_height(background, x, y)))
                throw InvalidInputError("scene: background does not lie behind the surface");
        }
    }
}

namespace {

double parse_number(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw InvalidInputError("scene config: bad numeric value for key '" + key + "'");
    }
    if (pos != value.size())
        throw InvalidInputError("scene config: bad numeric value for key '" + key + "'");
    return v;
}

}  // namespace

SceneSpec parse_scene_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key, value, extra;
        if (!(ls >> key)) continue;
        ls >> value;
        if (value == "=") ls >> value;
        if (value.empty()) throw InvalidInputError("scene config: key '" + key + "' has no value");
        if (ls >> extra) throw InvalidInputError("scene config: trailing tokens after key '" + key + "'");
        if (kv.count(key)) throw InvalidInputError("scene config: duplicate key '" + key + "'");
        kv[key] = value;
    }

    static const char* known[] = {"surface.kind", "surface.t",  "surface.c",   "background.kind",
                                  "background.z0", "media.mu",  "camera.mode", "camera.fx",
                                  "camera.fy",     "camera.cx", "camera.cy",   "camera.pitch",
                                  "grid.rows",     "grid.cols"};
    for (const auto& [key, value] : kv) {
        (void)value;
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return key == k; }) == std::end(known))
            throw InvalidInputError("scene config: unknown key '" + key + "'");
    }

    auto get = [&](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };

    SceneSpec scene;
    scene.rows = 64;
    scene.cols = 64;
    if (const auto* v = get("grid.rows")) scene.rows = static_cast<int>(parse_number("grid.rows", *v));
    if (const auto* v = get("grid.cols")) scene.cols = static_cast<int>(parse_number("grid.cols", *v));

    const std::string kind = get("surface.kind") ? *get("surface.kind") : "wave1";
    const int t = get("surface.t") ? static_cast<int>(parse_number("surface.t", *get("surface.t"))) : 0;
    if (kind == "wave1") {
        scene.surface = SurfaceSpec::wave1(t);
    } else if (kind == "wave2") {
        scene.surface = SurfaceSpec::wave2(t);
    } else if (kind == "flat_plane") {
        scene.surface = SurfaceSpec::flat_plane(
            get("surface.c") ? parse_number("surface.c", *get("surface.c")) : 2.0);
    } else {
        throw InvalidInputError("scene config: unknown surface.kind '" + kind + "'");
    }

    if (const auto* v = get("background.kind")) {
        if (*v == "flat") {
            scene.background.kind = BackgroundKind::flat;
        } else if (*v == "func") {
            scene.background.kind = BackgroundKind::func;
        } else {
            throw InvalidInputError("scene config: unknown background.kind '" + *v + "'");
        }
    }
    if (const auto* v = get("background.z0")) scene.background.z0 = parse_number("background.z0", *v);

    if (const auto* v = get("media.mu")) scene.media = MediumPair(parse_number("media.mu", *v));

    ProjectionMode mode = ProjectionMode::perspective;
    if (const auto* v = get("camera.mode")) {
        if (*v == "perspective") {
            mode = ProjectionMode::perspective;
        } else if (*v == "orthographic") {
            mode = ProjectionMode::orthographic;
        } else {
            throw InvalidInputError("scene config: unknown camera.mode '" + *v + "'");
        }
    }
    scene.camera = CameraModel::default_for_grid(mode, scene.rows, scene.cols);
    if (mode == ProjectionMode::perspective) {
        if (const auto* v = get("camera.fx")) scene.camera.fx = parse_number("camera.fx", *v);
        if (const auto* v = get("camera.fy")) scene.camera.fy = parse_number("camera.fy", *v);
    } else if (const auto* v = get("camera.pitch")) {
        scene.camera.pitch = parse_number("camera.pitch", *v);
    }
    if (const auto* v = get("camera.cx")) scene.camera.cx = parse_number("camera.cx", *v);
    if (const auto* v = get("camera.cy")) scene.camera.cy = parse_number("camera.cy", *v);

    scene.validate();
    return scene;
}

SceneSpec load_scene_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scene config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scene_config(ss.str());
}

}  // namespace refract

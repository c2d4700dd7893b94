#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "refract/maps.hpp"

namespace refract {

enum class InitScheme { independent_flat, sequential, fixed };

struct SolverOptions {
    int max_iterations{500};
    double energy_tolerance{1e-9};     // absolute |dE| between accepted iterates
    double gradient_tolerance{1e-7};   // infinity norm
    int lbfgs_memory{10};
    double tir_penalty{10.0};          // per offending pixel
    InitScheme init_scheme{InitScheme::independent_flat};
    double fixed_init_depth{2.0};      // z-depth used by InitScheme::fixed
};

struct IterationRecord {
    int iteration{0};
    double energy{0.0};
    double grad_inf_norm{0.0};
    double step_length{0.0};
};

struct ReconstructionResult {
    DepthMap depth;
    NormalField normals;
    double final_energy{0.0};
    double initial_energy{0.0};
    int iterations{0};
    bool converged{false};
    std::vector<IterationRecord> history;
};

// Central differences over the point cloud, one-sided at boundaries and next
// to invalid pixels; pixels without both tangents are marked invalid.
NormalField estimate_normals(const DepthMap& depth, const CameraModel& camera);

// Orthogonal distance from X_B to the line through X_R with unit direction s.
double light_path_residual(const Vec3d& x_r, const Vec3d& s, const Vec3d& x_b);

// The light-path energy over the valid pixel set and its exact gradient.
// Depth variables are packed over valid pixels in row-major order.
class EnergyModel {
public:
    EnergyModel(const CorrespondenceMap& corr, const SolverOptions& opts);

    int num_vars() const { return num_vars_; }
    int var_index(int r, int c) const { return var_index_[corr_.index(r, c)]; }
    const CorrespondenceMap& correspondences() const { return corr_; }

    double energy(const std::vector<double>& d) const;
    // Barrier term alone: sum over valid pixels of max(0, z_i - z_i^B).
    double barrier_sum(const std::vector<double>& d) const;
    double energy_and_gradient(const std::vector<double>& d, std::vector<double>& grad) const;

    // Depth vector of the fronto-parallel plane z = c.
    std::vector<double> flat_depths(double c) const;
    // Depth vector with constant z-depth d0 along every line of sight.
    std::vector<double> fixed_z_depths(double d0) const;

    std::vector<double> pack(const DepthMap& depth) const;
    DepthMap unpack(const std::vector<double>& d) const;

    double min_background_z() const { return min_background_z_; }

private:
    template <typename T, typename DepthAt>
    T pixel_energy(int r, int c, const DepthAt& depth_at) const;

    CorrespondenceMap corr_;
    SolverOptions opts_;
    std::vector<Ray> rays_;        // per grid cell, pixel-center lines of sight
    std::vector<int> var_index_;   // -1 on invalid pixels
    std::vector<std::size_t> cells_;  // grid indices of the valid pixels, row-major
    int num_vars_{0};
    double min_background_z_{0.0};
};

struct FlatInitResult {
    double c{0.0};
    double energy{0.0};
    bool degenerate{false};  // energy is flat in c (e.g. mu = 1, orthographic)
};

// 1-D search for the fronto-parallel plane depth minimizing the energy:
// coarse scan over c in (0.1, min z^B), then golden-section refinement.
FlatInitResult init_flat(const CorrespondenceMap& corr, const SolverOptions& opts);

using ObjectiveFn =
    std::function<double(const std::vector<double>& x, std::vector<double>& grad)>;

struct LbfgsResult {
    std::vector<double> x;
    double f{0.0};
    int iterations{0};
    bool converged{false};
    std::vector<IterationRecord> history;
};

// Limited-memory BFGS with a strong-Wolfe line search (c1 = 1e-4, c2 = 0.9).
// When enforce_positive is set, steps that would drive any component to or
// below zero are rejected by the line search.
LbfgsResult lbfgs_minimize(const ObjectiveFn& f, const std::vector<double>& x0,
                           const SolverOptions& opts, bool enforce_positive = false);

ReconstructionResult reconstruct(const CorrespondenceMap& corr, const SolverOptions& opts,
                                 const std::optional<DepthMap>& prev = std::nullopt);

// Minimal two-pixel configuration used to visualize the energy landscape.
struct TwoPointSetup {
    CameraModel camera;
    Pixel p1, p2;
    MediumPair media{1.0 / 1.33};
    double background_z{3.0};
    double gt_d1{2.5}, gt_d2{2.5};
    Vec3d xb1, xb2;  // traced background points for the ground-truth depths
};

TwoPointSetup make_two_point_setup(double gt_d1, double gt_d2, double background_z = 3.0,
                                   double mu = 1.0 / 1.33);

struct GridRange {
    double lo{1.0};
    double hi{2.9};
    int n{101};

    double at(int i) const { return n > 1 ? lo + (hi - lo) * i / (n - 1) : lo; }
};

struct EnergyGrid {
    GridRange d1, d2;
    std::vector<double> log10_energy;  // row-major, index = i2 * d1.n + i1
    int argmin_i1{0}, argmin_i2{0};
    double min_energy{0.0};

    double value(int i1, int i2) const { return log10_energy[static_cast<std::size_t>(i2) * d1.n + i1]; }
};

EnergyGrid energy_grid_2pt(const TwoPointSetup& setup, const GridRange& d1_range,
                           const GridRange& d2_range);

}  // namespace refract

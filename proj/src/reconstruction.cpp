#include "refract/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "refract/dual.hpp"

namespace refract {

namespace {

constexpr double kDegenerateCross2 = 1e-28;  // squared-norm threshold

// Central-difference tangents over the point cloud with one-sided fallback.
// point_at(r, c, out) returns false for invalid or out-of-grid cells.
template <typename T, typename PointAt>
bool stencil_normal(const PointAt& point_at, int r, int c, Vec3<T>& n_out) {
    Vec3<T> center, a, b, tu, tv;
    if (!point_at(r, c, center)) return false;

    const bool right = point_at(r, c + 1, a);
    const bool left = point_at(r, c - 1, b);
    if (right && left) {
        tu = a - b;
    } else if (right) {
        tu = a - center;
    } else if (left) {
        tu = center - b;
    } else {
        return false;
    }

    const bool down = point_at(r + 1, c, a);
    const bool up = point_at(r - 1, c, b);
    if (down && up) {
        tv = a - b;
    } else if (down) {
        tv = a - center;
    } else if (up) {
        tv = center - b;
    } else {
        return false;
    }

    Vec3<T> n = cross(tu, tv);
    if (value_of(squared_norm(n)) < kDegenerateCross2) return false;
    n = normalized(n);
    if (value_of(n.z) > 0.0) n = -n;
    n_out = n;
    return true;
}

double grad_inf_norm(const std::vector<double>& g) {
    double m = 0.0;
    for (double v : g) m = std::max(m, std::abs(v));
    return m;
}

double vec_dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

NormalField estimate_normals(const DepthMap& depth, const CameraModel& camera) {
    NormalField field(depth.rows, depth.cols);
    auto point_at = [&](int r, int c, Vec3d& out) {
        if (r < 0 || r >= depth.rows || c < 0 || c >= depth.cols) return false;
        const std::size_t i = depth.index(r, c);
        if (!depth.valid[i]) return false;
        const Ray ray = unproject(camera, Pixel{c + 0.5, r + 0.5});
        out = ray.origin + depth.d[i] * ray.dir;
        return true;
    };
    for (int r = 0; r < depth.rows; ++r) {
        for (int c = 0; c < depth.cols; ++c) {
            const std::size_t i = depth.index(r, c);
            if (!depth.valid[i]) continue;
            Vec3d n;
            if (stencil_normal(point_at, r, c, n)) {
                field.n[i] = n;
                field.valid[i] = 1;
            }
        }
    }
    return field;
}

double light_path_residual(const Vec3d& x_r, const Vec3d& s, const Vec3d& x_b) {
    const Vec3d delta = x_b - x_r;
    return norm(delta - dot(s, delta) * s);
}

EnergyModel::EnergyModel(const CorrespondenceMap& corr, const SolverOptions& opts)
    : corr_(corr), opts_(opts) {
    const std::size_t total = static_cast<std::size_t>(corr_.rows) * corr_.cols;
    rays_.resize(total);
    var_index_.assign(total, -1);
    min_background_z_ = std::numeric_limits<double>::infinity();
    for (int r = 0; r < corr_.rows; ++r) {
        for (int c = 0; c < corr_.cols; ++c) {
            const std::size_t i = corr_.index(r, c);
            rays_[i] = unproject(corr_.camera, corr_.pixel_center(r, c));
            if (corr_.valid[i]) {
                var_index_[i] = num_vars_++;
                cells_.push_back(i);
                min_background_z_ = std::min(min_background_z_, corr_.xb[i].z);
            }
        }
    }
}

template <typename T, typename DepthAt>
T EnergyModel::pixel_energy(int r, int c, const DepthAt& depth_at) const {
    auto point_at = [&](int rr, int cc, Vec3<T>& out) {
        if (rr < 0 || rr >= corr_.rows || cc < 0 || cc >= corr_.cols) return false;
        const std::size_t i = corr_.index(rr, cc);
        if (var_index_[i] < 0) return false;
        const Ray& ray = rays_[i];
        const T d = depth_at(rr, cc);
        out = Vec3<T>{T(ray.origin.x) + d * T(ray.dir.x),
                      T(ray.origin.y) + d * T(ray.dir.y),
                      T(ray.origin.z) + d * T(ray.dir.z)};
        return true;
    };

    const std::size_t i = corr_.index(r, c);
    const Ray& ray = rays_[i];
    const Vec3d& xb = corr_.xb[i];
    Vec3<T> center;
    point_at(r, c, center);

    // Barrier keeping the surface in front of the background.
    T contribution(0.0);
    if (value_of(center.z) > xb.z) contribution = center.z - T(xb.z);

    Vec3<T> n;
    if (!stencil_normal(point_at, r, c, n))
        return contribution + T(opts_.tir_penalty);

    const Vec3<T> toward_camera{T(-ray.dir.x), T(-ray.dir.y), T(-ray.dir.z)};
    const auto s = try_refract(toward_camera, n, corr_.media.mu);
    if (!s) return contribution + T(opts_.tir_penalty);

    const Vec3<T> delta{T(xb.x) - center.x, T(xb.y) - center.y, T(xb.z) - center.z};
    const T proj = dot(*s, delta);
    return contribution + norm(delta - *s * proj);
}

double EnergyModel::energy(const std::vector<double>& d) const {
    if (static_cast<int>(d.size()) != num_vars_)
        throw InvalidInputError("energy: depth vector size does not match the valid pixel count");
    for (double v : d)
        if (!std::isfinite(v)) throw InvalidInputError("energy: non-finite depth value");
    auto depth_at = [&](int rr, int cc) { return d[var_index_[corr_.index(rr, cc)]]; };
    double e = 0.0;
    for (const std::size_t cell : cells_) {
        const int r = static_cast<int>(cell) / corr_.cols;
        const int c = static_cast<int>(cell) % corr_.cols;
        e += pixel_energy<double>(r, c, depth_at);
    }
    return e;
}

double EnergyModel::barrier_sum(const std::vector<double>& d) const {
    if (static_cast<int>(d.size()) != num_vars_)
        throw InvalidInputError("barrier_sum: depth vector size does not match the valid pixel count");
    double sum = 0.0;
    for (const std::size_t cell : cells_) {
        const Ray& ray = rays_[cell];
        const double z = ray.origin.z + d[var_index_[cell]] * ray.dir.z;
        if (z > corr_.xb[cell].z) sum += z - corr_.xb[cell].z;
    }
    return sum;
}

double EnergyModel::energy_and_gradient(const std::vector<double>& d,
                                        std::vector<double>& grad) const {
    if (static_cast<int>(d.size()) != num_vars_)
        throw InvalidInputError("energy: depth vector size does not match the valid pixel count");
    for (double v : d)
        if (!std::isfinite(v)) throw InvalidInputError("energy: non-finite depth value");
    grad.assign(num_vars_, 0.0);

    using D5 = Dual<5>;
    double e = 0.0;
    for (const std::size_t cell : cells_) {
        const int r = static_cast<int>(cell) / corr_.cols;
        const int c = static_cast<int>(cell) % corr_.cols;
        // Stencil slots: center, left, right, up, down.
        const int offs[5][2] = {{0, 0}, {0, -1}, {0, 1}, {-1, 0}, {1, 0}};
        auto slot_of = [&](int rr, int cc) {
            for (int k = 0; k < 5; ++k)
                if (rr == r + offs[k][0] && cc == c + offs[k][1]) return k;
            return -1;
        };
        auto depth_at = [&](int rr, int cc) {
            return D5::seeded(d[var_index_[corr_.index(rr, cc)]], slot_of(rr, cc));
        };
        const D5 val = pixel_energy<D5>(r, c, depth_at);
        e += val.v;
        for (int k = 0; k < 5; ++k) {
            const int rr = r + offs[k][0];
            const int cc = c + offs[k][1];
            if (rr < 0 || rr >= corr_.rows || cc < 0 || cc >= corr_.cols) continue;
            const int vi = var_index_[corr_.index(rr, cc)];
            if (vi >= 0) grad[vi] += val.d[k];
        }
    }
    return e;
}

std::vector<double> EnergyModel::flat_depths(double c) const {
    std::vector<double> d(num_vars_);
    for (const std::size_t cell : cells_) {
        const Ray& ray = rays_[cell];
        d[var_index_[cell]] = (c - ray.origin.z) / ray.dir.z;
    }
    return d;
}

std::vector<double> EnergyModel::fixed_z_depths(double d0) const {
    // The fixed scheme pins the z-depth, not the ray length.
    return flat_depths(d0);
}

std::vector<double> EnergyModel::pack(const DepthMap& depth) const {
    if (depth.rows != corr_.rows || depth.cols != corr_.cols)
        throw InvalidInputError("pack: depth map grid does not match the correspondences");
    std::vector<double> d(num_vars_);
    for (const std::size_t cell : cells_) {
        if (!depth.valid[cell])
            throw InvalidInputError("pack: depth map is invalid at a pixel required by the correspondences");
        d[var_index_[cell]] = depth.d[cell];
    }
    return d;
}

DepthMap EnergyModel::unpack(const std::vector<double>& d) const {
    DepthMap depth(corr_.rows, corr_.cols, corr_.camera);
    for (const std::size_t cell : cells_) {
        depth.d[cell] = d[var_index_[cell]];
        depth.valid[cell] = 1;
    }
    return depth;
}

FlatInitResult init_flat(const CorrespondenceMap& corr, const SolverOptions& opts) {
    EnergyModel model(corr, opts);
    if (model.num_vars() == 0) throw InvalidInputError("init_flat: no valid pixels");

    const double c_lo = 0.1 + 1e-6;
    const double c_hi = model.min_background_z() - 1e-6;
    if (!(c_hi > c_lo)) throw InvalidInputError("init_flat: empty search interval");

    auto energy_at = [&](double c) { return model.energy(model.flat_depths(c)); };

    constexpr int kScan = 256;
    double best_c = c_lo, best_e = energy_at(c_lo);
    double min_e = best_e, max_e = best_e;
    for (int i = 1; i < kScan; ++i) {
        const double c = c_lo + (c_hi - c_lo) * i / (kScan - 1);
        const double e = energy_at(c);
        min_e = std::min(min_e, e);
        max_e = std::max(max_e, e);
        if (e < best_e) {
            best_e = e;
            best_c = c;
        }
    }
    if (max_e - min_e < 1e-12)
        return {c_lo, best_e, true};  // energy carries no depth information

    const double step = (c_hi - c_lo) / (kScan - 1);
    double a = std::max(c_lo, best_c - step);
    double b = std::min(c_hi, best_c + step);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = energy_at(x1), f2 = energy_at(x2);
    while (b - a > 1e-6) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = energy_at(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = energy_at(x2);
        }
    }
    const double c_star = 0.5 * (a + b);
    return {c_star, energy_at(c_star), false};
}

namespace {

struct LineSearchPoint {
    double alpha{0.0};
    double f{std::numeric_limits<double>::infinity()};
    double dphi{0.0};
    std::vector<double> x;
    std::vector<double> g;
};

struct LineSearchOutcome {
    bool ok{false};
    LineSearchPoint point;
    int evals{0};
};

constexpr double kWolfeC1 = 1e-4;
constexpr double kWolfeC2 = 0.9;

// Strong-Wolfe line search (bracket + zoom). Infeasible or non-finite trial
// points behave like a sufficient-decrease failure and shrink the step.
LineSearchOutcome strong_wolfe(const ObjectiveFn& f, const std::vector<double>& x0,
                               double f0, double dphi0, const std::vector<double>& p,
                               const std::function<bool(const std::vector<double>&)>& feasible,
                               double alpha_init) {
    LineSearchOutcome out;
    const std::size_t n = x0.size();

    auto eval = [&](double alpha) {
        LineSearchPoint pt;
        pt.alpha = alpha;
        pt.x.resize(n);
        for (std::size_t i = 0; i < n; ++i) pt.x[i] = x0[i] + alpha * p[i];
        ++out.evals;
        if (!feasible(pt.x)) return pt;  // f stays +inf
        pt.g.resize(n);
        pt.f = f(pt.x, pt.g);
        if (!std::isfinite(pt.f)) {
            pt.f = std::numeric_limits<double>::infinity();
            return pt;
        }
        pt.dphi = vec_dot(pt.g, p);
        return pt;
    };

    auto wolfe_ok = [&](const LineSearchPoint& pt) {
        return pt.f <= f0 + kWolfeC1 * pt.alpha * dphi0 && std::abs(pt.dphi) <= -kWolfeC2 * dphi0;
    };

    auto zoom = [&](LineSearchPoint lo, LineSearchPoint hi) -> LineSearchOutcome {
        for (int j = 0; j < 50; ++j) {
            const double width = hi.alpha - lo.alpha;
            if (std::abs(width) < 1e-16 * (1.0 + std::abs(lo.alpha))) break;
            // Quadratic interpolation from the lo endpoint, safeguarded.
            double alpha = lo.alpha + 0.5 * width;
            if (std::isfinite(hi.f)) {
                const double denom = hi.f - lo.f - lo.dphi * width;
                if (denom > 0.0) {
                    const double q = lo.alpha - 0.5 * lo.dphi * width * width / denom;
                    const double lo_guard = lo.alpha + 0.1 * width;
                    const double hi_guard = lo.alpha + 0.9 * width;
                    const double lim_min = std::min(lo_guard, hi_guard);
                    const double lim_max = std::max(lo_guard, hi_guard);
                    if (q > lim_min && q < lim_max) alpha = q;
                }
            }
            LineSearchPoint trial = eval(alpha);
            if (trial.f > f0 + kWolfeC1 * alpha * dphi0 || trial.f >= lo.f) {
                hi = std::move(trial);
            } else {
                if (std::abs(trial.dphi) <= -kWolfeC2 * dphi0) {
                    return {true, std::move(trial), out.evals};
                }
                if (trial.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = std::move(trial);
            }
        }
        // Interval collapsed: accept any strict decrease to keep progress.
        if (std::isfinite(lo.f) && lo.f < f0 && lo.alpha > 0.0)
            return {true, std::move(lo), out.evals};
        return {false, {}, out.evals};
    };

    LineSearchPoint prev;
    prev.alpha = 0.0;
    prev.f = f0;
    prev.dphi = dphi0;
    double alpha = alpha_init;
    for (int i = 0; i < 30; ++i) {
        LineSearchPoint pt = eval(alpha);
        if (pt.f > f0 + kWolfeC1 * alpha * dphi0 || (i > 0 && pt.f >= prev.f)) {
            auto r = zoom(std::move(prev), std::move(pt));
            r.evals = out.evals;
            return r;
        }
        if (std::abs(pt.dphi) <= -kWolfeC2 * dphi0) {
            return {true, std::move(pt), out.evals};
        }
        if (pt.dphi >= 0.0) {
            auto r = zoom(std::move(pt), std::move(prev));
            r.evals = out.evals;
            return r;
        }
        prev = std::move(pt);
        alpha *= 2.0;
        if (alpha > 1e12) break;
    }
    if (std::isfinite(prev.f) && prev.f < f0 && wolfe_ok(prev))
        return {true, std::move(prev), out.evals};
    return {false, {}, out.evals};
}

}  // namespace

LbfgsResult lbfgsMinimizeImpl(const ObjectiveFn& f, const std::vector<double>& x0,
                              const SolverOptions& opts, bool enforce_positive) {
    const std::size_t n = x0.size();
    auto feasible = [enforce_positive](const std::vector<double>& x) {
        if (!enforce_positive) return true;
        for (double v : x)
            if (!(v > 0.0)) return false;
        return true;
    };
    if (!feasible(x0))
        throw InvalidInputError("lbfgs_minimize: x0 violates the positivity constraint");

    LbfgsResult res;
    res.x = x0;
    std::vector<double> g(n);
    res.f = f(res.x, g);
    if (!std::isfinite(res.f))
        throw InvalidInputError("lbfgs_minimize: objective is not finite at x0");
    res.history.push_back({0, res.f, grad_inf_norm(g), 0.0});

    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;

    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        if (grad_inf_norm(g) < opts.gradient_tolerance) {
            res.converged = true;
            break;
        }

        // Two-loop recursion.
        std::vector<double> q = g;
        std::vector<double> alpha_coef(s_hist.size());
        for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
            alpha_coef[k] = rho_hist[k] * vec_dot(s_hist[k], q);
            for (std::size_t i = 0; i < n; ++i) q[i] -= alpha_coef[k] * y_hist[k][i];
        }
        if (!s_hist.empty()) {
            const double gamma =
                vec_dot(s_hist.back(), y_hist.back()) / vec_dot(y_hist.back(), y_hist.back());
            for (double& v : q) v *= gamma;
        }
        for (std::size_t k = 0; k < s_hist.size(); ++k) {
            const double beta = rho_hist[k] * vec_dot(y_hist[k], q);
            for (std::size_t i = 0; i < n; ++i) q[i] += (alpha_coef[k] - beta) * s_hist[k][i];
        }
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = -q[i];

        double dphi0 = vec_dot(g, p);
        if (!(dphi0 < 0.0)) {  // not a descent direction, fall back to steepest descent
            for (std::size_t i = 0; i < n; ++i) p[i] = -g[i];
            dphi0 = -vec_dot(g, g);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        const double alpha_init =
            s_hist.empty() ? std::min(1.0, 1.0 / std::max(grad_inf_norm(g), 1e-12)) : 1.0;
        const auto ls = strong_wolfe(f, res.x, res.f, dphi0, p, feasible, alpha_init);
        if (!ls.ok) {
            res.iterations = iter - 1;
            return res;  // best-so-far, converged = false
        }

        std::vector<double> s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = ls.point.x[i] - res.x[i];
            y[i] = ls.point.g[i] - g[i];
        }
        const double sy = vec_dot(s, y);
        if (sy > 1e-12 * std::sqrt(vec_dot(s, s) * vec_dot(y, y))) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opts.lbfgs_memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        const double delta_e = res.f - ls.point.f;
        res.x = ls.point.x;
        res.f = ls.point.f;
        g = ls.point.g;
        res.iterations = iter;
        res.history.push_back({iter, res.f, grad_inf_norm(g), ls.point.alpha});

        if (std::abs(delta_e) < opts.energy_tolerance) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged && res.iterations < opts.max_iterations &&
        grad_inf_norm(g) < opts.gradient_tolerance)
        res.converged = true;
    return res;
}

LbfgsResult lbfgs_minimize(const ObjectiveFn& f, const std::vector<double>& x0,
                           const SolverOptions& opts, bool enforce_positive) {
    return lbfgsMinimizeImpl(f, x0, opts, enforce_positive);
}

ReconstructionResult reconstruct(const CorrespondenceMap& corr, const SolverOptions& opts,
                                 const std::optional<DepthMap>& prev) {
    EnergyModel model(corr, opts);
    if (model.num_vars() == 0) throw InvalidInputError("reconstruct: no valid pixels");

    std::vector<double> x0;
    switch (opts.init_scheme) {
        case InitScheme::independent_flat:
            x0 = model.flat_depths(init_flat(corr, opts).c);
            break;
        case InitScheme::sequential:
            if (prev) {
                x0 = model.pack(*prev);
            } else {
                x0 = model.flat_depths(init_flat(corr, opts).c);
            }
            break;
        case InitScheme::fixed:
            x0 = model.fixed_z_depths(opts.fixed_init_depth);
            break;
    }

    auto objective = [&model](const std::vector<double>& x, std::vector<double>& grad) {
        return model.energy_and_gradient(x, grad);
    };
    const LbfgsResult lr = lbfgs_minimize(objective, x0, opts, /*enforce_positive=*/true);

    ReconstructionResult result;
    result.depth = model.unpack(lr.x);
    result.normals = estimate_normals(result.depth, corr.camera);
    result.final_energy = lr.f;
    result.initial_energy = lr.history.front().energy;
    result.iterations = lr.iterations;
    result.converged = lr.converged;
    result.history = lr.history;
    return result;
}

namespace {

// With only two points a cross product is unavailable; the normal lies in
// the plane spanned by the pair difference and the camera x-axis.
Vec3d two_point_normal(const Vec3d& x1, const Vec3d& x2) {
    const Vec3d t = x2 - x1;
    Vec3d n = normalized(Vec3d{-t.z, 0.0, t.x});
    if (n.z > 0.0) n = -n;
    return n;
}

}  // namespace

TwoPointSetup make_two_point_setup(double gt_d1, double gt_d2, double background_z, double mu) {
    TwoPointSetup setup;
    setup.camera = CameraModel::default_for_grid(ProjectionMode::perspective, 64, 64);
    setup.p1 = Pixel{31.5, 31.5};
    setup.p2 = Pixel{32.5, 31.5};
    setup.media = MediumPair(mu);
    setup.background_z = background_z;
    setup.gt_d1 = gt_d1;
    setup.gt_d2 = gt_d2;

    const Ray l1 = unproject(setup.camera, setup.p1);
    const Ray l2 = unproject(setup.camera, setup.p2);
    const Vec3d x1 = point_on_ray(l1, gt_d1);
    const Vec3d x2 = point_on_ray(l2, gt_d2);
    const Vec3d n = two_point_normal(x1, x2);
    const Vec3d s1 = snell_refract(-l1.dir, n, setup.media);
    const Vec3d s2 = snell_refract(-l2.dir, n, setup.media);
    setup.xb1 = x1 + (background_z - x1.z) / s1.z * s1;
    setup.xb2 = x2 + (background_z - x2.z) / s2.z * s2;
    return setup;
}

EnergyGrid energy_grid_2pt(const TwoPointSetup& setup, const GridRange& d1_range,
                           const GridRange& d2_range) {
    if (d1_range.n <= 0 || d2_range.n <= 0)
        throw InvalidInputError("energy_grid_2pt: empty grid range");

    const Ray l1 = unproject(setup.camera, setup.p1);
    const Ray l2 = unproject(setup.camera, setup.p2);
    constexpr double kTirPenalty = 10.0;

    EnergyGrid grid;
    grid.d1 = d1_range;
    grid.d2 = d2_range;
    grid.log10_energy.resize(static_cast<std::size_t>(d1_range.n) * d2_range.n);
    grid.min_energy = std::numeric_limits<double>::infinity();

    for (int i2 = 0; i2 < d2_range.n; ++i2) {
        for (int i1 = 0; i1 < d1_range.n; ++i1) {
            const double d1 = d1_range.at(i1);
            const double d2 = d2_range.at(i2);
            const Vec3d x1 = point_on_ray(l1, d1);
            const Vec3d x2 = point_on_ray(l2, d2);
            const Vec3d n = two_point_normal(x1, x2);
            double e = std::max(0.0, x1.z - setup.xb1.z) + std::max(0.0, x2.z - setup.xb2.z);
            const auto s1 = try_refract(-l1.dir, n, setup.media.mu);
            const auto s2 = try_refract(-l2.dir, n, setup.media.mu);
            e += s1 ? light_path_residual(x1, *s1, setup.xb1) : kTirPenalty;
            e += s2 ? light_path_residual(x2, *s2, setup.xb2) : kTirPenalty;

            grid.log10_energy[static_cast<std::size_t>(i2) * d1_range.n + i1] =
                std::log10(std::max(e, 1e-300));
            if (e < grid.min_energy) {
                grid.min_energy = e;
                grid.argmin_i1 = i1;
                grid.argmin_i2 = i2;
            }
        }
    }
    return grid;
}

}  // namespace refract

#pragma once

#include <cmath>
#include <optional>

#include "refract/errors.hpp"
#include "refract/vec3.hpp"

namespace refract {

// Ratio of the indices of refraction across the interface, mu = n1 / n2,
// where medium 1 holds the camera.
struct MediumPair {
    double mu{1.0};

    explicit MediumPair(double mu_) : mu(mu_) {
        if (!(mu_ > 0.0) || !std::isfinite(mu_))
            throw InvalidInputError("MediumPair: mu must be positive and finite");
    }
};

// Vector-form Snell refraction, templated so it also runs on dual numbers.
//
// Convention: L is unit and points from the surface point back toward the
// camera, n is unit and points toward the camera's side of the interface
// (so alpha = L.n > 0). The returned direction points away from the camera
// into the second medium. Returns nullopt on total internal reflection
// (1 - mu^2 (1 - alpha^2) < 0); alpha <= 0 is an orientation violation and
// also yields nullopt here (the throwing wrapper distinguishes the two).
template <typename T>
std::optional<Vec3<T>> try_refract(const Vec3<T>& L, const Vec3<T>& n, double mu) {
    const T alpha = dot(L, n);
    if (!(alpha > T(0.0))) return std::nullopt;
    const T disc = T(1.0) - T(mu * mu) * (T(1.0) - alpha * alpha);
    if (disc < T(0.0)) return std::nullopt;
    using std::sqrt;  // ADL picks the Dual overload for dual-number T
    const Vec3<T> s = -(T(mu) * L) + n * (T(mu) * alpha - sqrt(disc));
    // Analytically unit-length for unit inputs; renormalize to absorb drift.
    return normalized(s);
}

// Throwing wrapper used at API boundaries; validates unit-length inputs.
Vec3d snell_refract(const Vec3d& L, const Vec3d& n, const MediumPair& media);

// Scalar-law test oracle: theta2 = arcsin(mu sin theta1).
double refraction_angle_oracle(double theta1, const MediumPair& media);

}  // namespace refract

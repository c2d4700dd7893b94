#include "refract/snell.hpp"

#include <cmath>

namespace refract {

Vec3d snell_refract(const Vec3d& L, const Vec3d& n, const MediumPair& media) {
    if (std::abs(norm(L) - 1.0) > 1e-9 || std::abs(norm(n) - 1.0) > 1e-9)
        throw InvalidInputError("snell_refract: L and n must be unit vectors");
    const double alpha = dot(L, n);
    if (!(alpha > 0.0))
        throw OrientationError("snell_refract: L must point toward the camera side of n (L.n > 0)");
    const double disc = 1.0 - media.mu * media.mu * (1.0 - alpha * alpha);
    if (disc < 0.0)
        throw TotalInternalReflectionError("snell_refract: total internal reflection");
    return *try_refract(L, n, media.mu);
}

double refraction_angle_oracle(double theta1, const MediumPair& media) {
    if (!(theta1 >= 0.0) || !(theta1 < M_PI / 2.0))
        throw InvalidInputError("refraction_angle_oracle: theta1 must lie in [0, pi/2)");
    const double s = media.mu * std::sin(theta1);
    if (s > 1.0)
        throw TotalInternalReflectionError("refraction_angle_oracle: mu sin(theta1) > 1");
    return std::asin(s);
}

}  // namespace refract

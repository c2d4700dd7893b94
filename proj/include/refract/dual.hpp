#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace refract {

// Forward-mode dual number carrying up to N partial derivatives.
// The energy of one pixel depends on at most five depth values (its own
// plus the 4-neighborhood through the normal stencil), so N = 5 suffices
// to differentiate the whole energy exactly, pixel by pixel.
template <std::size_t N>
struct Dual {
    double v{};
    std::array<double, N> d{};

    Dual() = default;
    Dual(double value) : v(value) {}  // NOLINT: implicit by design

    static Dual seeded(double value, std::size_t slot) {
        Dual r(value);
        r.d[slot] = 1.0;
        return r;
    }

    Dual operator-() const {
        Dual r(-v);
        for (std::size_t i = 0; i < N; ++i) r.d[i] = -d[i];
        return r;
    }
    Dual operator+(const Dual& o) const {
        Dual r(v + o.v);
        for (std::size_t i = 0; i < N; ++i) r.d[i] = d[i] + o.d[i];
        return r;
    }
    Dual operator-(const Dual& o) const {
        Dual r(v - o.v);
        for (std::size_t i = 0; i < N; ++i) r.d[i] = d[i] - o.d[i];
        return r;
    }
    Dual operator*(const Dual& o) const {
        Dual r(v * o.v);
        for (std::size_t i = 0; i < N; ++i) r.d[i] = d[i] * o.v + v * o.d[i];
        return r;
    }
    Dual operator/(const Dual& o) const {
        Dual r(v / o.v);
        const double inv2 = 1.0 / (o.v * o.v);
        for (std::size_t i = 0; i < N; ++i) r.d[i] = (d[i] * o.v - v * o.d[i]) * inv2;
        return r;
    }

    bool operator<(const Dual& o) const { return v < o.v; }
    bool operator>(const Dual& o) const { return v > o.v; }
    bool operator<=(const Dual& o) const { return v <= o.v; }
    bool operator>=(const Dual& o) const { return v >= o.v; }
};

template <std::size_t N>
Dual<N> sqrt(const Dual<N>& a) {
    Dual<N> r(std::sqrt(a.v));
    // Guard the derivative at the origin; the value sqrt(0) = 0 is fine but
    // the slope is unbounded there (residual norms can touch zero exactly).
    if (a.v > 0.0) {
        const double s = 0.5 / r.v;
        for (std::size_t i = 0; i < N; ++i) r.d[i] = s * a.d[i];
    }
    return r;
}

template <std::size_t N>
double value_of(const Dual<N>& a) {
    return a.v;
}

inline double value_of(double a) { return a; }

}  // namespace refract

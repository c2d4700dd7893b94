#pragma once

#include <cmath>

namespace refract {

// Minimal 3-vector, templated on the scalar so the same geometry code runs
// on plain doubles and on forward-mode dual numbers (see dual.hpp).
template <typename T>
struct Vec3 {
    T x{};
    T y{};
    T z{};

    Vec3() = default;
    Vec3(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(const T& s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(const T& s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) {
        x = x + o.x;
        y = y + o.y;
        z = z + o.z;
        return *this;
    }
};

template <typename T>
Vec3<T> operator*(const T& s, const Vec3<T>& v) {
    return v * s;
}

template <typename T>
T dot(const Vec3<T>& a, const Vec3<T>& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <typename T>
Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <typename T>
T squared_norm(const Vec3<T>& v) {
    return dot(v, v);
}

template <typename T>
T norm(const Vec3<T>& v) {
    using std::sqrt;
    return sqrt(squared_norm(v));
}

template <typename T>
Vec3<T> normalized(const Vec3<T>& v) {
    return v / norm(v);
}

using Vec3d = Vec3<double>;

}  // namespace refract

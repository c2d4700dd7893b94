#pragma once

#include <cmath>
#include <functional>
#include <optional>

namespace refract {

// Smallest root of g in (t_begin, t_max]: march in fixed steps to bracket the
// first sign change, bisect to 1e-12, then polish with Newton when a
// derivative is supplied. Returns nullopt if no sign change is found.
inline std::optional<double> first_root_along(
    const std::function<double(double)>& g,
    double t_begin, double step, double t_max,
    const std::function<double(double)>& dg = nullptr) {
    double a = t_begin;
    double ga = g(a);
    if (ga == 0.0) return a;
    double b = a;
    bool bracketed = false;
    while (b < t_max) {
        b = std::min(b + step, t_max);
        const double gb = g(b);
        if (ga * gb <= 0.0) {
            bracketed = true;
            break;
        }
        a = b;
        ga = gb;
    }
    if (!bracketed) return std::nullopt;

    double lo = a, hi = b;
    double glo = g(lo);
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double gmid = g(mid);
        if (glo * gmid <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
            glo = gmid;
        }
    }
    double root = 0.5 * (lo + hi);
    if (dg) {
        for (int it = 0; it < 3; ++it) {
            const double gr = g(root);
            const double dgr = dg(root);
            if (dgr == 0.0) break;
            const double next = root - gr / dgr;
            if (next < a - step || next > b + step) break;  // stay in the bracket
            root = next;
        }
    }
    return root;
}

}  // namespace refract

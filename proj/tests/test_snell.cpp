#include <doctest.h>

#include <cmath>
#include <random>

#include "refract/snell.hpp"

using namespace refract;

namespace {
constexpr double kPi = 3.14159265358979323846;

double angle_between(const Vec3d& a, const Vec3d& b) {
    const double c = dot(normalized(a), normalized(b));
    return std::acos(std::min(1.0, std::max(-1.0, c)));
}
}  // namespace

TEST_CASE("MediumPair validates mu") {
    CHECK_THROWS_AS(MediumPair(0.0), InvalidInputError);
    CHECK_THROWS_AS(MediumPair(-1.0), InvalidInputError);
    CHECK_THROWS_AS(MediumPair(std::numeric_limits<double>::infinity()), InvalidInputError);
    CHECK(MediumPair(1.0 / 1.33).mu == doctest::Approx(0.7518796992481203));
}

TEST_CASE("normal incidence passes straight through") {
    const Vec3d L{0, 0, -1};
    const Vec3d n{0, 0, -1};
    for (double mu : {0.5, 1.0 / 1.33, 1.0, 1.33}) {
        const Vec3d s = snell_refract(L, n, MediumPair(mu));
        CHECK(s.x == doctest::Approx(0.0));
        CHECK(s.y == doctest::Approx(0.0));
        CHECK(s.z == doctest::Approx(1.0));
    }
}

TEST_CASE("mu = 1 gives an undeviated ray") {
    const Vec3d L = normalized(Vec3d{0.3, -0.2, -0.9});
    const Vec3d n = normalized(Vec3d{0.1, 0.05, -1.0});
    const Vec3d s = snell_refract(L, n, MediumPair(1.0));
    CHECK(s.x == doctest::Approx(-L.x).epsilon(1e-12));
    CHECK(s.y == doctest::Approx(-L.y).epsilon(1e-12));
    CHECK(s.z == doctest::Approx(-L.z).epsilon(1e-12));
}

TEST_CASE("air-to-water at 30 degrees refracts to arcsin(0.5/1.33)") {
    const double theta1 = 30.0 * kPi / 180.0;
    const Vec3d n{0, 0, -1};
    const Vec3d L = normalized(Vec3d{std::sin(theta1), 0, -std::cos(theta1)});
    const MediumPair media(1.0 / 1.33);
    const Vec3d s = snell_refract(L, n, media);
    const double theta2 = angle_between(s, -1.0 * n);
    CHECK(theta2 == doctest::Approx(std::asin(0.5 / 1.33)).epsilon(1e-12));
    CHECK(theta2 * 180.0 / kPi == doctest::Approx(22.082).epsilon(1e-4));
}

TEST_CASE("refraction_angle_oracle") {
    CHECK(refraction_angle_oracle(0.0, MediumPair(1.0 / 1.33)) == 0.0);
    CHECK(refraction_angle_oracle(0.4, MediumPair(1.0)) == doctest::Approx(0.4).epsilon(1e-15));
    // water -> air at 60 degrees is beyond the critical angle arcsin(1/1.33).
    CHECK_THROWS_AS(refraction_angle_oracle(60.0 * kPi / 180.0, MediumPair(1.33)),
                    TotalInternalReflectionError);
}

TEST_CASE("orientation violations are reported distinctly from TIR") {
    const Vec3d n{0, 0, -1};
    const Vec3d L_away{0, 0, 1};  // alpha = -1
    CHECK_THROWS_AS(snell_refract(L_away, n, MediumPair(1.0 / 1.33)), OrientationError);
    const double theta1 = 60.0 * kPi / 180.0;
    const Vec3d L = normalized(Vec3d{std::sin(theta1), 0, -std::cos(theta1)});
    CHECK_THROWS_AS(snell_refract(L, n, MediumPair(1.33)), TotalInternalReflectionError);
}

TEST_CASE("random refractions match the scalar law, stay coplanar, flag TIR exactly") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> mu_dist(0.4, 1.6);
    int tested = 0, tir_seen = 0;
    while (tested < 100000) {
        Vec3d L{unit(rng), unit(rng), unit(rng)};
        Vec3d n{unit(rng), unit(rng), unit(rng)};
        if (norm(L) < 1e-3 || norm(n) < 1e-3) continue;
        L = normalized(L);
        n = normalized(n);
        const double alpha = dot(L, n);
        if (alpha <= 1e-6) continue;
        const double mu = mu_dist(rng);
        const double theta1 = std::acos(std::min(1.0, alpha));
        const bool tir_expected = mu * std::sin(theta1) > 1.0;
        const auto s = try_refract(L, n, mu);
        REQUIRE(s.has_value() != tir_expected);
        if (tir_expected) {
            ++tir_seen;
            ++tested;
            continue;
        }
        const double theta2 = angle_between(*s, -1.0 * n);
        CHECK(std::abs(theta2 - refraction_angle_oracle(theta1, MediumPair(mu))) < 1e-10);
        // coplanarity: det[L, n, s] = L . (n x s)
        CHECK(std::abs(dot(L, cross(n, *s))) < 1e-10);
        CHECK(std::abs(norm(*s) - 1.0) < 1e-12);
        ++tested;
    }
    CHECK(tir_seen > 0);
}

TEST_CASE("refract is continuous in the normal away from the TIR boundary") {
    const Vec3d L = normalized(Vec3d{0.4, 0.1, -0.9});
    const Vec3d n = normalized(Vec3d{0.05, -0.02, -1.0});
    const MediumPair media(1.0 / 1.33);
    const Vec3d s0 = snell_refract(L, n, media);
    const Vec3d n2 = normalized(n + Vec3d{1e-8, 0, 0});
    const Vec3d s1 = snell_refract(L, n2, media);
    CHECK(norm(s1 - s0) < 1e-7);
}

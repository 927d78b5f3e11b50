#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace cdcspm {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg2rad(double deg) noexcept { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) noexcept { return rad * 180.0 / kPi; }

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) noexcept {
    double r = std::remainder(a, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

/// One value per leg, leg 0 first.
using Triple = std::array<double, 3>;

inline Triple wrap_triple(const Triple& t) noexcept {
    return {wrap_angle(t[0]), wrap_angle(t[1]), wrap_angle(t[2])};
}

inline Triple deg2rad(const Triple& t) noexcept { return {deg2rad(t[0]), deg2rad(t[1]), deg2rad(t[2])}; }
inline Triple rad2deg(const Triple& t) noexcept { return {rad2deg(t[0]), rad2deg(t[1]), rad2deg(t[2])}; }

}  // namespace cdcspm

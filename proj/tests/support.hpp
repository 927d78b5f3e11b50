#pragma once

#include <random>

#include "cdcspm/geometry.hpp"

namespace testing_support {

/// Random valid mechanism with sphere-consistent radii and a home offset in [30, 100] degrees.
inline cdcspm::MechanismParams random_params(std::mt19937_64& rng) {
    using cdcspm::deg2rad;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    cdcspm::MechanismParams p;
    p.alpha1 = deg2rad(25.0 + 35.0 * u(rng));
    p.beta = deg2rad(25.0 + 40.0 * u(rng));
    const double delta = deg2rad(30.0 + 70.0 * u(rng));
    p.alpha2 = std::acos(std::cos(p.alpha1) * std::cos(p.beta) +
                         std::sin(p.alpha1) * std::sin(p.beta) * std::cos(delta));
    p.l_tool = 30.0 + 40.0 * u(rng);
    p.z_cor = p.l_tool + 80.0 + 100.0 * u(rng);
    const auto radii = cdcspm::sphere_consistent_radii(p.alpha1, p.beta, p.l_tool);
    p.r1 = radii.r1;
    p.r2 = radii.r2;
    p.base_offsets = {20.0 * u(rng), 20.0 * u(rng), 20.0 * u(rng)};
    return p;
}

}  // namespace testing_support

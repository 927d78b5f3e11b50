#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "cdcspm/angles.hpp"
#include "cdcspm/errors.hpp"

namespace cdcspm {

inline constexpr std::size_t kLegCount = 3;
inline constexpr std::size_t kDhRowCount = 10;

/// Angular spacing of the three legs around the common motor axis.
inline constexpr double kLegSpacing = 2.0 * kPi / 3.0;

/**
 * @brief Geometric design variables of the coaxial spherical mechanism.
 *
 * Angles in radians, lengths in millimetres. The three active joint axes all
 * coincide with the base z-axis.
 */
struct MechanismParams {
    double alpha1 = 0.0;  // proximal link curvature (joint 1 axis to joint 2 axis)
    double alpha2 = 0.0;  // distal link curvature (joint 2 axis to joint 3 axis)
    double beta = 0.0;    // joint 3 axis to platform normal
    double l_tool = 0.0;  // tool length, CoR above the platform
    double z_cor = 0.0;   // height of the centre of rotation above the base
    double r1 = 0.0;      // radius of the circle through all second joints
    double r2 = 0.0;      // radius of the circle through all third joints
    std::array<double, kLegCount> base_offsets{};  // per-leg d1
};

/// Radii that put joints 2 and 3 on the sphere through the CoR with radius l_tool / cos(beta).
struct SphereRadii {
    double r1;
    double r2;
};

inline SphereRadii sphere_consistent_radii(double alpha1, double beta, double l_tool) {
    const double rho = l_tool / std::cos(beta);
    return {rho * std::sin(alpha1), l_tool * std::tan(beta)};
}

/// The mechanism built in the reference prototype.
inline MechanismParams table2_params() {
    MechanismParams p;
    p.alpha1 = deg2rad(45.0);
    p.alpha2 = deg2rad(43.5);
    p.beta = deg2rad(50.0);
    p.l_tool = 50.0;
    p.z_cor = 172.0;
    const auto radii = sphere_consistent_radii(p.alpha1, p.beta, p.l_tool);
    p.r1 = radii.r1;
    p.r2 = radii.r2;
    p.base_offsets = {3.5, 12.0, 20.0};
    return p;
}

inline void check_leg(std::size_t leg) {
    if (leg >= kLegCount) throw ContractViolation("leg index " + std::to_string(leg) + " out of range");
}

/// Cosine of the azimuth between joint 2 and joint 3 of a leg in the home pose.
/// Follows from the spherical triangle (alpha1, beta, alpha2) around the base axis.
inline double home_offset_cosine(const MechanismParams& p) {
    return (std::cos(p.alpha2) - std::cos(p.alpha1) * std::cos(p.beta)) / (std::sin(p.alpha1) * std::sin(p.beta));
}

/**
 * Throws ParameterDomainError unless every angle lies in (0, pi/2), every
 * length is positive, base offsets are non-negative, z_cor > l_tool and the
 * legs can be assembled in the identity pose.
 */
inline void validate(const MechanismParams& p) {
    auto open_angle = [](double a, const char* name) {
        if (!std::isfinite(a) || a <= 0.0 || a >= kPi / 2.0)
            throw ParameterDomainError(std::string(name) + " must lie strictly between 0 and 90 degrees");
    };
    auto positive = [](double v, const char* name) {
        if (!std::isfinite(v) || v <= 0.0) throw ParameterDomainError(std::string(name) + " must be positive");
    };
    open_angle(p.alpha1, "alpha1");
    open_angle(p.alpha2, "alpha2");
    open_angle(p.beta, "beta");
    positive(p.l_tool, "l_tool");
    positive(p.z_cor, "z_cor");
    positive(p.r1, "r1");
    positive(p.r2, "r2");
    for (double d : p.base_offsets) {
        if (!std::isfinite(d) || d < 0.0) throw ParameterDomainError("base_offsets must be non-negative");
    }
    if (p.z_cor <= p.l_tool) throw ParameterDomainError("z_cor must exceed l_tool");
    if (std::abs(std::tan(p.alpha1)) < 1e-9) throw ParameterDomainError("tan(alpha1) is degenerate");
    const double c = home_offset_cosine(p);
    if (!(std::abs(c) <= 1.0))
        throw ParameterDomainError("alpha1, alpha2 and beta do not close a spherical triangle; no home assembly");
}

/// Azimuth between joint 2 and joint 3 of every leg in the home pose (~60 deg for the prototype).
inline double home_azimuth_offset(const MechanismParams& p) { return std::acos(home_offset_cosine(p)); }

/// Azimuth of leg `leg`'s third joint on the moving platform, measured in the tool frame.
inline double platform_joint_azimuth(const MechanismParams& p, std::size_t leg) {
    return static_cast<double>(leg) * kLegSpacing + home_azimuth_offset(p);
}

/// Motor angle of `leg` in the identity pose.
inline double home_motor_angle(std::size_t leg) { return static_cast<double>(leg) * kLegSpacing; }

/**
 * @brief Displacements of the closed loop base -> joint 1 -> joint 2 -> joint 3 -> centre -> tool tip.
 *
 * Expressed in the leg's own frame (motor angle zero, x towards joint 2) at the
 * home pose. The five vectors sum to (0, 0, z_cor).
 */
struct InterJointVectors {
    Eigen::Vector3d r_b_j1;
    Eigen::Vector3d r_j1_j2;
    Eigen::Vector3d r_j2_j3;
    Eigen::Vector3d r_j3_c;
    Eigen::Vector3d r_ct;
};

inline InterJointVectors inter_joint_vectors(const MechanismParams& p, std::size_t leg) {
    validate(p);
    check_leg(leg);
    const double d1 = p.base_offsets[leg];
    const double tan_a1 = std::tan(p.alpha1);
    const double delta = home_azimuth_offset(p);

    InterJointVectors v;
    v.r_b_j1 = {0.0, 0.0, d1};
    v.r_j1_j2 = {p.r1, 0.0, -(p.r1 - p.z_cor * tan_a1) / tan_a1 - d1};
    v.r_j2_j3 = {p.r2 * std::cos(delta) - p.r1, p.r2 * std::sin(delta),
                 p.z_cor - p.l_tool + (p.r1 - p.z_cor * tan_a1) / tan_a1};
    v.r_j3_c = {-p.r2 * std::cos(delta), -p.r2 * std::sin(delta), 0.0};
    v.r_ct = {0.0, 0.0, p.l_tool};
    return v;
}

enum class JointTag { fixed, active, passive2, passive3, centre, tool };

/// One standard DH row: Rz(theta) Tz(d) Tx(a) Rx(alpha). Joint rows add their joint value to theta.
struct DHRow {
    double theta = 0.0;
    double d = 0.0;
    double a = 0.0;
    double alpha = 0.0;
    JointTag joint_tag = JointTag::fixed;

    bool has_joint_slot() const noexcept {
        return joint_tag == JointTag::active || joint_tag == JointTag::passive2 || joint_tag == JointTag::passive3;
    }
};

struct DHTable {
    std::size_t leg_index = 0;  // 0-based
    std::array<DHRow, kDhRowCount> rows{};
};

/// Row indices (0-based) of the M1..M10 maps that carry the joint variables.
inline constexpr std::size_t kActiveRow = 1;
inline constexpr std::size_t kPassive2Row = 3;
inline constexpr std::size_t kPassive3Row = 6;

inline DHTable build_dh_table(const MechanismParams& p, std::size_t leg) {
    const auto r = inter_joint_vectors(p, leg);
    const double delta = home_azimuth_offset(p);
    const double half_pi = kPi / 2.0;

    DHTable t;
    t.leg_index = leg;
    auto& m = t.rows;
    m[0] = {0.0, r.r_b_j1.z(), 0.0, 0.0, JointTag::fixed};
    m[1] = {0.0, r.r_j1_j2.z(), r.r_j1_j2.x(), 0.0, JointTag::active};
    m[2] = {half_pi, 0.0, 0.0, -p.alpha1, JointTag::fixed};
    // r_j2_j3 is laid out along x4 (tangential), -x5 (radial) and z5 (axial).
    m[3] = {0.0, 0.0, r.r_j2_j3.y(), p.alpha1, JointTag::passive2};
    m[4] = {half_pi, 0.0, -r.r_j2_j3.x(), 0.0, JointTag::fixed};
    m[5] = {half_pi + delta, r.r_j2_j3.z(), 0.0, p.beta, JointTag::fixed};
    m[6] = {0.0, 0.0, 0.0, -p.beta, JointTag::passive3};
    m[7] = {0.0, 0.0, 0.0, 0.0, JointTag::fixed};
    m[8] = {half_pi, 0.0, -p.r2, 0.0, JointTag::centre};
    m[9] = {-platform_joint_azimuth(p, leg), r.r_ct.z(), 0.0, 0.0, JointTag::tool};
    return t;
}

}  // namespace cdcspm

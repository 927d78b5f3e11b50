#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

#include <Eigen/Dense>

#include "cdcspm/angles.hpp"
#include "cdcspm/errors.hpp"
#include "cdcspm/fk.hpp"
#include "cdcspm/geometry.hpp"
#include "cdcspm/transforms.hpp"

namespace cdcspm {

/// Residual above which a passive-joint extraction is reported as inconsistent.
inline constexpr double kChainResidualTolerance = 1e-9;

/// Which root of A cos(phi) + B sin(phi) = C a leg uses. `home` is continuous with the identity pose.
enum class Branch { home, alternate };

using BranchSelection = std::array<Branch, kLegCount>;

inline constexpr BranchSelection kHomeBranches{Branch::home, Branch::home, Branch::home};

struct Phi1LegSolution {
    std::array<double, 2> candidates{};  // {home, alternate}
    double selected = 0.0;
    Branch branch = Branch::home;
    double residual = 0.0;
};

struct Phi1Solution {
    std::array<Phi1LegSolution, kLegCount> legs{};

    Triple selected() const { return {legs[0].selected, legs[1].selected, legs[2].selected}; }
    double max_residual() const {
        return std::max({legs[0].residual, legs[1].residual, legs[2].residual});
    }
};

/**
 * Active angles for tool orientation q. Each leg's closure v_i(phi) . w_i = cos(alpha2)
 * involves that leg's motor only and reduces to A cos(phi) + B sin(phi) = C,
 * solved as phi = atan2(B, A) -+ acos(C / hypot(A, B)).
 */
inline Phi1Solution ik_phi1(const MechanismParams& p, const UnitQuaternion& q,
                            const BranchSelection& branches = kHomeBranches) {
    const Eigen::Matrix3d r = quat_to_rotation(q);
    const double s1 = std::sin(p.alpha1), c1 = std::cos(p.alpha1), c2 = std::cos(p.alpha2);
    Phi1Solution sol;
    for (std::size_t i = 0; i < kLegCount; ++i) {
        const Eigen::Vector3d w = r * tool_frame_w(p, i);
        const double a = -s1 * w.x();
        const double b = -s1 * w.y();
        const double c = c2 - c1 * w.z();
        const double rho2 = a * a + b * b;
        const double disc = rho2 - c * c;
        if (disc < 0.0 || rho2 < 1e-24) throw UnreachableOrientationError(i, disc);
        const double psi = std::atan2(b, a);
        const double half = std::acos(std::clamp(c / std::sqrt(rho2), -1.0, 1.0));
        auto& leg = sol.legs[i];
        leg.candidates = {wrap_angle(psi - half), wrap_angle(psi + half)};
        leg.branch = branches[i];
        leg.selected = leg.candidates[branches[i] == Branch::home ? 0 : 1];
        leg.residual = std::abs(leg_direction_v(p, i, leg.selected).dot(w) - c2);
    }
    return sol;
}

struct PassiveStage {
    Triple angles{};
    Triple residuals{};
};

namespace detail {

/// Angle of the joint rotation Rz(angle) that maps `k` onto `m` (both in the joint frame).
/// The z components are invariant under the rotation and serve as the residual.
inline std::pair<double, double> joint_angle_from_axis(const Eigen::Vector3d& m, const Eigen::Vector3d& k) {
    const double angle = wrap_angle(std::atan2(m.y(), m.x()) - std::atan2(k.y(), k.x()));
    return {angle, std::abs(m.z() - k.z())};
}

}  // namespace detail

/// First passive angles: rotate link 2 about v_i until the joint-3 axis reaches R(q) w_i.
inline PassiveStage ik_phi2(const MechanismParams& p, const UnitQuaternion& q, const Triple& phi1) {
    const Eigen::Matrix3d r = quat_to_rotation(q);
    PassiveStage out;
    for (std::size_t i = 0; i < kLegCount; ++i) {
        const DHTable table = build_dh_table(p, i);
        const LegAngles angles{phi1[i], 0.0, 0.0};
        const Eigen::Matrix3d base_to_j2 = chain_segment(table, angles, 0, kPassive2Row).rotation;
        const Eigen::Vector3d k = chain_segment(table, angles, kPassive2Row, kPassive3Row).rotation.col(2);
        const Eigen::Vector3d m = base_to_j2.transpose() * (r * tool_frame_w(p, i));
        const auto [angle, residual] = detail::joint_angle_from_axis(m, k);
        if (residual > kChainResidualTolerance) throw InconsistentChainError(i, residual);
        out.angles[i] = angle;
        out.residuals[i] = residual;
    }
    return out;
}

/// Second passive angles: rotate the platform about w_i until its normal matches R(q) z.
inline PassiveStage ik_phi3(const MechanismParams& p, const UnitQuaternion& q, const Triple& phi1,
                            const Triple& phi2) {
    const Eigen::Vector3d n = quat_to_rotation(q).col(2);
    PassiveStage out;
    for (std::size_t i = 0; i < kLegCount; ++i) {
        const DHTable table = build_dh_table(p, i);
        const LegAngles angles{phi1[i], phi2[i], 0.0};
        const Eigen::Matrix3d base_to_j3 = chain_segment(table, angles, 0, kPassive3Row).rotation;
        const Eigen::Vector3d k = chain_segment(table, angles, kPassive3Row, kDhRowCount).rotation.col(2);
        const Eigen::Vector3d m = base_to_j3.transpose() * n;
        const auto [angle, residual] = detail::joint_angle_from_axis(m, k);
        if (residual > kChainResidualTolerance) throw InconsistentChainError(i, residual);
        out.angles[i] = angle;
        out.residuals[i] = residual;
    }
    return out;
}

struct IkResiduals {
    double phi1 = 0.0;
    double phi2 = 0.0;
    double phi3 = 0.0;
};

struct IkSolution {
    LegJointAngles angles;
    BranchSelection branch_flags = kHomeBranches;
    IkResiduals residuals;
};

/// All three stages. With `passive == false` only phi1 is filled in.
inline IkSolution ik_solve(const MechanismParams& p, const UnitQuaternion& q,
                           const BranchSelection& branches = kHomeBranches, bool passive = true) {
    const auto s1 = ik_phi1(p, q, branches);
    IkSolution sol;
    sol.angles.phi1 = s1.selected();
    sol.branch_flags = branches;
    sol.residuals.phi1 = s1.max_residual();
    if (!passive) return sol;
    const auto s2 = ik_phi2(p, q, sol.angles.phi1);
    const auto s3 = ik_phi3(p, q, sol.angles.phi1, s2.angles);
    sol.angles.phi2 = s2.angles;
    sol.angles.phi3 = s3.angles;
    sol.residuals.phi2 = *std::max_element(s2.residuals.begin(), s2.residuals.end());
    sol.residuals.phi3 = *std::max_element(s3.residuals.begin(), s3.residuals.end());
    return sol;
}

}  // namespace cdcspm

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "cdcspm/angles.hpp"
#include "cdcspm/errors.hpp"
#include "cdcspm/geometry.hpp"

namespace cdcspm {

/// Largest tolerated |norm - 1| before a quaternion is rejected.
inline constexpr double kQuaternionNormTolerance = 1e-6;

/// Band around +-90 deg pitch where ZYX angles are not reported.
inline constexpr double kGimbalEpsilon = 1e-6;

/**
 * @brief Unit quaternion q = [e0, e1, e2, e3], scalar first.
 *
 * Always normalised and in canonical sign: e0 >= 0, and when e0 == 0 the first
 * non-zero vector component is positive. q and -q denote the same rotation, so
 * the canonical form makes stored values unique.
 */
class UnitQuaternion {
public:
    UnitQuaternion() = default;

    /// Normalises and canonicalises; throws InvalidQuaternionError if |norm - 1| > 1e-6.
    static UnitQuaternion from_components(double e0, double e1, double e2, double e3) {
        return from_vector(Eigen::Vector4d(e0, e1, e2, e3));
    }
    static UnitQuaternion from_vector(const Eigen::Vector4d& q) {
        const double n = q.norm();
        if (!std::isfinite(n) || std::abs(n - 1.0) > kQuaternionNormTolerance) throw InvalidQuaternionError(n);
        return UnitQuaternion(q / n);
    }
    /// For solver output of arbitrary non-zero norm.
    static UnitQuaternion normalized(const Eigen::Vector4d& q) {
        const double n = q.norm();
        if (!std::isfinite(n) || n == 0.0) throw InvalidQuaternionError(n);
        return UnitQuaternion(q / n);
    }
    static UnitQuaternion from_axis_angle(const Eigen::Vector3d& axis, double angle) {
        const Eigen::Vector3d u = axis.normalized();
        const double s = std::sin(angle / 2.0);
        return normalized({std::cos(angle / 2.0), s * u.x(), s * u.y(), s * u.z()});
    }
    static UnitQuaternion identity() { return UnitQuaternion(Eigen::Vector4d(1.0, 0.0, 0.0, 0.0)); }

    double e0() const noexcept { return q_[0]; }
    double e1() const noexcept { return q_[1]; }
    double e2() const noexcept { return q_[2]; }
    double e3() const noexcept { return q_[3]; }
    const Eigen::Vector4d& vector() const noexcept { return q_; }

    /// Hamilton product; the rotation of `rhs` is applied first.
    UnitQuaternion operator*(const UnitQuaternion& rhs) const {
        const auto& a = q_;
        const auto& b = rhs.q_;
        return normalized({a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
                           a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
                           a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
                           a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]});
    }
    UnitQuaternion conjugate() const { return normalized({q_[0], -q_[1], -q_[2], -q_[3]}); }

private:
    explicit UnitQuaternion(const Eigen::Vector4d& q) : q_(q) {
        double sign = 1.0;
        for (int i = 0; i < 4; ++i) {
            if (q_[i] != 0.0) {
                sign = q_[i] > 0.0 ? 1.0 : -1.0;
                break;
            }
        }
        q_ *= sign;
    }

    Eigen::Vector4d q_{1.0, 0.0, 0.0, 0.0};
};

/// Rotation angle between two orientations, in [0, pi].
inline double geodesic_distance(const UnitQuaternion& a, const UnitQuaternion& b) {
    const Eigen::Vector4d d = (a.conjugate() * b).vector();
    return 2.0 * std::atan2(d.tail<3>().norm(), std::abs(d[0]));
}

/// ZYX Tait-Bryan angles: R = Rz(yaw) Ry(pitch) Rx(roll).
struct YprAngles {
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;
};

struct HomTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    static HomTransform identity() { return {}; }

    HomTransform operator*(const HomTransform& rhs) const {
        return {rotation * rhs.rotation, rotation * rhs.translation + translation};
    }
    Eigen::Vector3d apply(const Eigen::Vector3d& point) const { return rotation * point + translation; }
    Eigen::Matrix4d matrix() const {
        Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
        m.topLeftCorner<3, 3>() = rotation;
        m.topRightCorner<3, 1>() = translation;
        return m;
    }
};

/// Exact rigid inverse (R^T, -R^T t).
inline HomTransform invert_transform(const HomTransform& t) {
    const Eigen::Matrix3d rt = t.rotation.transpose();
    return {rt, -rt * t.translation};
}

inline Eigen::Matrix3d rot_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d m;
    m << 1, 0, 0, 0, c, -s, 0, s, c;
    return m;
}
inline Eigen::Matrix3d rot_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d m;
    m << c, 0, s, 0, 1, 0, -s, 0, c;
    return m;
}
inline Eigen::Matrix3d rot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d m;
    m << c, -s, 0, s, c, 0, 0, 0, 1;
    return m;
}

inline HomTransform dh_elementary(double theta, double d, double a, double alpha) {
    const double ct = std::cos(theta), st = std::sin(theta);
    return {rot_z(theta) * rot_x(alpha), Eigen::Vector3d(a * ct, a * st, d)};
}

/// Standard DH transform of one row. `joint_value` must be present exactly when the row is a joint.
inline HomTransform dh_transform(const DHRow& row, std::optional<double> joint_value = std::nullopt) {
    if (row.has_joint_slot() != joint_value.has_value()) {
        throw ContractViolation(row.has_joint_slot() ? "joint row requires a joint value"
                                                     : "fixed row does not accept a joint value");
    }
    return dh_elementary(row.theta + joint_value.value_or(0.0), row.d, row.a, row.alpha);
}

/// Active and passive angles of a single leg.
struct LegAngles {
    double phi1 = 0.0;
    double phi2 = 0.0;
    double phi3 = 0.0;
};

inline std::optional<double> joint_value_for(const DHRow& row, const LegAngles& q) {
    switch (row.joint_tag) {
        case JointTag::active: return q.phi1;
        case JointTag::passive2: return q.phi2;
        case JointTag::passive3: return q.phi3;
        default: return std::nullopt;
    }
}

/// Product of rows [first, last) in chain order; frame of row `first - 1` to frame of row `last - 1`.
inline HomTransform chain_segment(const DHTable& table, const LegAngles& q, std::size_t first, std::size_t last) {
    if (first > last || last > kDhRowCount) throw ContractViolation("invalid DH row range");
    HomTransform t;
    for (std::size_t k = first; k < last; ++k) t = t * dh_transform(table.rows[k], joint_value_for(table.rows[k], q));
    return t;
}

/// Base frame to the tool frame through all ten rows, M1 first.
inline HomTransform chain_base_to_tool(const DHTable& table, const LegAngles& q) {
    return chain_segment(table, q, 0, kDhRowCount);
}

/// Rotation matrix of a (possibly non-unit) quaternion; quadratic in the components.
inline Eigen::Matrix3d quaternion_matrix(const Eigen::Vector4d& q) {
    const double e0 = q[0], e1 = q[1], e2 = q[2], e3 = q[3];
    Eigen::Matrix3d r;
    r << e0 * e0 + e1 * e1 - e2 * e2 - e3 * e3, 2 * (e1 * e2 - e0 * e3), 2 * (e1 * e3 + e0 * e2),
        2 * (e1 * e2 + e0 * e3), e0 * e0 - e1 * e1 + e2 * e2 - e3 * e3, 2 * (e2 * e3 - e0 * e1),
        2 * (e1 * e3 - e0 * e2), 2 * (e2 * e3 + e0 * e1), e0 * e0 - e1 * e1 - e2 * e2 + e3 * e3;
    return r;
}

inline Eigen::Matrix3d quat_to_rotation(const Eigen::Vector4d& q) {
    const double n = q.norm();
    if (!std::isfinite(n) || std::abs(n - 1.0) > kQuaternionNormTolerance) throw InvalidQuaternionError(n);
    return quaternion_matrix(q);
}
inline Eigen::Matrix3d quat_to_rotation(const UnitQuaternion& q) { return quaternion_matrix(q.vector()); }

/// Quaternion of a proper rotation matrix (Shepperd's method).
inline UnitQuaternion rotation_to_quat(const Eigen::Matrix3d& r) {
    const double tr = r.trace();
    Eigen::Vector4d q;
    if (tr >= r(0, 0) && tr >= r(1, 1) && tr >= r(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + tr);
        q = {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s};
    } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
        q = {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s};
    } else if (r(1, 1) >= r(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
        q = {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s};
    } else {
        const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
        q = {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s};
    }
    return UnitQuaternion::normalized(q);
}

inline Eigen::Matrix3d ypr_to_rotation(const YprAngles& y) { return rot_z(y.yaw) * rot_y(y.pitch) * rot_x(y.roll); }

inline UnitQuaternion ypr_to_quat(const YprAngles& y) {
    const double cy = std::cos(y.yaw / 2), sy = std::sin(y.yaw / 2);
    const double cp = std::cos(y.pitch / 2), sp = std::sin(y.pitch / 2);
    const double cr = std::cos(y.roll / 2), sr = std::sin(y.roll / 2);
    return UnitQuaternion::normalized({cy * cp * cr + sy * sp * sr, cy * cp * sr - sy * sp * cr,
                                       cy * sp * cr + sy * cp * sr, sy * cp * cr - cy * sp * sr});
}

/// Throws GimbalProximityError when |pitch| >= pi/2 - 1e-6.
inline YprAngles rotation_to_ypr(const Eigen::Matrix3d& r) {
    const double pitch = std::atan2(-r(2, 0), std::hypot(r(0, 0), r(1, 0)));
    if (std::abs(pitch) >= kPi / 2.0 - kGimbalEpsilon) throw GimbalProximityError(pitch);
    return {std::atan2(r(1, 0), r(0, 0)), pitch, std::atan2(r(2, 1), r(2, 2))};
}

inline YprAngles quat_to_ypr(const UnitQuaternion& q) { return rotation_to_ypr(quat_to_rotation(q)); }

/// Yaw about the common motor axis.
inline UnitQuaternion yaw_quat(double yaw) {
    return UnitQuaternion::normalized({std::cos(yaw / 2.0), 0.0, 0.0, std::sin(yaw / 2.0)});
}

}  // namespace cdcspm

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "cdcspm/angles.hpp"
#include "cdcspm/errors.hpp"
#include "cdcspm/fk.hpp"
#include "cdcspm/geometry.hpp"
#include "cdcspm/transforms.hpp"

namespace cdcspm {

/// F_i(x, phi1) = v_i(phi1_i) . R(x) w_i - cos(alpha2), with x the ZYX pose.
inline Eigen::Vector3d constraint_residual(const MechanismParams& p, const YprAngles& x, const Triple& phi1) {
    const Eigen::Matrix3d r = ypr_to_rotation(x);
    Eigen::Vector3d f;
    for (std::size_t i = 0; i < kLegCount; ++i)
        f[static_cast<Eigen::Index>(i)] =
            leg_direction_v(p, i, phi1[i]).dot(r * tool_frame_w(p, i)) - std::cos(p.alpha2);
    return f;
}

/// dR/dyaw, dR/dpitch, dR/droll of R = Rz(yaw) Ry(pitch) Rx(roll).
inline std::array<Eigen::Matrix3d, 3> ypr_rotation_partials(const YprAngles& x) {
    Eigen::Matrix3d gz, gy, gx;  // generators
    gz << 0, -1, 0, 1, 0, 0, 0, 0, 0;
    gy << 0, 0, 1, 0, 0, 0, -1, 0, 0;
    gx << 0, 0, 0, 0, 0, -1, 0, 1, 0;
    const Eigen::Matrix3d rz = rot_z(x.yaw), ry = rot_y(x.pitch), rx = rot_x(x.roll);
    return {gz * rz * ry * rx, rz * gy * ry * rx, rz * ry * gx * rx};
}

struct JacobianBundle {
    Eigen::Matrix3d jx = Eigen::Matrix3d::Zero();         // dF/dx
    Eigen::Matrix3d jq_active = Eigen::Matrix3d::Zero();  // dF/dphi1, diagonal
    std::optional<Eigen::Matrix3d> j_effective;           // -Jx^-1 Jq, absent at a direct singularity
    YprAngles pose;
    Triple phi1{};
    double det_jx = 0.0;
    double det_jq = 0.0;
    bool direct_singular = false;
    bool inverse_singular = false;
};

/// |det M| below 1e-10 (|M|_F / sqrt 3)^3 counts as singular.
inline bool is_scale_singular(const Eigen::Matrix3d& m) {
    const double scale = m.norm() / std::sqrt(3.0);
    return std::abs(m.determinant()) <= 1e-10 * scale * scale * scale;
}

/**
 * Analytic constraint Jacobians at a consistent configuration (|F| <= 1e-8,
 * otherwise ContractViolation). J_effective maps motor rates to ZYX rates.
 */
inline JacobianBundle constraint_jacobians(const MechanismParams& p, const YprAngles& x, const Triple& phi1,
                                           double consistency_tolerance = 1e-8) {
    const Eigen::Vector3d f = constraint_residual(p, x, phi1);
    if (!(f.cwiseAbs().maxCoeff() <= consistency_tolerance))
        throw ContractViolation("pose and motor angles are inconsistent (|F| = " + std::to_string(f.norm()) + ")");

    const Eigen::Matrix3d r = ypr_to_rotation(x);
    const auto partials = ypr_rotation_partials(x);
    JacobianBundle b;
    b.pose = x;
    b.phi1 = phi1;
    for (std::size_t i = 0; i < kLegCount; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const Eigen::Vector3d v = leg_direction_v(p, i, phi1[i]);
        const Eigen::Vector3d w = tool_frame_w(p, i);
        for (int k = 0; k < 3; ++k) b.jx(row, k) = v.dot(partials[static_cast<std::size_t>(k)] * w);
        b.jq_active(row, row) = leg_direction_v_derivative(p, phi1[i]).dot(r * w);
    }
    b.det_jx = b.jx.determinant();
    b.det_jq = b.jq_active.determinant();
    b.direct_singular = is_scale_singular(b.jx);
    b.inverse_singular = is_scale_singular(b.jq_active);
    if (!b.direct_singular) b.j_effective = -b.jx.partialPivLu().solve(b.jq_active);
    return b;
}

enum class SingularityClass { none, inverse_kinematic, direct_kinematic, combined };

inline std::string to_string(SingularityClass c) {
    switch (c) {
        case SingularityClass::none: return "none";
        case SingularityClass::inverse_kinematic: return "inverse_kinematic";
        case SingularityClass::direct_kinematic: return "direct_kinematic";
        case SingularityClass::combined: return "combined";
    }
    return "none";
}

/// Which condition value decides feasibility.
enum class CnMetric { inv2norm, frobenius };

inline std::string to_string(CnMetric m) { return m == CnMetric::inv2norm ? "inv2norm" : "frobenius"; }

struct ConditionMetrics {
    double cn_frobenius = std::numeric_limits<double>::infinity();  // |J|_F |J^-1|_F, >= 3
    double inv_cond_2norm = 0.0;                                      // sigma_min / sigma_max in [0, 1]
};

inline ConditionMetrics condition_metrics(const Eigen::Matrix3d& j) {
    ConditionMetrics m;
    const Eigen::Vector3d sv = Eigen::JacobiSVD<Eigen::Matrix3d>(j).singularValues();
    if (sv[0] > 0.0) m.inv_cond_2norm = sv[2] / sv[0];
    if (sv[2] > 0.0 && m.inv_cond_2norm > 1e-15) m.cn_frobenius = j.norm() * j.inverse().norm();
    return m;
}

struct ManipulabilityReport {
    double cn_frobenius = std::numeric_limits<double>::infinity();
    double inv_cond_2norm = 0.0;
    SingularityClass singularity_class = SingularityClass::none;
    CnMetric metric = CnMetric::inv2norm;
    double metric_value = 0.0;  // inv_cond_2norm, or 3 / cn_frobenius
    bool well_conditioned = false;
};

inline double metric_value(const ConditionMetrics& m, CnMetric metric) {
    if (metric == CnMetric::inv2norm) return m.inv_cond_2norm;
    return std::isfinite(m.cn_frobenius) ? 3.0 / m.cn_frobenius : 0.0;
}

inline SingularityClass classify_singularity(bool inverse_singular, bool direct_singular) {
    if (inverse_singular && direct_singular) return SingularityClass::combined;
    if (direct_singular) return SingularityClass::direct_kinematic;
    if (inverse_singular) return SingularityClass::inverse_kinematic;
    return SingularityClass::none;
}

/// Condition report for an effective Jacobian given directly.
inline ManipulabilityReport manipulability(const Eigen::Matrix3d& j_effective, double cn_min,
                                           CnMetric metric = CnMetric::inv2norm) {
    const auto m = condition_metrics(j_effective);
    ManipulabilityReport r;
    r.cn_frobenius = m.cn_frobenius;
    r.inv_cond_2norm = m.inv_cond_2norm;
    r.singularity_class = classify_singularity(is_scale_singular(j_effective), false);
    r.metric = metric;
    r.metric_value = metric_value(m, metric);
    r.well_conditioned = r.metric_value >= cn_min;
    return r;
}

inline ManipulabilityReport manipulability(const JacobianBundle& b, double cn_min,
                                           CnMetric metric = CnMetric::inv2norm) {
    ManipulabilityReport r;
    r.metric = metric;
    if (b.j_effective) {
        r = manipulability(*b.j_effective, cn_min, metric);
    }
    r.singularity_class = classify_singularity(b.inverse_singular, b.direct_singular);
    if (r.singularity_class != SingularityClass::none) r.well_conditioned = false;
    return r;
}

}  // namespace cdcspm

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cdcspm/angles.hpp"
#include "cdcspm/errors.hpp"
#include "cdcspm/geometry.hpp"
#include "cdcspm/transforms.hpp"

namespace cdcspm {

/// Per-leg joint angles of the whole mechanism.
struct LegJointAngles {
    Triple phi1{};
    Triple phi2{};
    Triple phi3{};

    LegAngles leg(std::size_t i) const { return {phi1[i], phi2[i], phi3[i]}; }
};

/**
 * Axis of joint 2 (v_i) in the base frame: third column of the base -> joint 2
 * rotation. Depends on the motor angle only; v_i . z = cos(alpha1).
 */
inline Eigen::Vector3d leg_direction_v(const MechanismParams& p, std::size_t leg, double phi1) {
    check_leg(leg);
    const double s = std::sin(p.alpha1);
    return {-s * std::cos(phi1), -s * std::sin(phi1), std::cos(p.alpha1)};
}

inline Eigen::Vector3d leg_direction_v_derivative(const MechanismParams& p, double phi1) {
    const double s = std::sin(p.alpha1);
    return {s * std::sin(phi1), -s * std::cos(phi1), 0.0};
}

/// Axis of joint 3 (w_i) expressed in the tool frame; fixed by the platform geometry.
inline Eigen::Vector3d tool_frame_w(const MechanismParams& p, std::size_t leg) {
    check_leg(leg);
    const double g = platform_joint_azimuth(p, leg);
    const double s = std::sin(p.beta);
    return {-s * std::cos(g), -s * std::sin(g), std::cos(p.beta)};
}

/// Axis of joint 3 (w_i) in the base frame for tool orientation q.
inline Eigen::Vector3d leg_direction_w_from_tool(const MechanismParams& p, std::size_t leg, const UnitQuaternion& q) {
    return quat_to_rotation(q) * tool_frame_w(p, leg);
}

namespace detail {

/// The loop-closure system for fixed motor angles, with the leg axes evaluated once.
struct ClosureSystem {
    std::array<Eigen::Vector3d, kLegCount> v;
    std::array<Eigen::Vector3d, kLegCount> w;
    double cos_alpha2 = 0.0;

    ClosureSystem(const MechanismParams& p, const Triple& phi1) : cos_alpha2(std::cos(p.alpha2)) {
        for (std::size_t i = 0; i < kLegCount; ++i) {
            v[i] = leg_direction_v(p, i, phi1[i]);
            w[i] = tool_frame_w(p, i);
        }
    }

    Eigen::Vector4d residual(const Eigen::Vector4d& q) const {
        const Eigen::Matrix3d r = quaternion_matrix(q);
        Eigen::Vector4d f;
        for (std::size_t i = 0; i < kLegCount; ++i) f[static_cast<Eigen::Index>(i)] = v[i].dot(r * w[i]) - cos_alpha2;
        f[3] = q.squaredNorm() - 1.0;
        return f;
    }

    Eigen::Matrix4d jacobian(const Eigen::Vector4d& q) const {
        // R(q) w = (e0^2 - |e|^2) w + 2 (e.w) e + 2 e0 (e x w)
        const double e0 = q[0];
        const Eigen::Vector3d e = q.tail<3>();
        Eigen::Matrix4d jac;
        for (std::size_t i = 0; i < kLegCount; ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            const Eigen::Vector3d& wi = w[i];
            const Eigen::Vector3d& vi = v[i];
            jac(row, 0) = vi.dot(2.0 * e0 * wi + 2.0 * e.cross(wi));
            const double ew = e.dot(wi);
            const Eigen::Vector3d wxv = wi.cross(vi);  // v . (ek x w) = ek . (w x v)
            for (int k = 0; k < 3; ++k) {
                jac(row, k + 1) = -2.0 * e[k] * vi.dot(wi) + 2.0 * wi[k] * vi.dot(e) + 2.0 * ew * vi[k] +
                                  2.0 * e0 * wxv[k];
            }
        }
        jac.row(3) = 2.0 * q.transpose();
        return jac;
    }
};

}  // namespace detail

/// Rows 0..2: v_i . w_i - cos(alpha2); row 3: |q|^2 - 1. `q` need not be unit.
inline Eigen::Vector4d fk_residual(const MechanismParams& p, const Eigen::Vector4d& q, const Triple& phi1) {
    return detail::ClosureSystem(p, phi1).residual(q);
}

/// d fk_residual / d(e0, e1, e2, e3).
inline Eigen::Matrix4d fk_residual_jacobian(const MechanismParams& p, const Eigen::Vector4d& q, const Triple& phi1) {
    return detail::ClosureSystem(p, phi1).jacobian(q);
}

struct FkOptions {
    double tolerance = 1e-10;
    int max_iterations = 100;
};

struct FkSolution {
    UnitQuaternion orientation;
    double residual_norm = 0.0;
    int iterations = 0;
    UnitQuaternion seed_used;
};

namespace detail {

struct NewtonOutcome {
    Eigen::Vector4d q;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

/// Damped Newton (Levenberg) on the 4x4 system.
inline NewtonOutcome damped_newton(const ClosureSystem& sys, const Eigen::Vector4d& seed, const FkOptions& opt) {
    NewtonOutcome out;
    Eigen::Vector4d q = seed;
    Eigen::Vector4d f = sys.residual(q);
    double fn = f.norm();
    double lambda = 1e-12;
    // Iterate a little past the tolerance so the normalised result still satisfies it.
    const double target = opt.tolerance * 1e-2;
    int it = 0;
    bool stalled = false;
    for (; it < opt.max_iterations && fn > target && !stalled; ++it) {
        const Eigen::Matrix4d jac = sys.jacobian(q);
        const Eigen::Matrix4d jtj = jac.transpose() * jac;
        const Eigen::Vector4d g = jac.transpose() * f;
        bool accepted = false;
        while (lambda < 1e6) {
            Eigen::Matrix4d a = jtj;
            a.diagonal().array() += lambda * (1.0 + 0.25 * jtj.trace());
            const Eigen::Vector4d step = a.ldlt().solve(-g);
            const Eigen::Vector4d qn = q + step;
            const Eigen::Vector4d fnew = sys.residual(qn);
            const double nn = fnew.norm();
            if (nn < fn) {
                accepted = true;
                q = qn;
                f = fnew;
                lambda = std::max(lambda * 0.1, 1e-15);
                stalled = step.norm() < 1e-15;
                fn = nn;
                break;
            }
            lambda *= 10.0;
        }
        stalled = stalled || !accepted;  // local minimum of |f|
    }
    out.iterations = it;
    if (q.norm() > 0.0 && std::isfinite(q.norm())) {
        q.normalize();
        out.q = q;
        out.residual = sys.residual(q).norm();
        out.converged = out.residual < opt.tolerance;
    } else {
        out.q = seed;
    }
    return out;
}

}  // namespace detail

/// The 24 proper rotations of a cube with one body diagonal along z, used as fallback seeds.
inline const std::array<UnitQuaternion, 24>& octahedral_seeds() {
    static const std::array<UnitQuaternion, 24> seeds = [] {
        std::array<UnitQuaternion, 24> s;
        std::size_t n = 0;
        const double h = 0.5;
        const double r = std::sqrt(0.5);
        for (int k = 0; k < 4; ++k) {
            Eigen::Vector4d q = Eigen::Vector4d::Zero();
            q[k] = 1.0;
            s[n++] = UnitQuaternion::normalized(q);
        }
        // (1/2)(1, +-1, +-1, +-1)
        for (int m = 0; m < 8; ++m)
            s[n++] = UnitQuaternion::normalized({h, (m & 1) ? -h : h, (m & 2) ? -h : h, (m & 4) ? -h : h});
        // (1/sqrt2) on two components: (e0, ek) and (ej, ek)
        for (int k = 1; k < 4; ++k) {
            for (double sg : {1.0, -1.0}) {
                Eigen::Vector4d q = Eigen::Vector4d::Zero();
                q[0] = r;
                q[k] = sg * r;
                s[n++] = UnitQuaternion::normalized(q);
            }
        }
        for (int j = 1; j < 4; ++j) {
            for (int k = j + 1; k < 4; ++k) {
                for (double sg : {1.0, -1.0}) {
                    Eigen::Vector4d q = Eigen::Vector4d::Zero();
                    q[j] = r;
                    q[k] = sg * r;
                    s[n++] = UnitQuaternion::normalized(q);
                }
            }
        }
        // Turn the (1, 1, 1) diagonal onto z so the set is closed under the 120 deg leg spacing.
        const auto tilt = UnitQuaternion::from_axis_angle(Eigen::Vector3d(1.0, -1.0, 0.0).normalized(),
                                                       std::acos(1.0 / std::sqrt(3.0)));
        for (auto& g : s) g = tilt * g * tilt.conjugate();
        return s;
    }();
    return seeds;
}

/**
 * Identity orientation turned by the mean motor offset from home. Equal
 * rotation of all motors yaws the platform, so this is the identity seed
 * carried along with the common yaw.
 */
inline UnitQuaternion default_fk_seed(const Triple& phi1) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < kLegCount; ++i) acc += std::polar(1.0, phi1[i] - home_motor_angle(i));
    const double yaw = std::abs(acc) > 1e-12 ? std::arg(acc) : 0.0;
    return yaw_quat(yaw);
}

namespace detail {

inline std::vector<FkSolution> converged_from_lattice(const ClosureSystem& sys, const UnitQuaternion& base,
                                                      const FkOptions& opt, double& best_residual) {
    std::vector<FkSolution> found;
    for (const auto& g : octahedral_seeds()) {
        const UnitQuaternion s = base * g;
        const auto o = damped_newton(sys, s.vector(), opt);
        best_residual = std::min(best_residual, o.residual);
        if (o.converged) found.push_back({UnitQuaternion::normalized(o.q), o.residual, o.iterations, s});
    }
    return found;
}

}  // namespace detail

/**
 * Solves the three loop-closure equations plus the unit-norm equation for the
 * tool orientation. Returns the branch reached from `seed` (default: see
 * default_fk_seed); if that fails, the converged lattice branch nearest the
 * seed. Throws NoSolutionError when nothing converges.
 */
inline FkSolution fk_solve(const MechanismParams& p, const Triple& phi1,
                           std::optional<UnitQuaternion> seed = std::nullopt, const FkOptions& opt = {}) {
    const UnitQuaternion s0 = seed.value_or(default_fk_seed(phi1));
    const detail::ClosureSystem sys(p, phi1);
    const auto first = detail::damped_newton(sys, s0.vector(), opt);
    if (first.converged) return {UnitQuaternion::normalized(first.q), first.residual, first.iterations, s0};

    double best = first.residual;
    auto found = detail::converged_from_lattice(sys, s0, opt, best);
    if (found.empty()) throw NoSolutionError(best);
    std::size_t pick = 0;
    for (std::size_t k = 1; k < found.size(); ++k) {
        if (geodesic_distance(found[k].orientation, s0) < geodesic_distance(found[pick].orientation, s0)) pick = k;
    }
    return found[pick];
}

/// Every distinct assembly mode reachable from the seed and the 24-seed lattice, nearest the seed first.
inline std::vector<FkSolution> fk_all_branches(const MechanismParams& p, const Triple& phi1,
                                               std::optional<UnitQuaternion> seed = std::nullopt,
                                               const FkOptions& opt = {}, double dedup_tolerance = 1e-6) {
    const UnitQuaternion s0 = seed.value_or(default_fk_seed(phi1));
    double best = std::numeric_limits<double>::infinity();
    std::vector<FkSolution> all;
    const detail::ClosureSystem sys(p, phi1);
    const auto first = detail::damped_newton(sys, s0.vector(), opt);
    if (first.converged) all.push_back({UnitQuaternion::normalized(first.q), first.residual, first.iterations, s0});
    auto lattice = detail::converged_from_lattice(sys, s0, opt, best);
    all.insert(all.end(), lattice.begin(), lattice.end());

    std::vector<FkSolution> unique;
    for (const auto& s : all) {
        bool dup = false;
        for (const auto& u : unique) dup = dup || geodesic_distance(u.orientation, s.orientation) < dedup_tolerance;
        if (!dup) unique.push_back(s);
    }
    std::stable_sort(unique.begin(), unique.end(), [&](const FkSolution& a, const FkSolution& b) {
        return geodesic_distance(a.orientation, s0) < geodesic_distance(b.orientation, s0);
    });
    return unique;
}

}  // namespace cdcspm

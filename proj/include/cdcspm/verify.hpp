#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "cdcspm/analysis.hpp"
#include "cdcspm/fk.hpp"
#include "cdcspm/geometry.hpp"
#include "cdcspm/ik.hpp"
#include "cdcspm/transforms.hpp"
#include "cdcspm/workspace.hpp"

namespace cdcspm {

struct PropertyCheck {
    std::string name;
    double max_error = 0.0;
    double tolerance = 0.0;
    std::size_t evaluated = 0;
    bool passed = true;
    nlohmann::json counterexample;  // first failing input, null when passed

    PropertyCheck(std::string check_name, double tol) : name(std::move(check_name)), tolerance(tol) {}

    void record(double err, const nlohmann::json& input) {
        ++evaluated;
        if (!(err <= max_error)) max_error = err;
        if (!(err <= tolerance) && passed) {
            passed = false;
            counterexample = input;
            counterexample["error"] = err;
        }
    }
};

struct VerifyReport {
    std::vector<PropertyCheck> checks;

    bool passed() const {
        for (const auto& c : checks) {
            if (!c.passed) return false;
        }
        return true;
    }
    const PropertyCheck* first_failure() const {
        for (const auto& c : checks) {
            if (!c.passed) return &c;
        }
        return nullptr;
    }
};

namespace detail {

inline nlohmann::json quat_json(const Eigen::Vector4d& q) { return {q[0], q[1], q[2], q[3]}; }
inline nlohmann::json triple_json(const Triple& t) { return {t[0], t[1], t[2]}; }

/// Largest |a - b| / max(|b|, 1e-3 * max|B|) over the entries.
inline double scaled_relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double floor = std::max(1e-3 * b.cwiseAbs().maxCoeff(), 1e-300);
    double e = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            e = std::max(e, std::abs(a(i, j) - b(i, j)) / std::max(std::abs(b(i, j)), floor));
    return e;
}

/// Random orientation with tool-axis tilt up to `max_tilt` and any yaw.
inline UnitQuaternion random_tilted(std::mt19937_64& rng, double max_tilt) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double tilt = max_tilt * std::sqrt(unit(rng));
    const double dir = 2.0 * kPi * unit(rng);
    const double yaw = 2.0 * kPi * unit(rng) - kPi;
    const auto swing = UnitQuaternion::from_axis_angle({-std::sin(dir), std::cos(dir), 0.0}, tilt);
    return swing * yaw_quat(yaw);
}

}  // namespace detail

/// Central-difference derivatives of the constraint residual with respect to pose and motors.
inline std::pair<Eigen::Matrix3d, Eigen::Matrix3d> constraint_jacobians_fd(const MechanismParams& p,
                                                                           const YprAngles& x, const Triple& phi1,
                                                                           double h = 1e-6) {
    Eigen::Matrix3d jx, jq;
    for (int k = 0; k < 3; ++k) {
        YprAngles xp = x, xm = x;
        double* fp = k == 0 ? &xp.yaw : k == 1 ? &xp.pitch : &xp.roll;
        double* fm = k == 0 ? &xm.yaw : k == 1 ? &xm.pitch : &xm.roll;
        *fp += h;
        *fm -= h;
        jx.col(k) = (constraint_residual(p, xp, phi1) - constraint_residual(p, xm, phi1)) / (2.0 * h);
        Triple pp = phi1, pm = phi1;
        pp[static_cast<std::size_t>(k)] += h;
        pm[static_cast<std::size_t>(k)] -= h;
        jq.col(k) = (constraint_residual(p, x, pp) - constraint_residual(p, x, pm)) / (2.0 * h);
    }
    return {jx, jq};
}

/**
 * Self-check of the kinematic invariants on `samples` random inputs per
 * property: orientation algebra, DH closure, FK/IK roundtrips, solver
 * residuals, Jacobians against finite differences and passive-joint closure.
 */
inline VerifyReport run_invariant_suite(const MechanismParams& p, std::size_t samples, std::uint64_t seed) {
    validate(p);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    VerifyReport report;

    {  // quaternion matrix against the axis-angle construction
        PropertyCheck c{"quaternion_matrix_vs_axis_angle", 1e-12};
        for (std::size_t n = 0; n < samples; ++n) {
            Eigen::Vector3d axis(gauss(rng), gauss(rng), gauss(rng));
            axis.normalize();
            const double angle = kPi * sym(rng);
            const Eigen::Matrix3d k = (Eigen::Matrix3d() << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(),
                                       -axis.y(), axis.x(), 0)
                                          .finished();
            const Eigen::Matrix3d rodrigues =
                Eigen::Matrix3d::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
            const auto q = UnitQuaternion::from_axis_angle(axis, angle);
            c.record((quat_to_rotation(q) - rodrigues).cwiseAbs().maxCoeff(), {{"q", detail::quat_json(q.vector())}});
        }
        report.checks.push_back(c);
    }
    {  // ZYX roundtrip away from the gimbal band
        PropertyCheck c{"ypr_roundtrip", 1e-9};
        for (std::size_t n = 0; n < samples; ++n) {
            const YprAngles y{kPi * sym(rng), deg2rad(80.0) * sym(rng), kPi * sym(rng)};
            const auto back = quat_to_ypr(ypr_to_quat(y));
            const double err = std::max({std::abs(wrap_angle(back.yaw - y.yaw)), std::abs(back.pitch - y.pitch),
                                         std::abs(wrap_angle(back.roll - y.roll))});
            c.record(err, {{"ypr", {y.yaw, y.pitch, y.roll}}});
        }
        report.checks.push_back(c);
    }
    {  // home closure of each DH chain
        PropertyCheck c{"dh_home_closure", 1e-9};
        for (std::size_t leg = 0; leg < kLegCount; ++leg) {
            const auto t = chain_base_to_tool(build_dh_table(p, leg), {home_motor_angle(leg), 0.0, 0.0});
            const double err = std::max((t.translation - Eigen::Vector3d(0, 0, p.z_cor)).norm(),
                                        (t.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
            c.record(err, {{"leg", leg + 1}});
        }
        report.checks.push_back(c);
    }

    FeasibilityConfig cfg;
    PropertyCheck orient_roundtrip{"ik_then_fk_roundtrip", 1e-8};
    PropertyCheck closure{"ik_full_chain_closure", 1e-9};
    PropertyCheck motor_roundtrip{"fk_then_ik_roundtrip", 1e-6};
    PropertyCheck residual{"fk_constraint_residuals", 1e-10};
    PropertyCheck jac_fd{"jacobian_vs_finite_difference", 1e-5};
    PropertyCheck decoupling{"jq_decoupling", 1e-12};
    PropertyCheck eq15{"effective_jacobian_identity", 1e-10};

    // Reachable orientations: well inside the workspace.
    std::size_t found = 0;
    for (std::size_t attempts = 0; found < samples && attempts < 50 * samples; ++attempts) {
        const auto q = detail::random_tilted(rng, deg2rad(25.0));
        if (!classify_orientation(p, q, cfg).reachable()) continue;
        ++found;
        const nlohmann::json input{{"q", detail::quat_json(q.vector())}};
        const auto ik = ik_solve(p, q);
        try {
            const auto fk = fk_solve(p, ik.angles.phi1);
            orient_roundtrip.record(geodesic_distance(fk.orientation, q), input);
        } catch (const NoSolutionError& e) {
            orient_roundtrip.record(HUGE_VAL, input);
        }
        const Eigen::Matrix3d r = quat_to_rotation(q);
        double err = 0.0;
        for (std::size_t i = 0; i < kLegCount; ++i) {
            const auto t = chain_base_to_tool(build_dh_table(p, i), ik.angles.leg(i));
            err = std::max(err, (t.rotation - r).cwiseAbs().maxCoeff());
        }
        closure.record(err, input);
    }
    if (found < samples) orient_roundtrip.record(HUGE_VAL, {{"reason", "too few reachable orientations"}});

    // Feasible motor triples: uniform over the torus, filtered by the three-step procedure.
    found = 0;
    for (std::size_t attempts = 0; found < samples && attempts < 200 * samples; ++attempts) {
        const Triple phi{kPi * sym(rng), kPi * sym(rng), kPi * sym(rng)};
        const auto cls = classify_configuration(p, phi, cfg);
        if (!cls.sample) continue;
        ++found;
        const nlohmann::json input{{"phi1", detail::triple_json(phi)}};
        const auto fk = fk_solve(p, phi);
        const auto f = fk_residual(p, fk.orientation.vector(), phi);
        residual.record(f.cwiseAbs().maxCoeff(), input);
        const Triple back = ik_phi1(p, fk.orientation).selected();
        double err = 0.0;
        for (std::size_t i = 0; i < kLegCount; ++i) err = std::max(err, std::abs(wrap_angle(back[i] - phi[i])));
        motor_roundtrip.record(err, input);

        const YprAngles x = quat_to_ypr(fk.orientation);
        const auto b = constraint_jacobians(p, x, phi);
        const auto [jx_fd, jq_fd] = constraint_jacobians_fd(p, x, phi);
        jac_fd.record(std::max(detail::scaled_relative_error(b.jx, jx_fd),
                               detail::scaled_relative_error(b.jq_active, jq_fd)),
                      input);
        Eigen::Matrix3d off = b.jq_active;
        off.diagonal().setZero();
        decoupling.record(off.cwiseAbs().maxCoeff(), input);
        if (b.j_effective) eq15.record((b.jx * *b.j_effective + b.jq_active).cwiseAbs().maxCoeff(), input);
    }
    if (found < samples) motor_roundtrip.record(HUGE_VAL, {{"reason", "too few feasible motor triples"}});

    for (auto* c : {&orient_roundtrip, &closure, &motor_roundtrip, &residual, &jac_fd, &decoupling, &eq15})
        report.checks.push_back(*c);
    return report;
}

}  // namespace cdcspm

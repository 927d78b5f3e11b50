#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cdcspm/fk.hpp"
#include "cdcspm/ik.hpp"
#include "cdcspm/workspace.hpp"
#include "oracles.hpp"

using namespace cdcspm;

namespace {

const MechanismParams kParams = table2_params();

Triple home_phi1() { return {0.0, deg2rad(120.0), deg2rad(-120.0)}; }

/// Motor angles on the straight joint-space line through home towards the IK solution of a 36 deg pitch.
Triple pitch_ray(double s) {
    const Triple home = home_phi1();
    const Triple far = ik_phi1(kParams, ypr_to_quat({0.0, deg2rad(36.0), 0.0})).selected();
    Triple out;
    for (std::size_t i = 0; i < 3; ++i) out[i] = home[i] + s * wrap_angle(far[i] - home[i]);
    return out;
}

}  // namespace

TEST(LegDirection, UnitNormConeAngleAndPeriodicity) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int n = 0; n < 1000; ++n) {
        const double phi = u(rng);
        for (std::size_t leg = 0; leg < kLegCount; ++leg) {
            const auto v = leg_direction_v(kParams, leg, phi);
            EXPECT_NEAR(v.norm(), 1.0, 1e-15);
            EXPECT_NEAR(oracle::angle_between(v, Eigen::Vector3d::UnitZ()), kParams.alpha1, 1e-12);
            EXPECT_LT((leg_direction_v(kParams, leg, phi + 2.0 * kPi) - v).norm(), 1e-12);
        }
    }
}

TEST(LegDirection, VMatchesChainPrefixAxis) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (std::size_t leg = 0; leg < kLegCount; ++leg) {
        const auto table = build_dh_table(kParams, leg);
        for (int n = 0; n < 100; ++n) {
            const double phi = u(rng);
            const Eigen::Vector3d axis = chain_segment(table, {phi, u(rng), u(rng)}, 0, kPassive2Row).rotation.col(2);
            EXPECT_LT((axis - leg_direction_v(kParams, leg, phi)).norm(), 1e-12);
        }
    }
}

TEST(LegDirection, WMatchesChainAtHomeAndAtIkSolutions) {
    for (std::size_t leg = 0; leg < kLegCount; ++leg) {
        const auto table = build_dh_table(kParams, leg);
        const Eigen::Vector3d axis =
            chain_segment(table, {home_motor_angle(leg), 0.0, 0.0}, 0, kPassive3Row).rotation.col(2);
        EXPECT_LT((axis - leg_direction_w_from_tool(kParams, leg, UnitQuaternion::identity())).norm(), 1e-12);
    }
    const auto q = ypr_to_quat({0.4, 0.2, -0.15});
    const auto sol = ik_solve(kParams, q);
    for (std::size_t leg = 0; leg < kLegCount; ++leg) {
        const auto table = build_dh_table(kParams, leg);
        const Eigen::Vector3d axis = chain_segment(table, sol.angles.leg(leg), 0, kPassive3Row).rotation.col(2);
        EXPECT_LT((axis - leg_direction_w_from_tool(kParams, leg, q)).norm(), 1e-9);
    }
}

TEST(LegDirection, WUnitNormAndSignInvariant) {
    std::mt19937_64 rng(3);
    for (int n = 0; n < 1000; ++n) {
        const Eigen::Vector4d q = oracle::random_unit_quaternion(rng);
        for (std::size_t leg = 0; leg < kLegCount; ++leg) {
            const auto w = leg_direction_w_from_tool(kParams, leg, UnitQuaternion::from_vector(q));
            EXPECT_NEAR(w.norm(), 1.0, 1e-12);
            EXPECT_LT((quat_to_rotation(Eigen::Vector4d(-q)) * tool_frame_w(kParams, leg) - w).norm(), 1e-15);
        }
    }
}

TEST(FkResidual, NormComponentIsArithmetic) {
    const auto f = fk_residual(kParams, Eigen::Vector4d(1.1, 0, 0, 0), home_phi1());
    EXPECT_NEAR(f[3], 0.21, 1e-15);
}

TEST(FkResidual, HomeConfigurationFromIk) {
    const Triple phi = ik_phi1(kParams, UnitQuaternion::identity()).selected();
    EXPECT_LT(fk_residual(kParams, Eigen::Vector4d(1, 0, 0, 0), phi).norm(), 1e-10);
}

TEST(FkResidual, JacobianMatchesFiniteDifferences) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (int n = 0; n < 500; ++n) {
        const Triple phi{u(rng), u(rng), u(rng)};
        const Eigen::Vector4d q = oracle::random_unit_quaternion(rng);
        std::function<Eigen::Vector4d(const Eigen::Vector4d&)> f = [&](const Eigen::Vector4d& x) {
            return fk_residual(kParams, x, phi);
        };
        const Eigen::Matrix4d fd = oracle::central_jacobian<4, 4>(f, q, 1e-6);
        EXPECT_LT(oracle::scaled_relative_error(fk_residual_jacobian(kParams, q, phi), fd), 1e-5);
    }
}

TEST(FkSolve, RecoversIdentityFromIk) {
    const Triple phi = ik_phi1(kParams, UnitQuaternion::identity()).selected();
    const auto s = fk_solve(kParams, phi);
    EXPECT_LT(geodesic_distance(s.orientation, UnitQuaternion::identity()), 1e-8);
    EXPECT_LT(s.residual_norm, 1e-10);
}

TEST(FkSolve, SymmetricActuationIsPureYaw) {
    for (double c : {-170.0, -90.0, -30.0, -5.0, 0.0, 2.5, 10.0, 45.0, 120.0, 179.0}) {
        const Triple phi = deg2rad(Triple{c, c + 120.0, c + 240.0});
        const auto s = fk_solve(kParams, phi);
        const auto y = quat_to_ypr(s.orientation);
        EXPECT_LT(std::abs(y.pitch), 1e-8) << c;
        EXPECT_LT(std::abs(y.roll), 1e-8) << c;
        EXPECT_NEAR(wrap_angle(y.yaw - deg2rad(c)), 0.0, 1e-8) << c;
    }
}

TEST(FkSolve, OutputContract) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    const FeasibilityConfig cfg;
    int solved = 0;
    for (int n = 0; n < 3000 && solved < 300; ++n) {
        const Triple phi{u(rng), u(rng), u(rng)};
        if (!collision_check(phi, cfg).pass) continue;
        try {
            const auto s = fk_solve(kParams, phi);
            ++solved;
            const auto f = fk_residual(kParams, s.orientation.vector(), phi);
            EXPECT_LT(f.cwiseAbs().maxCoeff(), 1e-10);
            EXPECT_LT(std::abs(s.orientation.vector().squaredNorm() - 1.0), 1e-10);
            EXPECT_GE(s.orientation.e0(), 0.0);
            EXPECT_LT(s.residual_norm, 1e-10);
        } catch (const NoSolutionError& e) {
            EXPECT_GT(e.best_residual(), 1e-10);
        }
    }
    EXPECT_GT(solved, 100);
}

TEST(FkSolve, RoundtripOnFeasibleTriples) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    const FeasibilityConfig cfg;
    int checked = 0;
    for (int n = 0; n < 20000 && checked < 200; ++n) {
        const Triple phi{u(rng), u(rng), u(rng)};
        if (!classify_configuration(kParams, phi, cfg).sample) continue;
        ++checked;
        const auto back = ik_phi1(kParams, fk_solve(kParams, phi).orientation).selected();
        for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(std::abs(wrap_angle(back[i] - phi[i])), 1e-6);
    }
    EXPECT_EQ(checked, 200);
}

TEST(FkSolve, SeedSelectsBranch) {
    const Triple phi = home_phi1();
    const auto all = fk_all_branches(kParams, phi);
    ASSERT_GE(all.size(), 2u);
    for (const auto& b : all) {
        const auto s = fk_solve(kParams, phi, b.orientation);
        EXPECT_LT(geodesic_distance(s.orientation, b.orientation), 1e-8);
        EXPECT_EQ(s.seed_used.vector(), b.orientation.vector());
    }
}

TEST(FkSolve, AllBranchesAreDistinctSolutions) {
    for (const Triple& phi : {home_phi1(), deg2rad(Triple{10.0, 140.0, 250.0}), pitch_ray(0.5)}) {
        const auto all = fk_all_branches(kParams, phi);
        ASSERT_FALSE(all.empty());
        EXPECT_LT(geodesic_distance(all.front().orientation, fk_solve(kParams, phi).orientation), 1e-8);
        for (std::size_t a = 0; a < all.size(); ++a) {
            EXPECT_LT(fk_residual(kParams, all[a].orientation.vector(), phi).cwiseAbs().maxCoeff(), 1e-10);
            for (std::size_t b = a + 1; b < all.size(); ++b)
                EXPECT_GT(geodesic_distance(all[a].orientation, all[b].orientation), 1e-6);
        }
        // Every lattice seed that converges lands on one of the listed branches.
        for (const auto& g : octahedral_seeds()) {
            try {
                const auto s = fk_solve(kParams, phi, default_fk_seed(phi) * g);
                double nearest = HUGE_VAL;
                for (const auto& b : all) nearest = std::min(nearest, geodesic_distance(b.orientation, s.orientation));
                EXPECT_LT(nearest, 1e-6);
            } catch (const NoSolutionError&) {
            }
        }
    }
}

TEST(FkSolve, OctahedralLatticeIsAGroup) {
    const auto& seeds = octahedral_seeds();
    ASSERT_EQ(seeds.size(), 24u);
    for (const auto& a : seeds) {
        for (const auto& b : seeds) {
            const auto c = a * b;
            double nearest = HUGE_VAL;
            for (const auto& s : seeds) nearest = std::min(nearest, geodesic_distance(s, c));
            EXPECT_LT(nearest, 1e-12);
        }
    }
}

TEST(FkSolve, OctahedralLatticeIsClosedUnderLegSpacing) {
    const auto& seeds = octahedral_seeds();
    const auto rz = UnitQuaternion::from_axis_angle(Eigen::Vector3d::UnitZ(), kLegSpacing);
    for (const auto& g : seeds) {
        const auto c = rz * g * rz.conjugate();
        double nearest = HUGE_VAL;
        for (const auto& s : seeds) nearest = std::min(nearest, geodesic_distance(s, c));
        EXPECT_LT(nearest, 1e-12);
    }
}

TEST(FkSolve, NoSolutionBeyondAssemblyLimit) {
    bool thrown = false;
    for (double s = 1.5; s <= 2.5 && !thrown; s += 0.01) {
        try {
            fk_solve(kParams, pitch_ray(s));
        } catch (const NoSolutionError& e) {
            thrown = true;
            EXPECT_GT(e.best_residual(), 1e-10);
            EXPECT_TRUE(std::isfinite(e.best_residual()));
        }
    }
    EXPECT_TRUE(thrown);
}

TEST(FkSolve, BranchContinuityAlongFeasiblePath) {
    // Straight joint-space path from home to the IK solution of a tilted pose, at 0.5 deg steps.
    const Triple start = home_phi1();
    const Triple end = ik_phi1(kParams, ypr_to_quat({0.3, deg2rad(18.0), deg2rad(-12.0)})).selected();
    double span = 0.0;
    for (std::size_t i = 0; i < 3; ++i) span = std::max(span, std::abs(wrap_angle(end[i] - start[i])));
    const int steps = static_cast<int>(std::ceil(span / deg2rad(0.5)));
    const FeasibilityConfig cfg;
    std::optional<UnitQuaternion> prev;
    for (int k = 0; k <= steps; ++k) {
        Triple phi;
        for (std::size_t i = 0; i < 3; ++i) phi[i] = start[i] + wrap_angle(end[i] - start[i]) * k / steps;
        ASSERT_EQ(classify_configuration(kParams, phi, cfg).verdict.status, FeasibilityStatus::feasible) << k;
        const auto s = fk_solve(kParams, phi, prev);
        if (prev) {
            EXPECT_LE(geodesic_distance(*prev, s.orientation), deg2rad(5.0)) << k;
        }
        prev = s.orientation;
    }
}

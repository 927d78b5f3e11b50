#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cdcspm/geometry.hpp"
#include "cdcspm/transforms.hpp"
#include "oracles.hpp"

using namespace cdcspm;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

HomTransform random_transform(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    const auto q = UnitQuaternion::from_vector(oracle::random_unit_quaternion(rng));
    return {quat_to_rotation(q), Eigen::Vector3d(100 * g(rng), 100 * g(rng), 100 * g(rng))};
}

}  // namespace

TEST(DhTransform, ZeroRowIsIdentity) {
    const auto t = dh_transform(DHRow{});
    EXPECT_EQ(t.matrix(), Eigen::Matrix4d::Identity());
}

TEST(DhTransform, QuarterTurnAboutZ) {
    const auto t = dh_transform(DHRow{kPi / 2.0, 0.0, 0.0, 0.0, JointTag::fixed});
    Eigen::Matrix3d expected;
    expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    EXPECT_LT(max_abs(t.rotation - expected), 1e-15);
    EXPECT_EQ(t.translation, Eigen::Vector3d::Zero());
}

TEST(DhTransform, CentreRowMatchesHandComposedProduct) {
    const auto p = table2_params();
    const auto row = build_dh_table(p, 0).rows[8];
    EXPECT_DOUBLE_EQ(row.a, -p.r2);
    EXPECT_LT(max_abs(dh_transform(row).matrix() - oracle::dh(kPi / 2.0, 0.0, -p.r2, 0.0)), 1e-14);
}

TEST(DhTransform, AllRowsMatchOracleWithJointValues) {
    const auto p = table2_params();
    const auto table = build_dh_table(p, 2);
    const LegAngles q{0.3, -0.7, 1.1};
    Eigen::Matrix4d chain = Eigen::Matrix4d::Identity();
    for (const auto& row : table.rows) {
        const double joint = joint_value_for(row, q).value_or(0.0);
        const Eigen::Matrix4d m = oracle::dh(row.theta + joint, row.d, row.a, row.alpha);
        EXPECT_LT(max_abs(dh_transform(row, joint_value_for(row, q)).matrix() - m), 1e-14);
        chain = chain * m;
    }
    EXPECT_LT(max_abs(chain_base_to_tool(table, q).matrix() - chain), 1e-11);
}

TEST(DhTransform, JointSlotContract) {
    const DHRow joint{0.0, 0.0, 1.0, 0.0, JointTag::active};
    const DHRow fixed{0.0, 0.0, 1.0, 0.0, JointTag::fixed};
    EXPECT_THROW(dh_transform(joint), ContractViolation);
    EXPECT_THROW(dh_transform(fixed, 0.5), ContractViolation);
    EXPECT_NO_THROW(dh_transform(joint, 0.5));
    EXPECT_THROW(chain_segment(build_dh_table(table2_params(), 0), {}, 3, 11), ContractViolation);
}

TEST(InvertTransform, Examples) {
    EXPECT_EQ(invert_transform(HomTransform::identity()).matrix(), Eigen::Matrix4d::Identity());
    HomTransform t;
    t.translation = {1, 2, 3};
    EXPECT_EQ(invert_transform(t).translation, Eigen::Vector3d(-1, -2, -3));
    std::mt19937_64 rng(3);
    for (int n = 0; n < 1000; ++n) {
        const auto r = random_transform(rng);
        EXPECT_LT(max_abs((r * invert_transform(r)).matrix() - Eigen::Matrix4d::Identity()), 1e-12);
        EXPECT_LT(max_abs((invert_transform(r) * r).matrix() - Eigen::Matrix4d::Identity()), 1e-12);
    }
}

TEST(InvertTransform, ChainTimesInverseIsIdentity) {
    const auto table = build_dh_table(table2_params(), 1);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (int n = 0; n < 100; ++n) {
        const auto t = chain_base_to_tool(table, {u(rng), u(rng), u(rng)});
        EXPECT_LT(max_abs((t * invert_transform(t)).matrix() - Eigen::Matrix4d::Identity()), 1e-12);
    }
}

TEST(Quaternion, Examples) {
    EXPECT_EQ(quat_to_rotation(UnitQuaternion::identity()), Eigen::Matrix3d::Identity());
    const Eigen::Matrix3d half_z = quat_to_rotation(Eigen::Vector4d(0, 0, 0, 1));
    EXPECT_EQ(half_z, Eigen::Vector3d(-1, -1, 1).asDiagonal().toDenseMatrix());
}

TEST(Quaternion, MatchesRodrigues) {
    std::mt19937_64 rng(17);
    for (int n = 0; n < 10000; ++n) {
        const Eigen::Vector4d q = oracle::random_unit_quaternion(rng);
        const auto [axis, angle] = oracle::quat_axis_angle(q);
        EXPECT_LT(max_abs(quat_to_rotation(q) - oracle::rodrigues(axis, angle)), 1e-12);
    }
}

TEST(Quaternion, NormContract) {
    EXPECT_THROW(quat_to_rotation(Eigen::Vector4d(1.1, 0, 0, 0)), InvalidQuaternionError);
    EXPECT_THROW(UnitQuaternion::from_vector({0.5, 0.5, 0.5, 0.4}), InvalidQuaternionError);
    EXPECT_THROW(UnitQuaternion::from_vector({std::nan(""), 0, 0, 0}), InvalidQuaternionError);
    EXPECT_NO_THROW(UnitQuaternion::from_vector({1.0 + 5e-7, 0, 0, 0}));
    try {
        quat_to_rotation(Eigen::Vector4d(2, 0, 0, 0));
        FAIL();
    } catch (const InvalidQuaternionError& e) {
        EXPECT_DOUBLE_EQ(e.norm(), 2.0);
    }
}

TEST(Quaternion, CanonicalSignAndSignInvariance) {
    std::mt19937_64 rng(19);
    for (int n = 0; n < 1000; ++n) {
        const Eigen::Vector4d q = oracle::random_unit_quaternion(rng);
        const auto a = UnitQuaternion::from_vector(q);
        const auto b = UnitQuaternion::from_vector(-q);
        EXPECT_EQ(a.vector(), b.vector());
        EXPECT_GE(a.e0(), 0.0);
        EXPECT_LT(max_abs(quat_to_rotation(q) - quat_to_rotation(Eigen::Vector4d(-q))), 1e-15);
    }
    const auto z = UnitQuaternion::from_components(0.0, 0.0, -1.0, 0.0);
    EXPECT_EQ(z.vector(), Eigen::Vector4d(0, 0, 1, 0));
    const auto w = UnitQuaternion::from_components(0.0, -0.6, 0.8, 0.0);
    EXPECT_EQ(w.vector(), Eigen::Vector4d(0, 0.6, -0.8, 0));
}

TEST(Quaternion, RotationsAreProper) {
    std::mt19937_64 rng(23);
    for (int n = 0; n < 1000; ++n) {
        const Eigen::Matrix3d r = quat_to_rotation(oracle::random_unit_quaternion(rng));
        EXPECT_LT(max_abs(r.transpose() * r - Eigen::Matrix3d::Identity()), 1e-9);
        EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
    }
}

TEST(Quaternion, ProductComposesRotations) {
    std::mt19937_64 rng(29);
    for (int n = 0; n < 200; ++n) {
        const auto a = UnitQuaternion::from_vector(oracle::random_unit_quaternion(rng));
        const auto b = UnitQuaternion::from_vector(oracle::random_unit_quaternion(rng));
        EXPECT_LT(max_abs(quat_to_rotation(a * b) - quat_to_rotation(a) * quat_to_rotation(b)), 1e-12);
        EXPECT_LT(max_abs(quat_to_rotation(a.conjugate()) - quat_to_rotation(a).transpose()), 1e-12);
    }
}

TEST(Quaternion, RotationToQuatRoundtrip) {
    std::mt19937_64 rng(31);
    for (int n = 0; n < 1000; ++n) {
        const auto q = UnitQuaternion::from_vector(oracle::random_unit_quaternion(rng));
        const auto back = rotation_to_quat(quat_to_rotation(q));
        EXPECT_LT((back.vector() - q.vector()).norm(), 1e-12);
    }
}

TEST(Quaternion, GeodesicDistance) {
    const auto a = UnitQuaternion::from_axis_angle(Eigen::Vector3d::UnitX(), 0.3);
    const auto b = UnitQuaternion::from_axis_angle(Eigen::Vector3d::UnitX(), -0.5);
    EXPECT_NEAR(geodesic_distance(a, b), 0.8, 1e-14);
    EXPECT_EQ(geodesic_distance(a, a), 0.0);
    const auto c = UnitQuaternion::from_axis_angle(Eigen::Vector3d::UnitY(), 1e-10);
    EXPECT_NEAR(geodesic_distance(UnitQuaternion::identity(), c), 1e-10, 1e-20);
    std::mt19937_64 rng(37);
    for (int n = 0; n < 200; ++n) {
        const Eigen::Vector4d p = oracle::random_unit_quaternion(rng), q = oracle::random_unit_quaternion(rng);
        EXPECT_NEAR(geodesic_distance(UnitQuaternion::from_vector(p), UnitQuaternion::from_vector(q)),
                    oracle::rotation_distance(quat_to_rotation(p), quat_to_rotation(q)), 1e-9);
    }
}

TEST(Ypr, Examples) {
    EXPECT_EQ(ypr_to_quat({0, 0, 0}).vector(), Eigen::Vector4d(1, 0, 0, 0));
    const auto q = ypr_to_quat({kPi / 2.0, 0.0, 0.0});
    EXPECT_LT((q.vector() - Eigen::Vector4d(std::sqrt(0.5), 0, 0, std::sqrt(0.5))).norm(), 1e-15);
}

TEST(Ypr, MatchesDirectZyxProduct) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int n = 0; n < 1000; ++n) {
        const YprAngles y{kPi * u(rng), 1.5 * u(rng), kPi * u(rng)};
        const Eigen::Matrix3d direct = oracle::zyx(y.yaw, y.pitch, y.roll);
        EXPECT_LT(max_abs(quat_to_rotation(ypr_to_quat(y)) - direct), 1e-12);
        EXPECT_LT(max_abs(ypr_to_rotation(y) - direct), 1e-12);
    }
}

TEST(Ypr, RoundtripAwayFromGimbal) {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int n = 0; n < 10000; ++n) {
        const YprAngles y{kPi * u(rng), deg2rad(80.0) * u(rng), kPi * u(rng)};
        const auto back = quat_to_ypr(ypr_to_quat(y));
        EXPECT_LT(std::abs(wrap_angle(back.yaw - y.yaw)), 1e-9);
        EXPECT_LT(std::abs(back.pitch - y.pitch), 1e-9);
        EXPECT_LT(std::abs(wrap_angle(back.roll - y.roll)), 1e-9);
    }
}

TEST(Ypr, GimbalBandRaises) {
    for (double pitch : {kPi / 2.0, -kPi / 2.0, kPi / 2.0 - 1e-7, -kPi / 2.0 + 5e-7}) {
        EXPECT_THROW(quat_to_ypr(ypr_to_quat({0.4, pitch, -0.2})), GimbalProximityError) << pitch;
    }
    EXPECT_NO_THROW(quat_to_ypr(ypr_to_quat({0.4, kPi / 2.0 - 1e-3, -0.2})));
    try {
        quat_to_ypr(ypr_to_quat({0.0, kPi / 2.0, 0.0}));
    } catch (const GimbalProximityError& e) {
        EXPECT_NEAR(e.pitch(), kPi / 2.0, 1e-6);
    }
}

TEST(Angles, Wrapping) {
    EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
    EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
    EXPECT_NEAR(wrap_angle(3.0 * kPi / 2.0), -kPi / 2.0, 1e-15);
    EXPECT_NEAR(wrap_angle(deg2rad(350.0)), deg2rad(-10.0), 1e-15);
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int n = 0; n < 1000; ++n) {
        const double a = u(rng);
        const double w = wrap_angle(a);
        EXPECT_GT(w, -kPi);
        EXPECT_LE(w, kPi);
        EXPECT_NEAR(std::remainder(a - w, 2.0 * kPi), 0.0, 1e-12);
    }
}

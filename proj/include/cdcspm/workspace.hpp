#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "cdcspm/analysis.hpp"
#include "cdcspm/angles.hpp"
#include "cdcspm/errors.hpp"
#include "cdcspm/fk.hpp"
#include "cdcspm/geometry.hpp"
#include "cdcspm/ik.hpp"
#include "cdcspm/transforms.hpp"

namespace cdcspm {

struct FeasibilityConfig {
    double collision_min_separation = deg2rad(38.0);
    double cn_min = 0.2;
    CnMetric cn_metric = CnMetric::inv2norm;
    double grid_step = deg2rad(5.0);
    double gimbal_limit = deg2rad(89.9);  // |pitch| above this is an invalid YPR
    double branch_tolerance = 1e-6;       // working-mode check on phi1, rad
    FkOptions fk;
};

inline void validate(const FeasibilityConfig& cfg) {
    if (!(cfg.collision_min_separation > 0.0 && cfg.collision_min_separation < deg2rad(120.0)))
        throw ContractViolation("collision separation must lie in (0, 120) degrees");
    if (!(cfg.cn_min >= 0.0 && cfg.cn_min < 1.0)) throw ContractViolation("cn_min must lie in [0, 1)");
    if (!(cfg.grid_step > 0.0)) throw ContractViolation("grid step must be positive");
}

// ---------------------------------------------------------------------------
// Step 1: self-collision pre-filter

/// Separations within this much of the threshold count as meeting it (grid values land exactly on it).
inline constexpr double kSeparationSlack = 1e-9;

struct CollisionResult {
    bool pass = true;
    std::optional<std::pair<std::size_t, std::size_t>> offending_pair;  // 0-based legs
    double separation = 0.0;  // |wrapped difference| of the offending (or closest) pair
};

/// Rejects when the wrapped difference of any two motor angles is below the threshold.
inline CollisionResult collision_check(const Triple& phi1, const FeasibilityConfig& cfg) {
    CollisionResult r;
    r.separation = kPi;
    for (std::size_t i = 0; i < kLegCount; ++i) {
        for (std::size_t j = i + 1; j < kLegCount; ++j) {
            const double sep = std::abs(wrap_angle(phi1[i] - phi1[j]));
            if (sep < cfg.collision_min_separation - kSeparationSlack) {
                if (r.pass) {
                    r.pass = false;
                    r.offending_pair = std::make_pair(i, j);
                    r.separation = sep;
                }
            } else if (r.pass) {
                r.separation = std::min(r.separation, sep);
            }
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Three-step classification

enum class FeasibilityStatus { feasible, collision_rejected, fk_failed, near_singular };

inline constexpr std::size_t kStatusCount = 4;

inline std::string to_string(FeasibilityStatus s) {
    switch (s) {
        case FeasibilityStatus::feasible: return "feasible";
        case FeasibilityStatus::collision_rejected: return "collision_rejected";
        case FeasibilityStatus::fk_failed: return "fk_failed";
        case FeasibilityStatus::near_singular: return "near_singular";
    }
    return "feasible";
}

struct CollisionDetail {
    std::size_t leg_a = 0;
    std::size_t leg_b = 0;
    double separation = 0.0;
};

struct FkFailureDetail {
    std::string reason;
    double residual = 0.0;
};

struct ConditionDetail {
    double value = 0.0;
    SingularityClass singularity_class = SingularityClass::none;
};

struct FeasibilityVerdict {
    FeasibilityStatus status = FeasibilityStatus::feasible;
    std::variant<std::monostate, CollisionDetail, FkFailureDetail, ConditionDetail> detail;
};

struct WorkspaceSample {
    Triple phi1{};
    YprAngles orientation;
    double inv_cond = 0.0;
};

/// Stage instrumentation; a caller-owned counter block.
struct StageCounters {
    std::size_t collision_checks = 0;
    std::size_t fk_calls = 0;
    std::size_t jacobian_calls = 0;

    StageCounters& operator+=(const StageCounters& o) {
        collision_checks += o.collision_checks;
        fk_calls += o.fk_calls;
        jacobian_calls += o.jacobian_calls;
        return *this;
    }
};

struct ClassifyResult {
    FeasibilityVerdict verdict;
    std::optional<WorkspaceSample> sample;  // present only when feasible
    std::optional<UnitQuaternion> orientation;  // FK result when step 2 converged
};

namespace detail {
inline ClassifyResult fail_fk(std::string reason, double residual) {
    ClassifyResult r;
    r.verdict.status = FeasibilityStatus::fk_failed;
    r.verdict.detail = FkFailureDetail{std::move(reason), residual};
    return r;
}
}  // namespace detail

/**
 * Collision filter, then forward kinematics with YPR extraction, then the
 * conditioning test. Later stages run only when earlier ones pass.
 */
inline ClassifyResult classify_configuration(const MechanismParams& p, const Triple& phi1_in,
                                             const FeasibilityConfig& cfg, StageCounters* counters = nullptr,
                                             std::optional<UnitQuaternion> seed = std::nullopt) {
    const Triple phi1 = wrap_triple(phi1_in);
    ClassifyResult out;

    if (counters) ++counters->collision_checks;
    const auto col = collision_check(phi1, cfg);
    if (!col.pass) {
        out.verdict.status = FeasibilityStatus::collision_rejected;
        out.verdict.detail = CollisionDetail{col.offending_pair->first, col.offending_pair->second, col.separation};
        return out;
    }

    if (counters) ++counters->fk_calls;
    FkSolution fk;
    try {
        fk = fk_solve(p, phi1, seed, cfg.fk);
    } catch (const NoSolutionError& e) {
        return detail::fail_fk("no convergence", e.best_residual());
    }
    YprAngles ypr;
    try {
        ypr = quat_to_ypr(fk.orientation);
    } catch (const GimbalProximityError&) {
        return detail::fail_fk("gimbal band", fk.residual_norm);
    }
    if (std::abs(ypr.pitch) > cfg.gimbal_limit) return detail::fail_fk("gimbal band", fk.residual_norm);
    try {
        const Triple back = ik_phi1(p, fk.orientation).selected();
        for (std::size_t i = 0; i < kLegCount; ++i) {
            if (std::abs(wrap_angle(back[i] - phi1[i])) > cfg.branch_tolerance)
                return detail::fail_fk("non-working assembly mode", fk.residual_norm);
        }
    } catch (const UnreachableOrientationError&) {
        return detail::fail_fk("non-working assembly mode", fk.residual_norm);
    }
    out.orientation = fk.orientation;

    if (counters) ++counters->jacobian_calls;
    const auto bundle = constraint_jacobians(p, ypr, phi1);
    const auto report = manipulability(bundle, cfg.cn_min, cfg.cn_metric);
    if (!report.well_conditioned) {
        out.verdict.status = FeasibilityStatus::near_singular;
        out.verdict.detail = ConditionDetail{report.metric_value, report.singularity_class};
        return out;
    }
    out.verdict.status = FeasibilityStatus::feasible;
    out.verdict.detail = ConditionDetail{report.metric_value, report.singularity_class};
    out.sample = WorkspaceSample{phi1, ypr, report.inv_cond_2norm};
    return out;
}

// ---------------------------------------------------------------------------
// Joint-space sweep

struct SweepResult {
    std::vector<WorkspaceSample> samples;  // lexicographic grid order
    std::array<std::size_t, kStatusCount> counts{};
    std::size_t total = 0;
    StageCounters counters;

    std::size_t count(FeasibilityStatus s) const { return counts[static_cast<std::size_t>(s)]; }
    double feasible_fraction() const {
        return total ? static_cast<double>(count(FeasibilityStatus::feasible)) / static_cast<double>(total) : 0.0;
    }
    double collision_pass_fraction() const {
        return total ? 1.0 - static_cast<double>(count(FeasibilityStatus::collision_rejected)) /
                                 static_cast<double>(total)
                     : 0.0;
    }
};

/// Number of grid points per axis; throws unless the step divides 360 degrees.
inline std::size_t grid_points_per_axis(double step) {
    const double n = 2.0 * kPi / step;
    const double rounded = std::round(n);
    if (!(step > 0.0) || rounded < 1.0 || std::abs(n - rounded) > 1e-6)
        throw ContractViolation("grid step must divide 360 degrees");
    return static_cast<std::size_t>(rounded);
}

/// Grid value k (k * step) as a wrapped angle.
inline double grid_angle(std::size_t k, double step) { return wrap_angle(static_cast<double>(k) * step); }

/**
 * Classifies every triple of the (360/step)^3 motor grid. Work is split by the
 * first motor's grid index; results are concatenated in grid order, so the
 * output does not depend on `jobs`.
 */
inline SweepResult sweep_joint_space(const MechanismParams& p, const FeasibilityConfig& cfg, unsigned jobs = 1) {
    validate(p);
    validate(cfg);
    const std::size_t n = grid_points_per_axis(cfg.grid_step);

    struct Block {
        std::vector<WorkspaceSample> samples;
        std::array<std::size_t, kStatusCount> counts{};
        StageCounters counters;
    };
    std::vector<Block> blocks(n);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            Block& b = blocks[i];
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = 0; k < n; ++k) {
                    const Triple phi{grid_angle(i, cfg.grid_step), grid_angle(j, cfg.grid_step),
                                     grid_angle(k, cfg.grid_step)};
                    auto r = classify_configuration(p, phi, cfg, &b.counters);
                    ++b.counts[static_cast<std::size_t>(r.verdict.status)];
                    if (r.sample) b.samples.push_back(*r.sample);
                }
            }
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    SweepResult out;
    out.total = n * n * n;
    for (auto& b : blocks) {
        out.samples.insert(out.samples.end(), b.samples.begin(), b.samples.end());
        for (std::size_t s = 0; s < kStatusCount; ++s) out.counts[s] += b.counts[s];
        out.counters += b.counters;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Task-cone coverage

struct TaskCone {
    double useful = deg2rad(35.0);
    double safety_min = deg2rad(60.0);
    double safety_max = deg2rad(75.0);
    double resolution = deg2rad(2.0);
};

/// Outcome for one target orientation.
struct OrientationOutcome {
    bool ik_solvable = false;
    std::optional<std::size_t> unreachable_leg;
    std::optional<FeasibilityVerdict> verdict;

    bool reachable() const { return verdict && verdict->status == FeasibilityStatus::feasible; }
};

/// IK for q, then the three-step filter on the resulting motor angles with FK seeded at q.
inline OrientationOutcome classify_orientation(const MechanismParams& p, const UnitQuaternion& q,
                                               const FeasibilityConfig& cfg, StageCounters* counters = nullptr) {
    OrientationOutcome out;
    Triple phi1;
    try {
        phi1 = ik_phi1(p, q).selected();
    } catch (const UnreachableOrientationError& e) {
        out.unreachable_leg = e.leg();
        return out;
    }
    out.ik_solvable = true;
    auto r = classify_configuration(p, phi1, cfg, counters, q);
    if (r.orientation && geodesic_distance(*r.orientation, q) > 1e-8) {
        r.verdict.status = FeasibilityStatus::fk_failed;
        r.verdict.detail = FkFailureDetail{"different assembly mode", 0.0};
    }
    out.verdict = r.verdict;
    return out;
}

struct CoverageCount {
    std::size_t sampled = 0;
    std::size_t reachable = 0;

    double fraction() const { return sampled ? static_cast<double>(reachable) / static_cast<double>(sampled) : 0.0; }
};

struct YawCoverage {
    double yaw = 0.0;
    CoverageCount useful;
};

struct CoverageReport {
    CoverageCount useful_at_zero_yaw;      // tilt <= useful cone, yaw = 0
    CoverageCount safety_at_zero_yaw;      // tilt in the safety band, yaw = 0
    CoverageCount yaw_sweep_zero_tilt;     // yaw over [-180, 180), tilt = 0
    std::vector<YawCoverage> useful_by_yaw;
    CoverageCount useful_all_yaws;
};

/// Tool-axis tilt of the ZYX pose (yaw, pitch, roll); independent of yaw.
inline double tool_tilt(double pitch, double roll) {
    return std::acos(std::clamp(std::cos(pitch) * std::cos(roll), -1.0, 1.0));
}

/// Orientations on a pitch/roll grid of the given resolution whose tilt lies in [min_tilt, max_tilt].
inline std::vector<YprAngles> cone_samples(double yaw, double min_tilt, double max_tilt, double resolution) {
    const auto steps = static_cast<std::size_t>(std::floor(2.0 * max_tilt / resolution + 1e-9));
    std::vector<YprAngles> out;
    for (std::size_t a = 0; a <= steps; ++a) {
        const double pitch = -max_tilt + static_cast<double>(a) * resolution;
        for (std::size_t b = 0; b <= steps; ++b) {
            const double roll = -max_tilt + static_cast<double>(b) * resolution;
            const double tilt = tool_tilt(pitch, roll);
            if (tilt <= max_tilt + 1e-9 && tilt >= min_tilt - 1e-9) out.push_back({yaw, pitch, roll});
        }
    }
    return out;
}

inline CoverageCount coverage_of(const MechanismParams& p, const FeasibilityConfig& cfg,
                                 const std::vector<YprAngles>& poses) {
    CoverageCount c;
    for (const auto& y : poses) {
        ++c.sampled;
        if (classify_orientation(p, ypr_to_quat(y), cfg).reachable()) ++c.reachable;
    }
    return c;
}

inline CoverageReport task_cone_coverage(const MechanismParams& p, const FeasibilityConfig& cfg,
                                         const TaskCone& cone = {}, const std::vector<double>& yaws = {0.0}) {
    validate(p);
    validate(cfg);
    for (double a : {cone.useful, cone.safety_min, cone.safety_max}) {
        if (!(a > 0.0 && a < kPi / 2.0)) throw ContractViolation("cone angles must lie in (0, 90) degrees");
    }
    CoverageReport r;
    r.useful_at_zero_yaw = coverage_of(p, cfg, cone_samples(0.0, 0.0, cone.useful, cone.resolution));
    r.safety_at_zero_yaw = coverage_of(p, cfg, cone_samples(0.0, cone.safety_min, cone.safety_max, cone.resolution));

    std::vector<YprAngles> yaw_poses;
    const auto yaw_steps = static_cast<std::size_t>(std::round(2.0 * kPi / cone.resolution));
    for (std::size_t k = 0; k < yaw_steps; ++k)
        yaw_poses.push_back({-kPi + static_cast<double>(k) * cone.resolution, 0.0, 0.0});
    r.yaw_sweep_zero_tilt = coverage_of(p, cfg, yaw_poses);

    for (double yaw : yaws) {
        const auto c = coverage_of(p, cfg, cone_samples(yaw, 0.0, cone.useful, cone.resolution));
        r.useful_by_yaw.push_back({yaw, c});
        r.useful_all_yaws.sampled += c.sampled;
        r.useful_all_yaws.reachable += c.reachable;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Export

inline constexpr const char* kWorkspaceCsvHeader = "phi11,phi12,phi13,yaw,pitch,roll,inv_cond,status";

/// Six-decimal fixed formatting without a negative zero.
inline std::string format_fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    if (s == "-0.000000") s = "0.000000";
    return s;
}

inline void write_workspace_csv(std::ostream& os, const std::vector<WorkspaceSample>& samples) {
    os << kWorkspaceCsvHeader << '\n';
    for (const auto& s : samples) {
        os << format_fixed6(rad2deg(s.phi1[0])) << ',' << format_fixed6(rad2deg(s.phi1[1])) << ','
           << format_fixed6(rad2deg(s.phi1[2])) << ',' << format_fixed6(rad2deg(s.orientation.yaw)) << ','
           << format_fixed6(rad2deg(s.orientation.pitch)) << ',' << format_fixed6(rad2deg(s.orientation.roll)) << ','
           << format_fixed6(s.inv_cond) << ",feasible\n";
    }
}

}  // namespace cdcspm

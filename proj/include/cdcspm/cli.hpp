#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cdcspm/analysis.hpp"
#include "cdcspm/fk.hpp"
#include "cdcspm/geometry.hpp"
#include "cdcspm/ik.hpp"
#include "cdcspm/params_io.hpp"
#include "cdcspm/transforms.hpp"
#include "cdcspm/verify.hpp"
#include "cdcspm/workspace.hpp"

namespace cdcspm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitVerificationFailed = 3;

inline constexpr const char* kEnvPrefix = "CDCSPM_";

using ojson = nlohmann::ordered_json;

/// Options shared by all commands; every flag can also be set through CDCSPM_<FLAG>.
struct RunConfig {
    std::string params_path;  // empty: built-in prototype parameters
    double step_deg = 5.0;
    double cn_min = 0.2;
    std::string cn_metric = "inv2norm";
    double collision_sep_deg = 38.0;
    std::string out_dir = ".";
    bool json = false;
    unsigned jobs = 1;
    std::uint64_t seed = 1;
    bool force = false;
    bool passive = false;
    bool all_branches = false;
    bool check_fd = false;
};

/// Raised for malformed user input; maps to exit code 1.
class InputError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline std::string fixed(double v, int precision = 9) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    std::string s(buf);
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
    return s;
}

inline std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

inline ojson finite_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

inline ojson matrix_json(const Eigen::Matrix3d& m) {
    ojson rows = ojson::array();
    for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
    return rows;
}

inline void print_matrix(std::ostream& out, const std::string& name, const Eigen::Matrix3d& m) {
    out << name << '\n';
    for (int i = 0; i < 3; ++i)
        out << "  " << fixed(m(i, 0)) << "  " << fixed(m(i, 1)) << "  " << fixed(m(i, 2)) << '\n';
}

inline CnMetric parse_metric(const std::string& s) {
    if (s == "inv2norm") return CnMetric::inv2norm;
    if (s == "frobenius") return CnMetric::frobenius;
    throw InputError("unknown --cn-metric '" + s + "' (expected inv2norm or frobenius)");
}

inline FeasibilityConfig feasibility_config(const RunConfig& rc) {
    FeasibilityConfig cfg;
    cfg.collision_min_separation = deg2rad(rc.collision_sep_deg);
    cfg.cn_min = rc.cn_min;
    cfg.cn_metric = parse_metric(rc.cn_metric);
    cfg.grid_step = deg2rad(rc.step_deg);
    try {
        validate(cfg);
        grid_points_per_axis(cfg.grid_step);
    } catch (const ContractViolation& e) {
        throw InputError(e.what());
    }
    return cfg;
}

inline MechanismParams resolve_params(const RunConfig& rc) {
    if (rc.params_path.empty()) return table2_params();
    return load_params(rc.params_path);
}

inline ojson ypr_json(const UnitQuaternion& q) {
    try {
        const auto y = quat_to_ypr(q);
        return {rad2deg(y.yaw), rad2deg(y.pitch), rad2deg(y.roll)};
    } catch (const GimbalProximityError&) {
        return nullptr;
    }
}

inline ojson config_json(const RunConfig& rc) {
    return {{"params", rc.params_path.empty() ? ojson(nullptr) : ojson(rc.params_path)},
            {"step_deg", rc.step_deg},
            {"cn_min", rc.cn_min},
            {"cn_metric", rc.cn_metric},
            {"collision_sep_deg", rc.collision_sep_deg},
            {"seed", rc.seed}};
}

inline UnitQuaternion orientation_input(const std::vector<double>& ypr, const std::vector<double>& quat,
                                        std::vector<std::string>& warnings) {
    if (ypr.empty() == quat.empty()) throw InputError("give exactly one of --ypr or --quat");
    if (!ypr.empty()) {
        if (std::abs(ypr[1]) > 85.0)
            warnings.push_back("pitch " + fixed(ypr[1], 3) + " deg is within 5 deg of the ZYX gimbal singularity");
        return ypr_to_quat({deg2rad(ypr[0]), deg2rad(ypr[1]), deg2rad(ypr[2])});
    }
    const auto q = UnitQuaternion::from_vector({quat[0], quat[1], quat[2], quat[3]});
    const Eigen::Matrix3d r = quat_to_rotation(q);
    if (std::abs(r(2, 0)) > std::sin(deg2rad(85.0)))
        warnings.push_back("orientation is within 5 deg of the ZYX gimbal singularity");
    return q;
}

// ---------------------------------------------------------------------------

inline int cmd_fk(const RunConfig& rc, const std::vector<double>& phi_deg, std::ostream& out, std::ostream& err) {
    const auto p = resolve_params(rc);
    const auto cfg = feasibility_config(rc);
    const Triple phi1 = deg2rad(Triple{phi_deg[0], phi_deg[1], phi_deg[2]});

    if (!rc.force) {
        const auto col = collision_check(wrap_triple(phi1), cfg);
        if (!col.pass) {
            err << "error: self-collision between legs " << col.offending_pair->first + 1 << " and "
                << col.offending_pair->second + 1 << " (separation " << fixed(rad2deg(col.separation), 3)
                << " deg < " << fixed(rc.collision_sep_deg, 3) << " deg); use --force to solve anyway\n";
            return kExitInfeasible;
        }
    }

    std::vector<FkSolution> solutions;
    if (rc.all_branches) {
        solutions = fk_all_branches(p, phi1);
        if (solutions.empty()) {
            err << "error: forward kinematics found no assembly mode\n";
            return kExitInfeasible;
        }
    } else {
        solutions.push_back(fk_solve(p, phi1));
    }

    if (rc.json) {
        ojson sols = ojson::array();
        for (const auto& s : solutions) {
            const auto& q = s.orientation.vector();
            sols.push_back({{"quaternion", {q[0], q[1], q[2], q[3]}},
                            {"ypr_deg", ypr_json(s.orientation)},
                            {"residual", s.residual_norm},
                            {"iterations", s.iterations}});
        }
        out << ojson{{"command", "fk"},
                     {"phi1_deg", {phi_deg[0], phi_deg[1], phi_deg[2]}},
                     {"solutions", sols}}
                   .dump(2)
            << '\n';
        return kExitOk;
    }
    for (std::size_t k = 0; k < solutions.size(); ++k) {
        const auto& s = solutions[k];
        if (solutions.size() > 1) out << "branch " << k + 1 << '\n';
        const auto& q = s.orientation.vector();
        out << "quaternion  " << fixed(q[0]) << ' ' << fixed(q[1]) << ' ' << fixed(q[2]) << ' ' << fixed(q[3])
            << '\n';
        const auto y = ypr_json(s.orientation);
        if (y.is_null()) {
            out << "ypr_deg     undefined (gimbal band)\n";
        } else {
            out << "ypr_deg     " << fixed(y[0].get<double>(), 6) << ' ' << fixed(y[1].get<double>(), 6) << ' '
                << fixed(y[2].get<double>(), 6) << '\n';
        }
        out << "residual    " << sci(s.residual_norm) << '\n';
        out << "iterations  " << s.iterations << '\n';
    }
    return kExitOk;
}

struct IkRequest {
    std::vector<double> ypr;
    std::vector<double> quat;
    std::vector<int> alternate_legs;  // 1-based
    std::string trajectory;
};

inline BranchSelection branch_selection(const std::vector<int>& alternate_legs) {
    BranchSelection b = kHomeBranches;
    for (int leg : alternate_legs) {
        if (leg < 1 || leg > static_cast<int>(kLegCount)) throw InputError("--alt-branch expects a leg in 1..3");
        b[static_cast<std::size_t>(leg - 1)] = Branch::alternate;
    }
    return b;
}

inline int cmd_ik_trajectory(const RunConfig& rc, const MechanismParams& p, const IkRequest& req,
                             std::ostream& out, std::ostream& err) {
    std::ifstream in(req.trajectory);
    if (!in) throw InputError("cannot open trajectory file '" + req.trajectory + "'");
    const auto branches = branch_selection(req.alternate_legs);
    out << "yaw,pitch,roll,phi11,phi12,phi13,status\n";
    std::string line;
    std::size_t lineno = 0;
    bool any_unreachable = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
        std::stringstream ss(line);
        std::array<double, 3> y{};
        for (auto& v : y) {
            std::string cell;
            if (!std::getline(ss, cell, ',')) throw InputError("trajectory line " + std::to_string(lineno) + ": need 3 values");
            try {
                v = std::stod(cell);
            } catch (const std::exception&) {
                throw InputError("trajectory line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        out << format_fixed6(y[0]) << ',' << format_fixed6(y[1]) << ',' << format_fixed6(y[2]) << ',';
        try {
            const auto phi =
                ik_phi1(p, ypr_to_quat({deg2rad(y[0]), deg2rad(y[1]), deg2rad(y[2])}), branches).selected();
            out << format_fixed6(rad2deg(phi[0])) << ',' << format_fixed6(rad2deg(phi[1])) << ','
                << format_fixed6(rad2deg(phi[2])) << ",ok\n";
        } catch (const UnreachableOrientationError& e) {
            any_unreachable = true;
            out << ",,,unreachable_leg_" << e.leg() + 1 << '\n';
        }
    }
    (void)rc;
    if (any_unreachable) {
        err << "warning: some trajectory samples are unreachable\n";
        return kExitInfeasible;
    }
    return kExitOk;
}

inline int cmd_ik(const RunConfig& rc, const IkRequest& req, std::ostream& out, std::ostream& err) {
    const auto p = resolve_params(rc);
    if (!req.trajectory.empty()) return cmd_ik_trajectory(rc, p, req, out, err);

    std::vector<std::string> warnings;
    const auto q = orientation_input(req.ypr, req.quat, warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    const auto branches = branch_selection(req.alternate_legs);

    const auto s1 = ik_phi1(p, q, branches);
    const auto sol = ik_solve(p, q, branches, rc.passive);

    if (rc.json) {
        ojson cands = ojson::array();
        ojson flags = ojson::array();
        for (const auto& leg : s1.legs) {
            cands.push_back({rad2deg(leg.candidates[0]), rad2deg(leg.candidates[1])});
            flags.push_back(leg.branch == Branch::home ? "home" : "alternate");
        }
        const auto& qv = q.vector();
        ojson j{{"command", "ik"},
                {"quaternion", {qv[0], qv[1], qv[2], qv[3]}},
                {"phi1_deg", rad2deg(sol.angles.phi1)},
                {"candidates_deg", cands},
                {"branches", flags},
                {"residuals", {{"phi1", sol.residuals.phi1}}},
                {"warnings", warnings}};
        if (rc.passive) {
            j["phi2_deg"] = rad2deg(sol.angles.phi2);
            j["phi3_deg"] = rad2deg(sol.angles.phi3);
            j["residuals"]["phi2"] = sol.residuals.phi2;
            j["residuals"]["phi3"] = sol.residuals.phi3;
        }
        out << j.dump(2) << '\n';
        return kExitOk;
    }
    auto triple = [&](const char* name, const Triple& t) {
        out << name << fixed(rad2deg(t[0]), 6) << ' ' << fixed(rad2deg(t[1]), 6) << ' ' << fixed(rad2deg(t[2]), 6)
            << '\n';
    };
    triple("phi1_deg    ", sol.angles.phi1);
    for (std::size_t i = 0; i < kLegCount; ++i) {
        const auto& leg = s1.legs[i];
        out << "leg " << i + 1 << "       home " << fixed(rad2deg(leg.candidates[0]), 6) << "  alternate "
            << fixed(rad2deg(leg.candidates[1]), 6) << "  selected "
            << (leg.branch == Branch::home ? "home" : "alternate") << '\n';
    }
    out << "residual    " << sci(sol.residuals.phi1) << '\n';
    if (rc.passive) {
        triple("phi2_deg    ", sol.angles.phi2);
        triple("phi3_deg    ", sol.angles.phi3);
        out << "residual_passive " << sci(std::max(sol.residuals.phi2, sol.residuals.phi3)) << '\n';
    }
    return kExitOk;
}

struct JacobianRequest {
    std::vector<double> ypr;
    std::vector<double> phi;
};

inline int cmd_jacobian(const RunConfig& rc, const JacobianRequest& req, std::ostream& out, std::ostream& err) {
    const auto p = resolve_params(rc);
    const auto metric = parse_metric(rc.cn_metric);
    const YprAngles x{deg2rad(req.ypr[0]), deg2rad(req.ypr[1]), deg2rad(req.ypr[2])};
    if (std::abs(req.ypr[1]) > 85.0) err << "warning: pitch is within 5 deg of the ZYX gimbal singularity\n";
    Triple phi1;
    if (req.phi.empty()) {
        phi1 = ik_phi1(p, ypr_to_quat(x)).selected();
    } else {
        phi1 = deg2rad(Triple{req.phi[0], req.phi[1], req.phi[2]});
    }
    JacobianBundle b;
    try {
        b = constraint_jacobians(p, x, phi1);
    } catch (const ContractViolation& e) {
        throw InputError(e.what());
    }
    const auto rep = manipulability(b, rc.cn_min, metric);

    std::optional<double> fd_error;
    if (rc.check_fd) {
        const auto [jx_fd, jq_fd] = constraint_jacobians_fd(p, x, phi1);
        fd_error = std::max(cdcspm::detail::scaled_relative_error(b.jx, jx_fd),
                            cdcspm::detail::scaled_relative_error(b.jq_active, jq_fd));
    }
    const bool fd_ok = !fd_error || *fd_error < 1e-5;

    if (rc.json) {
        ojson j{{"command", "jacobian"},
                {"ypr_deg", req.ypr},
                {"phi1_deg", rad2deg(phi1)},
                {"jx", matrix_json(b.jx)},
                {"jq", matrix_json(b.jq_active)},
                {"j", b.j_effective ? matrix_json(*b.j_effective) : ojson(nullptr)},
                {"det_jx", b.det_jx},
                {"det_jq", b.det_jq},
                {"cn_frobenius", finite_or_null(rep.cn_frobenius)},
                {"inv_cond_2norm", rep.inv_cond_2norm},
                {"singularity_class", to_string(rep.singularity_class)},
                {"metric", to_string(rep.metric)},
                {"metric_value", rep.metric_value},
                {"cn_min", rc.cn_min},
                {"well_conditioned", rep.well_conditioned}};
        if (fd_error) j["fd_max_rel_error"] = *fd_error;
        out << j.dump(2) << '\n';
    } else {
        out << "phi1_deg          " << fixed(rad2deg(phi1[0]), 6) << ' ' << fixed(rad2deg(phi1[1]), 6) << ' '
            << fixed(rad2deg(phi1[2]), 6) << '\n';
        print_matrix(out, "Jx", b.jx);
        print_matrix(out, "Jq", b.jq_active);
        if (b.j_effective) {
            print_matrix(out, "J", *b.j_effective);
        } else {
            out << "J\n  undefined (Jx singular)\n";
        }
        out << "cn_frobenius      " << (std::isfinite(rep.cn_frobenius) ? fixed(rep.cn_frobenius, 6) : "inf") << '\n';
        out << "inv_cond_2norm    " << fixed(rep.inv_cond_2norm, 6) << '\n';
        out << "singularity_class " << to_string(rep.singularity_class) << '\n';
        out << "metric            " << to_string(rep.metric) << " = " << fixed(rep.metric_value, 6)
            << (rep.well_conditioned ? " (>= " : " (< ") << rc.cn_min << ")\n";
        if (fd_error) out << "fd_max_rel_error  " << sci(*fd_error) << (fd_ok ? "" : "  FAIL") << '\n';
    }
    return fd_ok ? kExitOk : kExitVerificationFailed;
}

inline ojson coverage_json(const CoverageCount& c) {
    return {{"sampled", c.sampled}, {"reachable", c.reachable}, {"fraction", c.fraction()}};
}

/// Summary of a workspace run: status counts, coverage fractions and the configuration used.
inline ojson workspace_summary(const RunConfig& rc, const MechanismParams& p, const SweepResult& sweep,
                               const CoverageReport& cov, const TaskCone& cone) {
    ojson counts;
    for (std::size_t s = 0; s < kStatusCount; ++s)
        counts[to_string(static_cast<FeasibilityStatus>(s))] = sweep.counts[s];
    ojson by_yaw = ojson::array();
    for (const auto& y : cov.useful_by_yaw) {
        by_yaw.push_back({{"yaw_deg", rad2deg(y.yaw)},
                          {"sampled", y.useful.sampled},
                          {"reachable", y.useful.reachable},
                          {"fraction", y.useful.fraction()}});
    }
    return {{"command", "workspace"},
            {"config", config_json(rc)},
            {"params", params_to_json(p)},
            {"grid", {{"points_per_axis", grid_points_per_axis(deg2rad(rc.step_deg))}, {"total", sweep.total}}},
            {"counts", counts},
            {"fractions",
             {{"feasible", sweep.feasible_fraction()}, {"collision_pass", sweep.collision_pass_fraction()}}},
            {"coverage",
             {{"useful_cone_deg", rad2deg(cone.useful)},
              {"safety_band_deg", {rad2deg(cone.safety_min), rad2deg(cone.safety_max)}},
              {"resolution_deg", rad2deg(cone.resolution)},
              {"useful_yaw0", coverage_json(cov.useful_at_zero_yaw)},
              {"safety_band_yaw0", coverage_json(cov.safety_at_zero_yaw)},
              {"yaw_sweep_zero_tilt", coverage_json(cov.yaw_sweep_zero_tilt)},
              {"useful_by_yaw", by_yaw},
              {"useful_all_yaws", coverage_json(cov.useful_all_yaws)}}}};
}

inline int cmd_workspace(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    const auto p = resolve_params(rc);
    const auto cfg = feasibility_config(rc);
    if (rc.jobs == 0) throw InputError("--jobs must be at least 1");

    namespace fs = std::filesystem;
    const fs::path dir(rc.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path csv_path = dir / "workspace.csv";
    const fs::path summary_path = dir / "summary.json";
    std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
    if (!csv) throw InputError("output directory '" + rc.out_dir + "' is not writable");

    const auto sweep = sweep_joint_space(p, cfg, rc.jobs);
    std::vector<double> yaws;
    for (int k = -6; k < 6; ++k) yaws.push_back(deg2rad(30.0 * k));
    const TaskCone cone;
    const auto cov = task_cone_coverage(p, cfg, cone, yaws);

    write_workspace_csv(csv, sweep.samples);
    csv.close();
    if (!csv) throw InputError("failed writing '" + csv_path.string() + "'");

    const auto summary = workspace_summary(rc, p, sweep, cov, cone);
    std::ofstream js(summary_path, std::ios::binary | std::ios::trunc);
    js << summary.dump(2) << '\n';
    js.close();
    if (!js) throw InputError("failed writing '" + summary_path.string() + "'");

    if (rc.json) {
        out << summary.dump(2) << '\n';
    } else {
        out << "grid          " << sweep.total << " triples at " << fixed(rc.step_deg, 3) << " deg\n";
        for (std::size_t s = 0; s < kStatusCount; ++s)
            out << "  " << to_string(static_cast<FeasibilityStatus>(s)) << ' ' << sweep.counts[s] << '\n';
        out << "feasible      " << fixed(100.0 * sweep.feasible_fraction(), 2) << " %\n";
        out << "useful cone   " << fixed(100.0 * cov.useful_at_zero_yaw.fraction(), 2) << " % reachable at yaw 0 ("
            << cov.useful_at_zero_yaw.reachable << '/' << cov.useful_at_zero_yaw.sampled << ")\n";
        out << "safety band   " << fixed(100.0 * cov.safety_at_zero_yaw.fraction(), 2) << " % reachable at yaw 0\n";
        out << "yaw sweep     " << fixed(100.0 * cov.yaw_sweep_zero_tilt.fraction(), 2) << " % reachable at zero tilt\n";
        out << "wrote " << csv_path.string() << " and " << summary_path.string() << '\n';
    }
    (void)err;
    return kExitOk;
}

inline int cmd_verify(const RunConfig& rc, std::size_t samples, std::ostream& out, std::ostream& err) {
    const auto p = resolve_params(rc);
    const auto report = run_invariant_suite(p, samples, rc.seed);
    if (rc.json) {
        ojson checks = ojson::array();
        for (const auto& c : report.checks) {
            checks.push_back({{"name", c.name},
                              {"passed", c.passed},
                              {"evaluated", c.evaluated},
                              {"max_error", finite_or_null(c.max_error)},
                              {"tolerance", c.tolerance}});
        }
        ojson j{{"command", "verify"},
                {"samples", samples},
                {"seed", rc.seed},
                {"passed", report.passed()},
                {"checks", checks}};
        if (const auto* f = report.first_failure()) j["counterexample"] = {{"check", f->name}, {"input", f->counterexample}};
        out << j.dump(2) << '\n';
    } else {
        for (const auto& c : report.checks) {
            out << (c.passed ? "PASS " : "FAIL ") << c.name << "  n=" << c.evaluated << "  max_error=" << sci(c.max_error)
                << "  tol=" << sci(c.tolerance) << '\n';
        }
    }
    if (const auto* f = report.first_failure()) {
        err << "counterexample " << ojson{{"check", f->name}, {"input", f->counterexample}}.dump() << '\n';
        return kExitVerificationFailed;
    }
    return kExitOk;
}

}  // namespace detail

/// Parses argv and runs one command; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Kinematics and workspace analysis for the cable-driven coaxial spherical parallel mechanism",
                 "cdcspm"};
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig rc;
    const std::string env = kEnvPrefix;
    app.add_option("--params", rc.params_path, "Mechanism parameter file (JSON); defaults to the prototype")
        ->envname(env + "PARAMS");
    app.add_option("--step", rc.step_deg, "Joint-space grid step in degrees")->envname(env + "STEP");
    app.add_option("--cn-min", rc.cn_min, "Conditioning threshold")->envname(env + "CN_MIN");
    app.add_option("--cn-metric", rc.cn_metric, "Conditioning metric: inv2norm or frobenius")
        ->envname(env + "CN_METRIC");
    app.add_option("--collision-sep", rc.collision_sep_deg, "Minimum motor separation in degrees")
        ->envname(env + "COLLISION_SEP");
    app.add_option("--out", rc.out_dir, "Output directory for workspace files")->envname(env + "OUT");
    app.add_flag("--json", rc.json, "Machine-readable output")->envname(env + "JSON");
    app.add_option("--jobs", rc.jobs, "Worker threads for the workspace sweep")->envname(env + "JOBS");
    app.add_option("--seed", rc.seed, "Seed for randomized checks")->envname(env + "SEED");
    app.add_flag("--force", rc.force, "Solve FK even for self-colliding motor angles")->envname(env + "FORCE");
    app.add_flag("--passive", rc.passive, "Also report passive joint angles")->envname(env + "PASSIVE");
    app.add_flag("--all-branches", rc.all_branches, "List every FK assembly mode")->envname(env + "ALL_BRANCHES");
    app.add_flag("--check-fd", rc.check_fd, "Cross-check Jacobians by finite differences")
        ->envname(env + "CHECK_FD");

    std::vector<double> fk_phi;
    auto* fk = app.add_subcommand("fk", "Forward kinematics from motor angles in degrees");
    fk->add_option("phi1", fk_phi, "Motor angles phi11 phi12 phi13")->expected(3)->required();

    detail::IkRequest ik_req;
    auto* ik = app.add_subcommand("ik", "Inverse kinematics for a tool orientation");
    auto* ik_ypr = ik->add_option("--ypr", ik_req.ypr, "Yaw pitch roll in degrees")->expected(3)->allow_extra_args(false);
    auto* ik_quat = ik->add_option("--quat", ik_req.quat, "Unit quaternion e0 e1 e2 e3")->expected(4);
    auto* ik_traj = ik->add_option("--trajectory", ik_req.trajectory, "CSV of yaw,pitch,roll rows, solved one by one");
    ik_ypr->excludes(ik_quat)->excludes(ik_traj);
    ik_quat->excludes(ik_traj);
    ik->add_option("--alt-branch", ik_req.alternate_legs, "Use the alternate phi1 root on this leg (1-3)");

    detail::JacobianRequest jac_req;
    auto* jac = app.add_subcommand("jacobian", "Constraint Jacobians and conditioning at a pose");
    jac->add_option("--ypr", jac_req.ypr, "Yaw pitch roll in degrees")->expected(3)->required();
    jac->add_option("--phi", jac_req.phi, "Motor angles in degrees; default from inverse kinematics")->expected(3);

    auto* ws = app.add_subcommand("workspace", "Joint-space sweep and task-cone coverage");

    std::size_t samples = 1000;
    auto* verify = app.add_subcommand("verify", "Run the invariant suite on random samples");
    verify->add_option("--samples", samples, "Samples per property")->envname(env + "SAMPLES");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (*fk) return detail::cmd_fk(rc, fk_phi, out, err);
        if (*ik) {
            if (ik_req.ypr.empty() && ik_req.quat.empty() && ik_req.trajectory.empty())
                throw InputError("ik needs --ypr, --quat or --trajectory");
            return detail::cmd_ik(rc, ik_req, out, err);
        }
        if (*jac) return detail::cmd_jacobian(rc, jac_req, out, err);
        if (*ws) return detail::cmd_workspace(rc, out, err);
        if (*verify) return detail::cmd_verify(rc, samples, out, err);
    } catch (const NoSolutionError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const UnreachableOrientationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const InconsistentChainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    }
    return kExitInputError;
}

}  // namespace cdcspm::cli

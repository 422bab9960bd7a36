// Acceptance gate for the tracking toolkit. Each numbered criterion prints
// exactly one PASS/FAIL line; the exit code is the number of failures.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "dqmpc/mpc_qp.hpp"
#include "dqmpc/potential_fields.hpp"
#include "dqmpc/scenario.hpp"

using dqmpc::AgentState;
using dqmpc::Method;
using dqmpc::MpcConfig;
using dqmpc::PotentialConfig;
using dqmpc::QpProblem;
using dqmpc::QpSolution;
using dqmpc::QpStatus;
using dqmpc::RunLog;
using dqmpc::RunSummary;
using dqmpc::ScenarioSpec;
using dqmpc::Vec3;
using dqmpc::Vec6;

namespace {

// All pass thresholds live here so the gate is auditable at a glance.
constexpr double kSafetySlack = 0.01;    // tolerated dip below d_min [m]
constexpr double kWallCapSeconds = 120.0;
constexpr double kQpObjectiveTol = 1e-6;
constexpr double kKktTol = 1e-8;
constexpr double kRolloutIdentityTol = 1e-12;
constexpr double kGradRelTol = 1e-5;
constexpr long kOracleIters = 1000000;

const char* kScenarios[] = {"scenario1", "scenario2", "scenario3", "antipodal"};
const Method kMethods[] = {Method::baseline, Method::srd, Method::approach_angle,
                           Method::tangential_band};

struct ComboRun {
    RunSummary summary;
    RunLog log;
    std::string bytes;
    double d_min = 0.0;
    double eps_conv = 0.0;
};

std::string combo_key(const std::string& scenario, Method method) {
    return scenario + "/" + dqmpc::to_string(method);
}

ComboRun run_combo(const std::string& scenario, Method method, std::uint64_t seed) {
    ScenarioSpec spec = dqmpc::build_scenario(scenario);
    spec.method = method;
    spec.seed = seed;
    ComboRun r;
    r.summary = dqmpc::run(spec, &r.log);
    r.bytes = dqmpc::serialize_log(r.log);
    r.d_min = spec.potential.d_min;
    r.eps_conv = spec.eps_conv;
    return r;
}

Vec3 rand_vec(std::mt19937& gen, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return Vec3(d(gen), d(gen), d(gen));
}

double quad_eval(const QpProblem& qp, const Eigen::VectorXd& u) {
    return 0.5 * u.dot(qp.hessian * u) + qp.linear_term.dot(u) + qp.constant;
}

// Long-run projected gradient over the input box. Exact for instances whose
// state rows never bind, which the generator below guarantees.
double projected_gradient_objective(const QpProblem& qp, long max_iters) {
    const int nv = static_cast<int>(qp.hessian.rows());
    Eigen::VectorXd lo(nv), hi(nv);
    for (int i = 0; i < nv; ++i) {
        lo(i) = qp.cfg.u_min(i % 3);
        hi(i) = qp.cfg.u_max(i % 3);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qp.hessian);
    const double step = 1.0 / es.eigenvalues().maxCoeff();

    Eigen::VectorXd u = 0.5 * (lo + hi);
    for (long k = 0; k < max_iters; ++k) {
        Eigen::VectorXd next =
            (u - step * (qp.hessian * u + qp.linear_term)).cwiseMax(lo).cwiseMin(hi);
        if ((next.array() == u.array()).all()) break;
        u = next;
    }
    return quad_eval(qp, u);
}

// Short horizons, slow speeds, destinations a few meters out: the predicted
// states stay deep inside the position/velocity boxes, so only input bounds
// can be active.
QpProblem random_boxed_instance(std::mt19937& gen) {
    std::uniform_int_distribution<int> pick_n(0, 5);
    std::uniform_real_distribution<double> pick_dt(0.01, 0.1);

    MpcConfig cfg;
    cfg.horizon_n = pick_n(gen);
    cfg.dt = pick_dt(gen);

    AgentState x0;
    x0.position = rand_vec(gen, -8.0, 8.0);
    x0.position.z() = std::uniform_real_distribution<double>(4.0, 9.0)(gen);
    x0.velocity = rand_vec(gen, -2.5, 2.5);

    std::vector<Vec3> forces(cfg.horizon_n + 1);
    for (Vec3& f : forces) f = rand_vec(gen, -1.0, 1.0);

    const Vec3 dest = x0.position + rand_vec(gen, -5.0, 5.0);
    return dqmpc::condense(x0, forces, cfg, dest);
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int idx, const char* name, bool ok, const std::string& detail) {
        std::printf("criterion %d %-14s %s%s%s\n", idx, name, ok ? "PASS" : "FAIL",
                    detail.empty() ? "" : "  ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    };
    char buf[256];

    // 1. Safety: every scenario x method x seed keeps all logged distances
    // above d_min - 0.01 and finishes inside the wall budget.
    std::map<std::string, ComboRun> seed1;
    {
        bool ok = true;
        double worst_margin = std::numeric_limits<double>::infinity();
        double worst_wall = 0.0;
        for (const char* scenario : kScenarios) {
            for (Method method : kMethods) {
                for (std::uint64_t seed : {1, 2, 3}) {
                    ComboRun r = run_combo(scenario, method, seed);
                    const double floor = r.d_min - kSafetySlack;
                    const double margin =
                        std::min(r.summary.min_pairwise, r.summary.min_obstacle) - floor;
                    worst_margin = std::min(worst_margin, margin);
                    worst_wall = std::max(worst_wall, r.summary.wall_seconds);
                    if (margin < 0.0 || r.summary.wall_seconds > kWallCapSeconds) ok = false;
                    std::fprintf(stderr, "  %s %s seed %llu: min %.3f wall %.1fs\n",
                                 scenario, dqmpc::to_string(method).c_str(),
                                 static_cast<unsigned long long>(seed),
                                 std::min(r.summary.min_pairwise, r.summary.min_obstacle),
                                 r.summary.wall_seconds);
                    if (seed == 1) seed1[combo_key(scenario, method)] = std::move(r);
                }
            }
        }
        std::snprintf(buf, sizeof(buf), "48 runs, worst margin %+.3f m, max wall %.1f s",
                      worst_margin, worst_wall);
        report(1, "safety", ok, buf);
    }

    // 2. Target-jump contention: the plain tracker takes [20, 60] s while the
    // swivel and the bearing kicks finish in <= 25 s and <= 0.6x its time.
    {
        const RunSummary& base = seed1[combo_key("scenario1", Method::baseline)].summary;
        const RunSummary& srd = seed1[combo_key("scenario1", Method::srd)].summary;
        const RunSummary& app = seed1[combo_key("scenario1", Method::approach_angle)].summary;
        bool ok = base.converged && base.converged_at >= 20.0 && base.converged_at <= 60.0;
        for (const RunSummary* s : {&srd, &app}) {
            ok = ok && s->converged && s->converged_at <= 25.0 &&
                 s->converged_at <= 0.6 * base.converged_at;
        }
        std::snprintf(buf, sizeof(buf), "baseline %.1f s, srd %.1f s, approach %.1f s",
                      base.converged ? base.converged_at : -1.0,
                      srd.converged ? srd.converged_at : -1.0,
                      app.converged ? app.converged_at : -1.0);
        report(2, "scenario1", ok, buf);
    }

    // 3. Pocket deadlock: three methods stall against the wall with a live
    // gradient; the tangential band rides around it in <= 30 s.
    {
        bool ok = true;
        for (Method m : {Method::baseline, Method::srd, Method::approach_angle}) {
            const RunSummary& s = seed1[combo_key("scenario3", m)].summary;
            ok = ok && !s.converged && s.final_max_grad_norm > 0.1;
        }
        const RunSummary& tang = seed1[combo_key("scenario3", Method::tangential_band)].summary;
        ok = ok && tang.converged && tang.converged_at <= 30.0;
        std::snprintf(buf, sizeof(buf), "stuck grads > 0.1, tangential %.1f s",
                      tang.converged ? tang.converged_at : -1.0);
        report(3, "scenario3", ok, buf);
    }

    // 4. Antipodal swap: both deadlock fields finish <= 25 s with every agent
    // inside eps_conv at the end and no safety violations.
    {
        bool ok = true;
        double t_app = -1.0, t_tang = -1.0;
        for (Method m : {Method::approach_angle, Method::tangential_band}) {
            const ComboRun& r = seed1[combo_key("antipodal", m)];
            ok = ok && r.summary.converged && r.summary.converged_at <= 25.0 &&
                 !r.summary.safety_violation;
            const std::size_t n = r.log.records.size();
            ok = ok && n >= 8;
            for (std::size_t i = n - 8; i < n; ++i) {
                const auto& rec = r.log.records[i];
                ok = ok && (rec.position - rec.destination).norm() < r.eps_conv;
            }
            (m == Method::approach_angle ? t_app : t_tang) = r.summary.converged_at;
        }
        std::snprintf(buf, sizeof(buf), "approach %.1f s, tangential %.1f s", t_app, t_tang);
        report(4, "antipodal", ok, buf);
    }

    // 5. QP correctness: objective within 1e-6 of a long-run projected
    // gradient on 200 feasible instances, KKT residual <= 1e-8 when optimal,
    // and the rollout treats forces exactly like control offsets.
    {
        bool ok = true;
        double worst_obj = 0.0, worst_kkt = 0.0;
        std::mt19937 gen(71);
        for (int trial = 0; trial < 200; ++trial) {
            const QpProblem qp = random_boxed_instance(gen);
            const QpSolution sol = dqmpc::solve(qp);
            if (sol.status != QpStatus::optimal) {
                ok = false;
                continue;
            }
            const double ref = projected_gradient_objective(qp, kOracleIters);
            worst_obj = std::max(worst_obj, std::abs(sol.objective_value - ref));
            worst_kkt = std::max(worst_kkt, sol.kkt_residual);
        }
        ok = ok && worst_obj <= kQpObjectiveTol && worst_kkt <= kKktTol;

        double worst_identity = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            MpcConfig cfg;
            cfg.horizon_n = std::uniform_int_distribution<int>(0, 8)(gen);
            cfg.dt = std::uniform_real_distribution<double>(0.01, 0.1)(gen);
            AgentState x0;
            x0.position = rand_vec(gen, -8.0, 8.0);
            x0.position.z() = std::uniform_real_distribution<double>(4.0, 9.0)(gen);
            x0.velocity = rand_vec(gen, -2.0, 2.0);
            std::vector<Vec3> u(cfg.horizon_n + 1), f(cfg.horizon_n + 1), folded;
            for (int n = 0; n <= cfg.horizon_n; ++n) {
                u[n] = rand_vec(gen, -2.0, 2.0);
                f[n] = rand_vec(gen, -2.0, 2.0);
                folded.push_back(u[n] + f[n]);
            }
            const auto with_f = dqmpc::rollout(x0, u, f, cfg);
            const auto no_f = dqmpc::rollout(x0, folded, {}, cfg);
            for (std::size_t n = 0; n < with_f.size(); ++n) {
                worst_identity = std::max(
                    worst_identity, (with_f[n].position - no_f[n].position).norm());
                worst_identity = std::max(
                    worst_identity, (with_f[n].velocity - no_f[n].velocity).norm());
            }
        }
        ok = ok && worst_identity <= kRolloutIdentityTol;
        std::snprintf(buf, sizeof(buf),
                      "obj gap %.2e, kkt %.2e, rollout identity %.2e", worst_obj,
                      worst_kkt, worst_identity);
        report(5, "qp", ok, buf);
    }

    // 6. Terminal gradient against central finite differences on 100 random
    // solved instances.
    {
        bool ok = true;
        double worst = 0.0;
        std::mt19937 gen(72);
        for (int trial = 0; trial < 100; ++trial) {
            const QpProblem qp = random_boxed_instance(gen);
            const QpSolution sol = dqmpc::solve(qp);
            if (sol.status != QpStatus::optimal) {
                ok = false;
                continue;
            }
            const Vec3 analytic = dqmpc::gradient_terminal(sol, qp.cfg, qp.destination);
            const Vec3 xT = sol.trajectory.back().position;
            const Vec3 vT = sol.trajectory.back().velocity;
            auto terminal_cost = [&](const Vec3& x) {
                Vec6 e;
                e << x - qp.destination, vT;
                return e.dot(qp.cfg.omega_t * e);
            };
            auto full_objective = [&](const Vec3& uN) {
                std::vector<Vec3> u = sol.controls;
                u.back() = uN;
                return dqmpc::objective(qp.initial, u, qp.forces, qp.cfg, qp.destination);
            };
            Vec3 fd;
            const double h = 1e-5;
            for (int axis = 0; axis < 3; ++axis) {
                Vec3 dx = Vec3::Zero();
                dx(axis) = h;
                fd(axis) =
                    (terminal_cost(xT + dx) - terminal_cost(xT - dx)) / (2.0 * h) +
                    (full_objective(sol.controls.back() + dx) -
                     full_objective(sol.controls.back() - dx)) /
                        (2.0 * h);
            }
            worst = std::max(worst, (analytic - fd).norm() / std::max(1.0, fd.norm()));
        }
        ok = ok && worst < kGradRelTol;
        std::snprintf(buf, sizeof(buf), "worst relative error %.2e", worst);
        report(6, "gradient", ok, buf);
    }

    // 7. Field shape: hyperbolic profile monotone from cap to zero over a
    // 10^4-point grid, and repulsion never pulls toward the obstacle over
    // 10^4 random pairs.
    {
        PotentialConfig pc;
        bool ok = true;
        const int grid = 10000;
        double prev = std::numeric_limits<double>::infinity();
        for (int i = 0; i < grid; ++i) {
            const double d = 1.2 * pc.d_safe * i / (grid - 1);
            const double f = dqmpc::f_hyp(d, pc);
            if (f > prev || f < 0.0 || f > pc.f_cap) ok = false;
            if (d >= pc.d_safe && f != 0.0) ok = false;
            if (d <= pc.d_min && f != pc.f_cap) ok = false;
            prev = f;
        }
        ok = ok && dqmpc::f_hyp(pc.d_safe, pc) == 0.0;
        ok = ok && dqmpc::f_hyp(pc.d_min, pc) == pc.f_cap;

        std::mt19937 gen(73);
        int attracting = 0;
        for (int i = 0; i < 10000; ++i) {
            const Vec3 own = rand_vec(gen, -5.0, 5.0);
            const Vec3 obs = own + rand_vec(gen, -4.0, 4.0);
            const Vec3 force = dqmpc::repulsive_force(own, obs, pc, nullptr);
            if (force.dot(own - obs) < 0.0) ++attracting;
        }
        ok = ok && attracting == 0;
        std::snprintf(buf, sizeof(buf), "grid clean, %d attracting samples", attracting);
        report(7, "fields", ok, buf);
    }

    // 8. Determinism: rerunning each scenario/method combination reproduces
    // the seed-1 log byte for byte.
    {
        bool ok = true;
        int mismatches = 0;
        for (const char* scenario : kScenarios) {
            for (Method method : kMethods) {
                const ComboRun again = run_combo(scenario, method, 1);
                if (again.bytes != seed1[combo_key(scenario, method)].bytes) {
                    ok = false;
                    ++mismatches;
                }
            }
        }
        std::snprintf(buf, sizeof(buf), "16 combos, %d mismatches", mismatches);
        report(8, "determinism", ok, buf);
    }

    return failures;
}

#include "dqmpc/agent_planner.hpp"

#include <cmath>
#include <stdexcept>

namespace dqmpc {

Vec3 compute_destination(const Vec3& target_pos, double psi, double d_track, double h_gnd) {
    return target_pos + Vec3(d_track * std::cos(psi), d_track * std::sin(psi), h_gnd);
}

double compute_yaw(const Vec3& own_pos, const Vec3& target_pos, double fallback_psi,
                   AnomalyLog* log) {
    const double dx = target_pos.x() - own_pos.x();
    const double dy = target_pos.y() - own_pos.y();
    if (std::hypot(dx, dy) <= 1e-12) {
        note_anomaly(log, "compute_yaw: horizontally on the target, keeping previous yaw");
        return fallback_psi;
    }
    return std::atan2(dy, dx);
}

PlanOutput make_hold_output(const AgentContext& ctx, const std::vector<Vec3>& forces,
                            const Vec3& destination, const QpSolution& failed_solution) {
    const int steps = ctx.mpc.horizon_n + 1;
    PlanOutput out;
    out.qp_status = QpStatus::failed;
    out.destination = destination;
    // Zero net acceleration: compensate forces and gravity exactly.
    out.control_0 = -(forces.empty() ? Vec3(Vec3::Zero()) : forces[0]) - ctx.mpc.gravity;
    out.force_0 = forces.empty() ? Vec3(Vec3::Zero()) : forces[0];
    out.waypoint_pos = ctx.state.position;
    out.waypoint_vel = Vec3::Zero();
    out.shared_trajectory.positions.assign(steps, ctx.state.position);
    out.shared_trajectory.velocities.assign(steps, Vec3::Zero());
    // Keep the previous gradient so SRD does not lose its swivel state over
    // a transient failure.
    out.grad_norm = ctx.prev_grad_norm;
    out.slack = 0.0;
    out.qp_kkt_residual = failed_solution.kkt_residual;
    out.qp_iterations = failed_solution.iterations;
    return out;
}

PlanOutput plan_step(const AgentContext& ctx, const std::vector<ObstacleView>& snapshot,
                     const Vec3& target_pos) {
    const int steps = ctx.mpc.horizon_n + 1;
    if (static_cast<int>(ctx.prev_prediction.size()) != steps) {
        throw std::invalid_argument("plan_step: prev_prediction must have horizon_n + 1 entries");
    }

    AnomalyLog anomalies;

    // 1. Destination on the tracking circle (SRD swivels it by the previous
    //    cycle's gradient norm).
    Vec3 destination;
    if (ctx.method == Method::srd) {
        destination = srd_destination(target_pos, ctx.psi, ctx.d_track, ctx.h_gnd,
                                      ctx.prev_grad_norm, swivel_sign_for(ctx.psi),
                                      ctx.potential);
    } else {
        destination = compute_destination(target_pos, ctx.psi, ctx.d_track, ctx.h_gnd);
    }

    // 2. Interaction forces over the horizon, plus the active method's
    //    augmentation.
    std::vector<Vec3> forces =
        horizon_forces(ctx.prev_prediction, snapshot, ctx.potential, &anomalies);

    if (ctx.method == Method::approach_angle) {
        const int tie_sign = (ctx.id % 2 == 0) ? +1 : -1;
        std::vector<Vec3> angle(steps, Vec3::Zero());
        for (int k = 0; k < steps; ++k) {
            for (const ObstacleView& obs : snapshot) {
                const Vec3 obs_pos = obs.horizon_positions
                                         ? (*obs.horizon_positions)[k]
                                         : obs.current_position;
                angle[k] += approach_angle_force(ctx.prev_prediction[k], destination, target_pos,
                                                 obs_pos, ctx.prev_grad_norm, tie_sign,
                                                 ctx.potential, &anomalies);
            }
        }
        forces = combine_approach_angle(forces, angle);
    }

    MpcConfig effective = ctx.mpc;
    if (ctx.method == Method::tangential_band) {
        const BandStatus bs = band_status(ctx.state.position, snapshot, ctx.mpc.omega_t,
                                          ctx.potential);
        if (bs.inside) {
            Vec3 tang = Vec3::Zero();
            for (const ObstacleView& obs : snapshot) {
                if ((ctx.state.position - obs.current_position).norm() <=
                    ctx.potential.d_safe + ctx.potential.d_band) {
                    tang += tangential_force(ctx.state.position, obs.current_position,
                                             ctx.prev_grad_norm, ctx.psi, ctx.potential,
                                             &anomalies);
                }
            }
            forces = combine_tangential(forces, tang);
        }
        effective.omega_t = bs.effective_omega_t;
    }

    // 3. Condensed solve.
    const QpProblem qp = condense(ctx.state, forces, effective, destination);
    const QpSolution sol = solve(qp);

    if (sol.status == QpStatus::failed) {
        PlanOutput out = make_hold_output(ctx, forces, destination, sol);
        out.psi_next = compute_yaw(ctx.state.position, target_pos, wrap_angle(ctx.psi + M_PI),
                                   &anomalies);
        out.anomalies = std::move(anomalies.notes);
        return out;
    }

    // 4. Terminal gradient feeds the next cycle's deadlock logic.
    const Vec3 grad = gradient_terminal(sol, effective, destination);

    PlanOutput out;
    out.qp_status = sol.status;
    out.destination = destination;
    out.control_0 = sol.controls.front();
    out.force_0 = forces.front();
    out.grad_norm = grad.norm();
    out.slack = sol.slack;
    out.qp_kkt_residual = sol.kkt_residual;
    out.qp_iterations = sol.iterations;

    out.shared_trajectory.positions.reserve(steps);
    out.shared_trajectory.velocities.reserve(steps);
    for (const AgentState& s : sol.trajectory) {
        out.shared_trajectory.positions.push_back(s.position);
        out.shared_trajectory.velocities.push_back(s.velocity);
    }
    out.waypoint_pos = sol.trajectory.back().position;
    out.waypoint_vel = sol.trajectory.back().velocity;

    // 5. Yaw faces the target; the fallback keeps the current heading.
    out.psi_next = compute_yaw(ctx.state.position, target_pos, wrap_angle(ctx.psi + M_PI),
                               &anomalies);
    out.anomalies = std::move(anomalies.notes);
    return out;
}

}  // namespace dqmpc

#pragma once

#include <string>
#include <vector>

#include "dqmpc/deadlock.hpp"
#include "dqmpc/mpc_qp.hpp"

namespace dqmpc {

// Predicted positions/velocities an agent publishes after each solve,
// steps 1..N+1. Neighbors use them for horizon force computation.
struct HorizonTrajectory {
    std::vector<Vec3> positions;
    std::vector<Vec3> velocities;
    double stamp = 0.0;  // simulation time of publication
};

// How the destination slot angle evolves: chase_bearing re-anchors it to the
// agent's current bearing from the target every cycle (tracking circles);
// fixed_angle keeps the configured angle (antipodal traversal tasks).
enum class DestinationPolicy { chase_bearing, fixed_angle };

// Per-agent planning state carried across cycles.
struct AgentContext {
    int id = 0;
    AgentState state;
    double psi = 0.0;     // destination slot angle on the tracking circle [rad]
    double d_track = 4.0; // tracking circle radius [m]
    double h_gnd = 5.0;   // tracking height above the target [m]
    Method method = Method::baseline;
    DestinationPolicy dest_policy = DestinationPolicy::chase_bearing;
    MpcConfig mpc;
    PotentialConfig potential;
    std::vector<Vec3> prev_prediction;  // previous cycle's predicted positions
    double prev_grad_norm = 0.0;        // previous cycle's gradient norm
};

// One planning cycle's result. waypoint_* go to the executing controller,
// shared_trajectory to the neighbors, control_0/force_0 to direct execution.
struct PlanOutput {
    Vec3 waypoint_pos = Vec3::Zero();
    Vec3 waypoint_vel = Vec3::Zero();
    double psi_next = 0.0;  // yaw facing the target, for the vehicle front end
    HorizonTrajectory shared_trajectory;
    Vec3 control_0 = Vec3::Zero();
    Vec3 force_0 = Vec3::Zero();
    double grad_norm = 0.0;
    QpStatus qp_status = QpStatus::failed;
    Vec3 destination = Vec3::Zero();
    double slack = 0.0;
    double qp_kkt_residual = 0.0;
    int qp_iterations = 0;
    std::vector<std::string> anomalies;
};

// Tracking-circle slot at angle psi: target + (d*cos(psi), d*sin(psi), h).
Vec3 compute_destination(const Vec3& target_pos, double psi, double d_track, double h_gnd);

// Yaw that faces the target: atan2(ty - y, tx - x). Horizontally coincident
// positions keep fallback_psi (logged).
double compute_yaw(const Vec3& own_pos, const Vec3& target_pos, double fallback_psi,
                   AnomalyLog* log = nullptr);

// One full planning cycle: destination (with SRD swivel when active),
// horizon forces (with approach-angle or tangential augmentation when
// active), condensed solve, terminal gradient, facing yaw. Pure function of
// its arguments; the previous cycle's state is all inside ctx.
PlanOutput plan_step(const AgentContext& ctx, const std::vector<ObstacleView>& snapshot,
                     const Vec3& target_pos);

// Hold output used when the solver reports failed: stay at the current
// position (zero nominal acceleration plus force/gravity compensation) and
// publish a constant trajectory so neighbors keep a consistent view.
PlanOutput make_hold_output(const AgentContext& ctx, const std::vector<Vec3>& forces,
                            const Vec3& destination, const QpSolution& failed_solution);

}  // namespace dqmpc

#pragma once

#include "dqmpc/types.hpp"

namespace dqmpc {

// Parameters of the per-agent convex MPC. The planner runs at 1/dt Hz and
// optimizes nominal accelerations u(0..N) for a double integrator driven by
// u + f + g, where f are externally computed interaction forces and g is
// constant gravity.
struct MpcConfig {
    double dt = 0.01;   // planning period, also the simulation step [s]
    int horizon_n = 15; // N; controls u(0..N), predicted states 1..N+1

    // Running input weight and terminal state weight. Both must be symmetric
    // positive definite. omega_i penalizes total commanded acceleration
    // (u + f + g); omega_t penalizes terminal position error and velocity.
    Mat3 omega_i = 1e-3 * Mat3::Identity();
    Mat6 omega_t = (Vec6() << 1.0, 1.0, 1.0, 0.25, 0.25, 0.25).finished().asDiagonal();

    // Hard bounds on the nominal acceleration. The vertical band is centered
    // on hover thrust (-gravity.z) so standing still is feasible; the net
    // vertical authority after gravity is still +-2 m/s^2.
    Vec3 u_min = Vec3(-2.0, -2.0, 7.81);
    Vec3 u_max = Vec3(2.0, 2.0, 11.81);

    // Position and velocity limits, enforced as soft rows through a shared
    // nonnegative slack when the hard problem is infeasible.
    Vec3 x_min = Vec3(-20.0, -20.0, 3.0);
    Vec3 x_max = Vec3(20.0, 20.0, 10.0);
    Vec3 v_min = Vec3(-5.0, -5.0, -5.0);
    Vec3 v_max = Vec3(5.0, 5.0, 5.0);

    Vec3 gravity = Vec3(0.0, 0.0, -9.81);

    // Quadratic penalty weight on the shared slack in the relaxed solve.
    double slack_penalty = 1e6;

    // Throws std::invalid_argument describing the first problem found.
    void validate() const;
};

}  // namespace dqmpc

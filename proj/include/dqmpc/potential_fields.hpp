#pragma once

#include <optional>
#include <vector>

#include "dqmpc/types.hpp"

namespace dqmpc {

// Interaction-field parameters shared by the repulsion field and the
// deadlock-resolution variants built on top of it.
struct PotentialConfig {
    double d_min = 0.5;   // collision distance; field saturates at f_cap here [m]
    double d_safe = 3.0;  // field reach; zero force at and beyond [m]
    double k_rep = 1.0;   // repulsion gain
    double f_cap = 1e6;   // magnitude ceiling near/inside d_min

    double theta_safe = 0.5;      // approach-angle field reach [rad]
    double k_s = 0.05;            // swivel rate gain (rad per unit gradient norm)
    double k_tang = 2.0;          // tangential force gain
    double d_band = 1.0;          // tangential band width beyond d_safe [m]
    double omega_t_min_scale = 0.01;  // terminal-weight scale inside the band

    void validate() const;
};

// What one planning agent knows about one obstacle when computing forces.
// Neighbor agents publish predicted trajectories; anything without one
// contributes its current-position force held constant over the horizon.
struct ObstacleView {
    enum class Kind { neighbor_agent, static_obstacle };
    Kind kind = Kind::static_obstacle;
    Vec3 current_position = Vec3::Zero();
    // Predicted positions for steps 1..N+1, when available.
    std::optional<std::vector<Vec3>> horizon_positions;
};

// Hyperbolic falloff on distance: f_cap at and below d_min, zero at and
// beyond d_safe, min(f_cap, k_rep*(1/(d-d_min) - 1/(d_safe-d_min))) between.
double f_hyp(double d, const PotentialConfig& p);

// Same shape on a squared angle difference q = dtheta^2, with the interval
// (0, theta_safe^2) playing the role of (d_min, d_safe).
double f_hyp_angle(double q, const PotentialConfig& p);

// Repulsion exerted on `own` by a point obstacle at `obs`: magnitude
// f_hyp(distance), direction away from the obstacle. Coincident points fall
// back to +x at f_cap (and get logged); a zero force can never attract.
Vec3 repulsive_force(const Vec3& own, const Vec3& obs, const PotentialConfig& p,
                     AnomalyLog* log = nullptr);

// Per-step force sequence f(0..N) for the next solve. own_prev_prediction
// holds this agent's previous-cycle predicted positions (steps 1..N+1, which
// line up in absolute time with control steps 0..N of the current cycle).
// Obstacles with trajectories are evaluated step against step; obstacles
// without contribute their step-0 force at every step. Contributions from
// multiple obstacles add.
std::vector<Vec3> horizon_forces(const std::vector<Vec3>& own_prev_prediction,
                                 const std::vector<ObstacleView>& obstacles,
                                 const PotentialConfig& p, AnomalyLog* log = nullptr);

}  // namespace dqmpc

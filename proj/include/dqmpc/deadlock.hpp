#pragma once

#include <string>
#include <vector>

#include "dqmpc/potential_fields.hpp"
#include "dqmpc/types.hpp"

namespace dqmpc {

// Deadlock-resolution variant active for a run. Exactly one per agent.
enum class Method { baseline, srd, approach_angle, tangential_band };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

// Swivel direction rule: nonnegative destination angle swivels clockwise
// (s = -1), negative anticlockwise (s = +1).
inline int swivel_sign_for(double psi) { return psi >= 0.0 ? -1 : +1; }

// Swivelling destination: the tracking-circle slot angle is offset by
// s * k_s * grad_norm, so blocked agents (large gradient) slide their
// destinations along the circle at different rates. grad_norm = 0 reproduces
// the plain destination.
Vec3 srd_destination(const Vec3& target_pos, double psi, double d_track, double h_gnd,
                     double grad_norm, int swivel_sign, const PotentialConfig& p);

// Repulsion in approach-angle space: agents whose bearing around the target
// is within theta_safe of an obstacle's bearing get pushed sideways
// (perpendicular to their destination approach direction), away in angle.
// Magnitude is grad_norm * f_hyp_angle(dtheta^2). tie_sign (+1/-1, from the
// agent id's parity) breaks the exactly-aligned case. Degenerate geometry
// (agent or obstacle horizontally on the target, or agent on its
// destination) contributes zero force and is logged.
Vec3 approach_angle_force(const Vec3& own_pos_n, const Vec3& dest, const Vec3& target_pos,
                          const Vec3& obstacle_pos_n, double grad_norm, int tie_sign,
                          const PotentialConfig& p, AnomalyLog* log = nullptr);

// Elementwise sum of the repulsion sequence and the per-step angle forces.
std::vector<Vec3> combine_approach_angle(const std::vector<Vec3>& repulsion,
                                         const std::vector<Vec3>& angle_forces);

// Instantaneous tangential force about one obstacle: perpendicular to the
// horizontal radial, k_tang * grad_norm in magnitude, rotated +90 degrees
// (anticlockwise) when psi >= 0 and -90 degrees otherwise. Coincident
// horizontal positions yield zero force (logged).
Vec3 tangential_force(const Vec3& own_pos, const Vec3& obstacle_pos_0, double grad_norm,
                      double psi, const PotentialConfig& p, AnomalyLog* log = nullptr);

struct BandStatus {
    bool inside = false;
    Mat6 effective_omega_t = Mat6::Identity();
};

// Inside the band iff the distance to any obstacle's current position is at
// most d_safe + d_band (boundary inclusive). Inside scales the terminal
// weight by omega_t_min_scale; outside restores omega_t_max unchanged.
BandStatus band_status(const Vec3& own_pos, const std::vector<ObstacleView>& obstacles,
                       const Mat6& omega_t_max, const PotentialConfig& p);

// Adds the summed tangential force to entry 0 of the repulsion sequence;
// every other entry is untouched.
std::vector<Vec3> combine_tangential(const std::vector<Vec3>& repulsion,
                                     const Vec3& tangential_at_0);

}  // namespace dqmpc

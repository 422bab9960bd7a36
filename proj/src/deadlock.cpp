#include "dqmpc/deadlock.hpp"

#include <cmath>
#include <stdexcept>

namespace dqmpc {

std::string to_string(Method m) {
    switch (m) {
        case Method::baseline: return "baseline";
        case Method::srd: return "srd";
        case Method::approach_angle: return "approach_angle";
        case Method::tangential_band: return "tangential_band";
    }
    return "baseline";
}

Method method_from_string(const std::string& s) {
    if (s == "baseline") return Method::baseline;
    if (s == "srd") return Method::srd;
    if (s == "approach_angle") return Method::approach_angle;
    if (s == "tangential_band") return Method::tangential_band;
    throw std::invalid_argument("unknown method: " + s);
}

Vec3 srd_destination(const Vec3& target_pos, double psi, double d_track, double h_gnd,
                     double grad_norm, int swivel_sign, const PotentialConfig& p) {
    const double angle = psi + swivel_sign * p.k_s * grad_norm;
    return target_pos + Vec3(d_track * std::cos(angle), d_track * std::sin(angle), h_gnd);
}

Vec3 approach_angle_force(const Vec3& own_pos_n, const Vec3& dest, const Vec3& target_pos,
                          const Vec3& obstacle_pos_n, double grad_norm, int tie_sign,
                          const PotentialConfig& p, AnomalyLog* log) {
    const Eigen::Vector2d rel_own = (own_pos_n - target_pos).head<2>();
    const Eigen::Vector2d rel_obs = (obstacle_pos_n - target_pos).head<2>();
    if (rel_own.norm() <= 1e-12 || rel_obs.norm() <= 1e-12) {
        note_anomaly(log, "approach_angle_force: position on target, no bearing");
        return Vec3::Zero();
    }
    const double theta_r = std::atan2(rel_own.y(), rel_own.x());
    const double theta_o = std::atan2(rel_obs.y(), rel_obs.x());
    const double dtheta = wrap_angle(theta_r - theta_o);

    const double mag = grad_norm * f_hyp_angle(dtheta * dtheta, p);
    if (mag == 0.0) return Vec3::Zero();

    const Eigen::Vector2d beta = (own_pos_n - dest).head<2>();
    if (beta.norm() <= 1e-12) {
        note_anomaly(log, "approach_angle_force: agent on destination, no approach direction");
        return Vec3::Zero();
    }
    // Horizontal unit vector orthogonal to the approach direction, oriented
    // so the push moves the bearing away from the obstacle's.
    Eigen::Vector2d beta_hat(-beta.y(), beta.x());
    beta_hat.normalize();
    const Eigen::Vector2d t_hat(-rel_own.y(), rel_own.x());  // increasing bearing
    const double away = dtheta > 0.0 ? 1.0 : (dtheta < 0.0 ? -1.0 : double(tie_sign));
    const double align = beta_hat.dot(t_hat);
    const double sigma = (align < 0.0 ? -1.0 : 1.0) * away;

    return Vec3(sigma * mag * beta_hat.x(), sigma * mag * beta_hat.y(), 0.0);
}

std::vector<Vec3> combine_approach_angle(const std::vector<Vec3>& repulsion,
                                         const std::vector<Vec3>& angle_forces) {
    if (repulsion.size() != angle_forces.size()) {
        throw std::invalid_argument("combine_approach_angle: sequence lengths differ");
    }
    std::vector<Vec3> out(repulsion.size());
    for (std::size_t k = 0; k < repulsion.size(); ++k) out[k] = repulsion[k] + angle_forces[k];
    return out;
}

Vec3 tangential_force(const Vec3& own_pos, const Vec3& obstacle_pos_0, double grad_norm,
                      double psi, const PotentialConfig& p, AnomalyLog* log) {
    const Eigen::Vector2d radial = (own_pos - obstacle_pos_0).head<2>();
    const double rn = radial.norm();
    if (rn <= 1e-12) {
        note_anomaly(log, "tangential_force: coincident horizontal positions");
        return Vec3::Zero();
    }
    // +90 degrees (anticlockwise) of the radial; flipped for negative psi.
    Eigen::Vector2d t(-radial.y() / rn, radial.x() / rn);
    if (psi < 0.0) t = -t;
    const double mag = p.k_tang * grad_norm;
    return Vec3(mag * t.x(), mag * t.y(), 0.0);
}

BandStatus band_status(const Vec3& own_pos, const std::vector<ObstacleView>& obstacles,
                       const Mat6& omega_t_max, const PotentialConfig& p) {
    BandStatus bs;
    bs.effective_omega_t = omega_t_max;
    for (const ObstacleView& obs : obstacles) {
        if ((own_pos - obs.current_position).norm() <= p.d_safe + p.d_band) {
            bs.inside = true;
            bs.effective_omega_t = p.omega_t_min_scale * omega_t_max;
            break;
        }
    }
    return bs;
}

std::vector<Vec3> combine_tangential(const std::vector<Vec3>& repulsion,
                                     const Vec3& tangential_at_0) {
    if (repulsion.empty()) {
        throw std::invalid_argument("combine_tangential: empty repulsion sequence");
    }
    std::vector<Vec3> out = repulsion;
    out[0] += tangential_at_0;
    return out;
}

}  // namespace dqmpc

#include "dqmpc/potential_fields.hpp"

#include <algorithm>
#include <stdexcept>

namespace dqmpc {

void PotentialConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(what);
    };
    require(d_min > 0.0 && d_safe > d_min, "PotentialConfig: need 0 < d_min < d_safe");
    require(k_rep > 0.0, "PotentialConfig: k_rep must be positive");
    require(f_cap > 0.0, "PotentialConfig: f_cap must be positive");
    require(theta_safe > 0.0, "PotentialConfig: theta_safe must be positive");
    require(k_s >= 0.0, "PotentialConfig: k_s must be nonnegative");
    require(k_tang >= 0.0, "PotentialConfig: k_tang must be nonnegative");
    require(d_band > 0.0, "PotentialConfig: d_band must be positive");
    require(omega_t_min_scale > 0.0 && omega_t_min_scale <= 1.0,
            "PotentialConfig: omega_t_min_scale must be in (0, 1]");
}

namespace {

// Shared hyperbolic shape: cap below lo, zero at and beyond hi.
double hyp(double d, double lo, double hi, double k, double cap) {
    if (d >= hi) return 0.0;
    if (d <= lo) return cap;
    return std::min(cap, k * (1.0 / (d - lo) - 1.0 / (hi - lo)));
}

}  // namespace

double f_hyp(double d, const PotentialConfig& p) {
    return hyp(d, p.d_min, p.d_safe, p.k_rep, p.f_cap);
}

double f_hyp_angle(double q, const PotentialConfig& p) {
    return hyp(q, 0.0, p.theta_safe * p.theta_safe, p.k_rep, p.f_cap);
}

Vec3 repulsive_force(const Vec3& own, const Vec3& obs, const PotentialConfig& p,
                     AnomalyLog* log) {
    const Vec3 delta = own - obs;
    const double d = delta.norm();
    if (d <= 1e-12) {
        // No direction to push along; pick +x so the magnitude is preserved.
        note_anomaly(log, "repulsive_force: coincident points, using +x");
        return Vec3(p.f_cap, 0.0, 0.0);
    }
    const double mag = f_hyp(d, p);
    if (mag == 0.0) return Vec3::Zero();
    return (mag / d) * delta;
}

std::vector<Vec3> horizon_forces(const std::vector<Vec3>& own_prev_prediction,
                                 const std::vector<ObstacleView>& obstacles,
                                 const PotentialConfig& p, AnomalyLog* log) {
    const std::size_t n = own_prev_prediction.size();
    if (n == 0) throw std::invalid_argument("horizon_forces: empty own prediction");

    std::vector<Vec3> forces(n, Vec3::Zero());
    for (const ObstacleView& obs : obstacles) {
        if (obs.horizon_positions) {
            if (obs.horizon_positions->size() != n) {
                throw std::invalid_argument(
                    "horizon_forces: obstacle trajectory length does not match horizon");
            }
            for (std::size_t k = 0; k < n; ++k) {
                forces[k] += repulsive_force(own_prev_prediction[k], (*obs.horizon_positions)[k],
                                             p, log);
            }
        } else {
            // No trajectory known: hold the instantaneous force over the
            // whole horizon.
            const Vec3 f0 = repulsive_force(own_prev_prediction[0], obs.current_position, p, log);
            for (std::size_t k = 0; k < n; ++k) forces[k] += f0;
        }
    }
    return forces;
}

}  // namespace dqmpc

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

namespace dqmpc {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Position/velocity pair of a single vehicle.
struct AgentState {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
};

enum class QpStatus { optimal, relaxed, failed };

std::string to_string(QpStatus s);
QpStatus qp_status_from_string(const std::string& s);

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
    double r = std::remainder(a, 2.0 * M_PI);
    if (r <= -M_PI) r += 2.0 * M_PI;
    return r;
}

// Collects rare geometric/numeric events (coincident points, degenerate
// angles, relaxed solves) so runs can report them without interrupting
// planning. Passing nullptr everywhere is fine.
struct AnomalyLog {
    std::vector<std::string> notes;
    void add(std::string note) { notes.push_back(std::move(note)); }
};

inline void note_anomaly(AnomalyLog* log, const char* what) {
    if (log) log->add(what);
}

}  // namespace dqmpc

#include "dqmpc/sim_world.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dqmpc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(ExecutionMode m) {
    return m == ExecutionMode::receding_horizon ? "receding_horizon" : "waypoint_servo";
}

ExecutionMode execution_mode_from_string(const std::string& s) {
    if (s == "receding_horizon") return ExecutionMode::receding_horizon;
    if (s == "waypoint_servo") return ExecutionMode::waypoint_servo;
    throw std::invalid_argument("unknown execution mode: " + s);
}

std::string to_string(Schedule s) {
    return s == Schedule::lockstep ? "lockstep" : "random_order";
}

Schedule schedule_from_string(const std::string& s) {
    if (s == "lockstep") return Schedule::lockstep;
    if (s == "random_order") return Schedule::random_order;
    throw std::invalid_argument("unknown schedule: " + s);
}

Vec3 TargetScript::eval(double t) const {
    if (waypoints.empty()) return Vec3::Zero();
    if (t <= waypoints.front().time) return waypoints.front().position;
    // Last waypoint at or before t. Duplicate timestamps land on the later
    // entry, so a scripted jump takes effect at its own instant.
    std::size_t idx = 0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        if (waypoints[i].time <= t) idx = i;
    }
    if (idx + 1 == waypoints.size()) return waypoints.back().position;
    const Waypoint& a = waypoints[idx];
    const Waypoint& b = waypoints[idx + 1];
    const double alpha = (t - a.time) / (b.time - a.time);
    return a.position + alpha * (b.position - a.position);
}

WorldState make_world(std::vector<AgentContext> agents, std::vector<Vec3> static_obstacles,
                      TargetScript script, ExecutionMode mode, Schedule schedule,
                      ServoGains servo, std::uint64_t seed) {
    WorldState w;
    w.agents = std::move(agents);
    w.static_obstacles = std::move(static_obstacles);
    w.target_script = std::move(script);
    w.mode = mode;
    w.schedule = schedule;
    w.servo = servo;
    w.seed = seed;
    w.rng.seed(seed);
    w.time = 0.0;
    w.target_pos = w.target_script.eval(0.0);

    // An empty world is legal (only the target moves); it keeps the default
    // step period.
    if (!w.agents.empty()) w.dt = w.agents.front().mpc.dt;
    for (AgentContext& a : w.agents) {
        a.mpc.validate();
        a.potential.validate();
        if (a.mpc.dt != w.dt) {
            throw std::invalid_argument("make_world: all agents must share the same dt");
        }
        // Before the first solve the best prediction is standing still.
        a.prev_prediction.assign(a.mpc.horizon_n + 1, a.state.position);
        a.prev_grad_norm = 0.0;
    }
    w.published.resize(w.agents.size());
    w.last_plans.resize(w.agents.size());
    return w;
}

namespace {

std::vector<ObstacleView> snapshot_for(const WorldState& w, std::size_t self,
                                       const std::vector<HorizonTrajectory>& published) {
    std::vector<ObstacleView> views;
    views.reserve(w.agents.size() - 1 + w.static_obstacles.size());
    for (std::size_t j = 0; j < w.agents.size(); ++j) {
        if (j == self) continue;
        ObstacleView v;
        v.kind = ObstacleView::Kind::neighbor_agent;
        v.current_position = w.agents[j].state.position;
        if (!published[j].positions.empty()) v.horizon_positions = published[j].positions;
        views.push_back(std::move(v));
    }
    for (const Vec3& p : w.static_obstacles) {
        ObstacleView v;
        v.kind = ObstacleView::Kind::static_obstacle;
        v.current_position = p;
        views.push_back(std::move(v));
    }
    return views;
}

void integrate(AgentState& s, const Vec3& accel, double dt) {
    s.position += dt * s.velocity + 0.5 * dt * dt * accel;
    s.velocity += dt * accel;
}

char fmt_buf[64];

void append_num(std::string& out, double v) {
    std::snprintf(fmt_buf, sizeof(fmt_buf), "%.17g", v);
    out += fmt_buf;
}

}  // namespace

void step(WorldState& w) {
    const std::size_t m = w.agents.size();
    const double dt = w.dt;
    const double new_time = w.time + dt;
    w.target_pos = w.target_script.eval(new_time);

    // Planning order. random_order draws a fresh seeded permutation each
    // step; agents later in the order see trajectories published earlier in
    // the same step.
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    if (w.schedule == Schedule::random_order && m > 1) {
        for (std::size_t i = m - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(w.rng() % (i + 1));
            std::swap(order[i], order[j]);
        }
    }

    std::vector<PlanOutput> plans(m);
    for (const std::size_t k : order) {
        const std::vector<ObstacleView> snapshot = snapshot_for(w, k, w.published);
        plans[k] = plan_step(w.agents[k], snapshot, w.target_pos);
        plans[k].shared_trajectory.stamp = new_time;
        if (w.schedule == Schedule::random_order) {
            w.published[k] = plans[k].shared_trajectory;
        }
    }
    if (w.schedule == Schedule::lockstep) {
        for (std::size_t k = 0; k < m; ++k) w.published[k] = plans[k].shared_trajectory;
    }

    // All agents move simultaneously once every plan for this step is fixed.
    std::vector<Vec3> applied(m);
    for (std::size_t k = 0; k < m; ++k) {
        AgentContext& a = w.agents[k];
        if (w.mode == ExecutionMode::receding_horizon) {
            applied[k] = plans[k].control_0 + plans[k].force_0 + a.mpc.gravity;
        } else {
            const double kp = w.servo.k_p;
            const double kv = 2.0 * std::sqrt(kp);  // critically damped
            Vec3 cmd = kp * (plans[k].waypoint_pos - a.state.position) +
                       kv * (plans[k].waypoint_vel - a.state.velocity);
            // Saturate to the net authority left after gravity.
            const Vec3 lo = a.mpc.u_min + a.mpc.gravity;
            const Vec3 hi = a.mpc.u_max + a.mpc.gravity;
            applied[k] = cmd.cwiseMax(lo).cwiseMin(hi);
        }
        integrate(a.state, applied[k], dt);
    }

    // Carry planner state into the next cycle.
    for (std::size_t k = 0; k < m; ++k) {
        AgentContext& a = w.agents[k];
        a.prev_prediction = plans[k].shared_trajectory.positions;
        a.prev_grad_norm = plans[k].grad_norm;
        if (a.dest_policy == DestinationPolicy::chase_bearing) {
            const Eigen::Vector2d rel = (a.state.position - w.target_pos).head<2>();
            if (rel.norm() > 1e-12) a.psi = std::atan2(rel.y(), rel.x());
            // else: keep the previous slot angle (bearing undefined on top of
            // the target).
        }
    }

    w.time = new_time;
    w.last_plans = plans;

    // Log rows with post-step state and this cycle's plan data.
    for (std::size_t k = 0; k < m; ++k) {
        RunLogRecord rec;
        rec.time = new_time;
        rec.agent = w.agents[k].id;
        rec.position = w.agents[k].state.position;
        rec.velocity = w.agents[k].state.velocity;
        rec.accel = applied[k];
        rec.force0 = plans[k].force_0;
        rec.grad_norm = plans[k].grad_norm;
        rec.destination = plans[k].destination;
        rec.qp_status = plans[k].qp_status;
        double dp = kInf;
        for (std::size_t j = 0; j < m; ++j) {
            if (j != k) dp = std::min(dp, (w.agents[k].state.position -
                                           w.agents[j].state.position).norm());
        }
        double dobs = kInf;
        for (const Vec3& p : w.static_obstacles) {
            dobs = std::min(dobs, (w.agents[k].state.position - p).norm());
        }
        rec.min_pair_dist = dp;
        rec.min_obs_dist = dobs;
        w.log.records.push_back(rec);

        if (plans[k].qp_status == QpStatus::relaxed) {
            std::ostringstream ev;
            ev << "t=" << new_time << " agent=" << w.agents[k].id
               << " qp_relaxed slack=" << plans[k].slack;
            w.log.events.push_back(ev.str());
        } else if (plans[k].qp_status == QpStatus::failed) {
            std::ostringstream ev;
            ev << "t=" << new_time << " agent=" << w.agents[k].id << " qp_failed";
            w.log.events.push_back(ev.str());
        }
        for (const std::string& note : plans[k].anomalies) {
            std::ostringstream ev;
            ev << "t=" << new_time << " agent=" << w.agents[k].id << " " << note;
            w.log.events.push_back(ev.str());
        }
    }
}

std::pair<double, double> min_separation(const WorldState& w) {
    double dp = kInf;
    for (std::size_t i = 0; i < w.agents.size(); ++i) {
        for (std::size_t j = i + 1; j < w.agents.size(); ++j) {
            dp = std::min(dp, (w.agents[i].state.position - w.agents[j].state.position).norm());
        }
    }
    double dobs = kInf;
    for (const AgentContext& a : w.agents) {
        for (const Vec3& p : w.static_obstacles) {
            dobs = std::min(dobs, (a.state.position - p).norm());
        }
    }
    return {dp, dobs};
}

static const char* kLogHeader =
    "time,agent,pos_x,pos_y,pos_z,vel_x,vel_y,vel_z,acc_x,acc_y,acc_z,"
    "force_x,force_y,force_z,grad_norm,dest_x,dest_y,dest_z,qp_status,"
    "min_pair_dist,min_obs_dist";

void serialize_log(const RunLog& log, std::ostream& out) {
    std::string buf;
    buf.reserve(64 * (log.records.size() + 1));
    buf += kLogHeader;
    buf += '\n';
    for (const RunLogRecord& r : log.records) {
        append_num(buf, r.time);
        buf += ',';
        buf += std::to_string(r.agent);
        const double nums[] = {r.position.x(), r.position.y(), r.position.z(),
                               r.velocity.x(), r.velocity.y(), r.velocity.z(),
                               r.accel.x(),    r.accel.y(),    r.accel.z(),
                               r.force0.x(),   r.force0.y(),   r.force0.z(),
                               r.grad_norm,
                               r.destination.x(), r.destination.y(), r.destination.z()};
        for (const double v : nums) {
            buf += ',';
            append_num(buf, v);
        }
        buf += ',';
        buf += to_string(r.qp_status);
        buf += ',';
        append_num(buf, r.min_pair_dist);
        buf += ',';
        append_num(buf, r.min_obs_dist);
        buf += '\n';
    }
    out << buf;
}

std::string serialize_log(const RunLog& log) {
    std::ostringstream os;
    serialize_log(log, os);
    return os.str();
}

RunLog parse_log(std::istream& in) {
    RunLog log;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("parse_log: empty input");
    if (line != kLogHeader) throw std::runtime_error("parse_log: unexpected header");

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (fields.size() != 21) {
            throw std::runtime_error("parse_log: line " + std::to_string(lineno) +
                                     ": expected 21 fields, got " +
                                     std::to_string(fields.size()));
        }
        auto num = [&](int idx) {
            char* end = nullptr;
            const double v = std::strtod(fields[idx].c_str(), &end);
            if (end == fields[idx].c_str()) {
                throw std::runtime_error("parse_log: line " + std::to_string(lineno) +
                                         ": bad number in field " + std::to_string(idx + 1));
            }
            return v;
        };
        RunLogRecord r;
        r.time = num(0);
        r.agent = static_cast<int>(num(1));
        r.position = Vec3(num(2), num(3), num(4));
        r.velocity = Vec3(num(5), num(6), num(7));
        r.accel = Vec3(num(8), num(9), num(10));
        r.force0 = Vec3(num(11), num(12), num(13));
        r.grad_norm = num(14);
        r.destination = Vec3(num(15), num(16), num(17));
        r.qp_status = qp_status_from_string(fields[18]);
        r.min_pair_dist = num(19);
        r.min_obs_dist = num(20);
        log.records.push_back(r);
    }
    return log;
}

ConvergenceResult check_convergence(const std::vector<std::pair<double, double>>& series,
                                    double eps_conv, double hold) {
    ConvergenceResult res;
    double streak_start = 0.0;
    bool in_streak = false;
    for (const auto& [t, err] : series) {
        if (err < eps_conv) {
            if (!in_streak) {
                in_streak = true;
                streak_start = t;
            }
            if (t - streak_start >= hold - 1e-9) {
                res.converged = true;
                res.converged_at = streak_start;
                return res;
            }
        } else {
            in_streak = false;
        }
    }
    return res;
}

ConvergenceResult check_convergence(const RunLog& log, double eps_conv, double hold,
                                    std::optional<std::pair<double, double>> initial_sample) {
    std::vector<std::pair<double, double>> series;
    if (initial_sample) series.push_back(*initial_sample);
    double cur_time = -kInf;
    double cur_max = 0.0;
    for (const RunLogRecord& r : log.records) {
        if (r.time != cur_time) {
            if (cur_time != -kInf) series.emplace_back(cur_time, cur_max);
            cur_time = r.time;
            cur_max = 0.0;
        }
        cur_max = std::max(cur_max, (r.position - r.destination).norm());
    }
    if (cur_time != -kInf) series.emplace_back(cur_time, cur_max);
    return check_convergence(series, eps_conv, hold);
}

}  // namespace dqmpc

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <utility>

#include "dqmpc/agent_planner.hpp"

namespace dqmpc {

// How planned cycles turn into motion: receding_horizon applies the first
// solved control (plus force and gravity) directly; waypoint_servo tracks the
// published waypoint with a critically damped second-order law saturated to
// the configured net acceleration authority.
enum class ExecutionMode { receding_horizon, waypoint_servo };
enum class Schedule { lockstep, random_order };

std::string to_string(ExecutionMode m);
ExecutionMode execution_mode_from_string(const std::string& s);
std::string to_string(Schedule s);
Schedule schedule_from_string(const std::string& s);

struct ServoGains {
    double k_p = 4.0;  // position gain; velocity gain is 2*sqrt(k_p)
};

// Piecewise-linear target motion. Duplicate timestamps encode an
// instantaneous jump (the later waypoint wins at that instant).
struct TargetScript {
    struct Waypoint {
        double time = 0.0;
        Vec3 position = Vec3::Zero();
    };
    std::vector<Waypoint> waypoints;
    Vec3 eval(double t) const;
};

// One log row: post-step state of one agent plus what its planner produced
// this cycle. min_pair_dist is the distance to the nearest other agent,
// min_obs_dist to the nearest static obstacle (inf when none exist).
struct RunLogRecord {
    double time = 0.0;
    int agent = 0;
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    Vec3 accel = Vec3::Zero();
    Vec3 force0 = Vec3::Zero();
    double grad_norm = 0.0;
    Vec3 destination = Vec3::Zero();
    QpStatus qp_status = QpStatus::optimal;
    double min_pair_dist = 0.0;
    double min_obs_dist = 0.0;
};

struct RunLog {
    std::vector<RunLogRecord> records;
    std::vector<std::string> events;
};

// CSV with one header row, %.17g fields (parse-back is bit exact).
void serialize_log(const RunLog& log, std::ostream& out);
std::string serialize_log(const RunLog& log);
RunLog parse_log(std::istream& in);  // throws std::runtime_error with line info

struct WorldState {
    double time = 0.0;
    double dt = MpcConfig{}.dt;  // step period; agents must all share it
    std::vector<AgentContext> agents;
    std::vector<Vec3> static_obstacles;
    TargetScript target_script;
    Vec3 target_pos = Vec3::Zero();
    ExecutionMode mode = ExecutionMode::receding_horizon;
    Schedule schedule = Schedule::lockstep;
    ServoGains servo;
    std::uint64_t seed = 0;
    std::mt19937_64 rng;
    // Latest trajectory each agent has published (empty before first plan).
    std::vector<HorizonTrajectory> published;
    std::vector<PlanOutput> last_plans;
    RunLog log;
};

// Builds a world at t=0; seeds the rng, validates configs, primes each
// agent's previous prediction with its start position.
WorldState make_world(std::vector<AgentContext> agents, std::vector<Vec3> static_obstacles,
                      TargetScript script, ExecutionMode mode, Schedule schedule,
                      ServoGains servo, std::uint64_t seed);

// Advances one planning period: move the target, plan every agent in
// schedule order (random_order: seeded permutation; later agents see
// trajectories already published this step), integrate everyone one dt,
// append log rows for the new time.
void step(WorldState& w);

// (min over agent pairs, min over agent/static-obstacle pairs) of current
// positions; +inf when no such pair exists.
std::pair<double, double> min_separation(const WorldState& w);

struct ConvergenceResult {
    bool converged = false;
    double converged_at = 0.0;
};

// Scans (time, max over agents of |position - destination|) samples for the
// earliest streak below eps_conv lasting at least hold seconds.
ConvergenceResult check_convergence(const std::vector<std::pair<double, double>>& max_error_series,
                                    double eps_conv, double hold);

// Same scan over a parsed/recorded log; initial_sample optionally prepends
// the pre-run state (time, max error) so convergence can be detected from t=0.
ConvergenceResult check_convergence(const RunLog& log, double eps_conv, double hold,
                                    std::optional<std::pair<double, double>> initial_sample = {});

}  // namespace dqmpc

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dqmpc/sim_world.hpp"

namespace dqmpc {

// Everything needed to reproduce a run. build_scenario() fills in the named
// preset; config files and CLI flags then override fields.
struct ScenarioSpec {
    std::string name;

    struct AgentStart {
        Vec3 position = Vec3::Zero();
        double psi = 0.0;
        double d_track = 4.0;
        DestinationPolicy dest_policy = DestinationPolicy::chase_bearing;
    };
    std::vector<AgentStart> agents;
    double h_gnd = 5.0;

    std::vector<Vec3> static_obstacles;
    TargetScript target_script;

    Method method = Method::baseline;
    ExecutionMode mode = ExecutionMode::receding_horizon;
    Schedule schedule = Schedule::random_order;
    ServoGains servo;

    std::uint64_t seed = 1;
    double duration = 60.0;  // simulated cap [s]
    double eps_conv = 0.2;   // convergence radius [m]
    double hold = 1.0;       // required time inside eps_conv [s]

    MpcConfig mpc;
    PotentialConfig potential;

    // Throws std::invalid_argument on inconsistent setups (agents starting
    // within d_min of each other or outside the position bounds, etc).
    void validate() const;
};

// Presets: scenario1 (5 trackers, drastic target jump), scenario2 (3
// trackers plus 2 hovering obstacle vehicles), scenario3 (1 tracker against
// a U-shaped obstacle wall), antipodal (8 agents swapping across a circle).
ScenarioSpec build_scenario(const std::string& name);

struct RunSummary {
    bool converged = false;
    double converged_at = 0.0;
    double min_pairwise = 0.0;
    double min_obstacle = 0.0;
    int relaxations = 0;
    int failures = 0;
    int plan_calls = 0;
    int steps = 0;
    double final_max_grad_norm = 0.0;
    bool safety_violation = false;  // any logged distance below d_min
    double wall_seconds = 0.0;
};

// Executes the scenario until convergence holds or the duration cap, filling
// out_log (optional) with the serializable run log.
RunSummary run(const ScenarioSpec& spec, RunLog* out_log = nullptr);

// Formats the summary as single-record key=value text (also what the CLI
// writes next to the log).
std::string format_summary(const RunSummary& s);

WorldState make_world_from_spec(const ScenarioSpec& spec);

}  // namespace dqmpc

#include "dqmpc/config_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dqmpc {

namespace {

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': bad number '" + value + "'");
    }
    if (trim(value.substr(used)) != "") {
        throw std::invalid_argument("config key '" + key + "': trailing junk in '" + value + "'");
    }
    return v;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& value,
                                  std::size_t count) {
    std::istringstream is(value);
    std::vector<double> out;
    double v;
    while (is >> v) out.push_back(v);
    if (!is.eof() || out.size() != count) {
        throw std::invalid_argument("config key '" + key + "': expected " +
                                    std::to_string(count) + " numbers, got '" + value + "'");
    }
    return out;
}

Vec3 parse_vec3(const std::string& key, const std::string& value) {
    const auto v = parse_doubles(key, value, 3);
    return Vec3(v[0], v[1], v[2]);
}

long parse_int(const std::string& key, const std::string& value) {
    const double v = parse_double(key, value);
    const long i = std::lround(v);
    if (static_cast<double>(i) != v) {
        throw std::invalid_argument("config key '" + key + "': expected an integer, got '" +
                                    value + "'");
    }
    return i;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap map;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        }
        map[key] = value;
    }
    return map;
}

ConfigMap load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

const std::map<std::string, std::string>& config_key_help() {
    static const std::map<std::string, std::string> help = {
        {"method", "deadlock method: baseline | srd | approach_angle | tangential_band"},
        {"mode", "execution mode: receding_horizon | waypoint_servo"},
        {"schedule", "planning order: lockstep | random_order"},
        {"seed", "scheduler rng seed (integer)"},
        {"duration", "simulated duration cap in seconds"},
        {"eps_conv", "convergence radius in meters"},
        {"hold", "time all agents must stay converged, seconds"},
        {"servo_k_p", "waypoint servo position gain"},
        {"dt", "planner/sim step in seconds"},
        {"horizon_n", "prediction horizon steps (integer)"},
        {"omega_i", "input weight diagonal, 3 values"},
        {"omega_t", "terminal weight diagonal, 6 values"},
        {"u_min", "input lower bounds, 3 values"},
        {"u_max", "input upper bounds, 3 values"},
        {"x_min", "position lower bounds, 3 values"},
        {"x_max", "position upper bounds, 3 values"},
        {"v_min", "velocity lower bounds, 3 values"},
        {"v_max", "velocity upper bounds, 3 values"},
        {"gravity", "gravity acceleration, 3 values"},
        {"slack_penalty", "quadratic weight on the shared relaxation slack"},
        {"d_min", "repulsion saturation distance, meters"},
        {"d_safe", "repulsion influence distance, meters"},
        {"k_rep", "repulsion gain"},
        {"f_cap", "repulsion magnitude cap"},
        {"theta_safe", "approach-angle influence half width, radians"},
        {"k_s", "swivel gain on gradient magnitude"},
        {"k_tang", "tangential force gain"},
        {"d_band", "tangential band width beyond d_safe, meters"},
        {"omega_t_min_scale", "omega_t scale factor inside the band"},
        {"h_gnd", "hover height of the destination surface, meters"},
    };
    return help;
}

void apply_config(ScenarioSpec& spec, const ConfigMap& overrides) {
    for (const auto& [key, value] : overrides) {
        if (key == "method") {
            spec.method = method_from_string(value);
        } else if (key == "mode") {
            spec.mode = execution_mode_from_string(value);
        } else if (key == "schedule") {
            spec.schedule = schedule_from_string(value);
        } else if (key == "seed") {
            spec.seed = static_cast<std::uint64_t>(parse_int(key, value));
        } else if (key == "duration") {
            spec.duration = parse_double(key, value);
        } else if (key == "eps_conv") {
            spec.eps_conv = parse_double(key, value);
        } else if (key == "hold") {
            spec.hold = parse_double(key, value);
        } else if (key == "servo_k_p") {
            spec.servo.k_p = parse_double(key, value);
        } else if (key == "dt") {
            spec.mpc.dt = parse_double(key, value);
        } else if (key == "horizon_n") {
            spec.mpc.horizon_n = static_cast<int>(parse_int(key, value));
        } else if (key == "omega_i") {
            const auto v = parse_doubles(key, value, 3);
            spec.mpc.omega_i = Vec3(v[0], v[1], v[2]).asDiagonal();
        } else if (key == "omega_t") {
            const auto v = parse_doubles(key, value, 6);
            Vec6 d;
            d << v[0], v[1], v[2], v[3], v[4], v[5];
            spec.mpc.omega_t = d.asDiagonal();
        } else if (key == "u_min") {
            spec.mpc.u_min = parse_vec3(key, value);
        } else if (key == "u_max") {
            spec.mpc.u_max = parse_vec3(key, value);
        } else if (key == "x_min") {
            spec.mpc.x_min = parse_vec3(key, value);
        } else if (key == "x_max") {
            spec.mpc.x_max = parse_vec3(key, value);
        } else if (key == "v_min") {
            spec.mpc.v_min = parse_vec3(key, value);
        } else if (key == "v_max") {
            spec.mpc.v_max = parse_vec3(key, value);
        } else if (key == "gravity") {
            spec.mpc.gravity = parse_vec3(key, value);
        } else if (key == "slack_penalty") {
            spec.mpc.slack_penalty = parse_double(key, value);
        } else if (key == "d_min") {
            spec.potential.d_min = parse_double(key, value);
        } else if (key == "d_safe") {
            spec.potential.d_safe = parse_double(key, value);
        } else if (key == "k_rep") {
            spec.potential.k_rep = parse_double(key, value);
        } else if (key == "f_cap") {
            spec.potential.f_cap = parse_double(key, value);
        } else if (key == "theta_safe") {
            spec.potential.theta_safe = parse_double(key, value);
        } else if (key == "k_s") {
            spec.potential.k_s = parse_double(key, value);
        } else if (key == "k_tang") {
            spec.potential.k_tang = parse_double(key, value);
        } else if (key == "d_band") {
            spec.potential.d_band = parse_double(key, value);
        } else if (key == "omega_t_min_scale") {
            spec.potential.omega_t_min_scale = parse_double(key, value);
        } else if (key == "h_gnd") {
            spec.h_gnd = parse_double(key, value);
        } else {
            throw std::invalid_argument("unknown config key: " + key);
        }
    }
    spec.validate();
}

}  // namespace dqmpc

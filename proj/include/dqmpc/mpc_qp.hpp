#pragma once

#include <vector>

#include "dqmpc/mpc_config.hpp"
#include "dqmpc/types.hpp"

namespace dqmpc {

// Condensed QP over the stacked control vector u = [u(0); ...; u(N)],
// 3*(N+1) variables. States are eliminated through the exact rollout, so
//   J(u) = 1/2 u' H u + c' u + constant
// reproduces objective() for any control sequence. Rows come in a fixed
// order: 3*(N+1) input rows (identity, hard), then per step n = 1..N+1
// three position rows and three velocity rows (soft via the shared slack).
struct QpProblem {
    Eigen::MatrixXd hessian;
    Eigen::VectorXd linear_term;
    double constant = 0.0;

    struct Row {
        Eigen::VectorXd coeffs;
        double lower = 0.0;
        double upper = 0.0;
    };
    std::vector<Row> inequality_rows;
    int input_row_count = 0;  // rows [0, input_row_count) are hard input bounds

    double slack_penalty = 1e6;

    // Everything solve() needs to reconstruct trajectories and report.
    AgentState initial;
    Vec3 destination = Vec3::Zero();
    std::vector<Vec3> forces;  // f(0..N)
    MpcConfig cfg;
};

struct QpSolution {
    QpStatus status = QpStatus::failed;
    std::vector<Vec3> controls;          // u(0..N)
    std::vector<Vec3> forces;            // f(0..N), copied from the problem
    std::vector<AgentState> trajectory;  // predicted states, steps 1..N+1
    double objective_value = 0.0;        // original objective, slack excluded
    double slack = 0.0;                  // shared slack magnitude (0 when optimal)
    double kkt_residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

// Exact discrete rollout of x(n+1) = A x(n) + B (u(n) + f(n) + g) with
// A = [I dt*I; 0 I], B = [dt^2/2 I; dt I]. forces may be empty (treated as
// zero) or have the same length as controls.
std::vector<AgentState> rollout(const AgentState& initial, const std::vector<Vec3>& controls,
                                const std::vector<Vec3>& forces, const MpcConfig& cfg);

// J = sum_n (u+f+g)' omega_i (u+f+g) + e' omega_t e with
// e = [x(N+1) - destination; v(N+1)].
double objective(const AgentState& initial, const std::vector<Vec3>& controls,
                 const std::vector<Vec3>& forces, const MpcConfig& cfg, const Vec3& destination);

QpProblem condense(const AgentState& initial, const std::vector<Vec3>& forces,
                   const MpcConfig& cfg, const Vec3& destination);

// Two-phase solve: first with state rows hard (-> optimal), then, if that is
// infeasible, with one shared nonnegative slack on every state row,
// quadratically penalized (-> relaxed). Budget overrun or numerical failure
// -> failed; callers hold position in that case. Deterministic.
QpSolution solve(const QpProblem& qp);

// Gradient of the objective at a solution with respect to the terminal
// position (through the terminal cost) and the last control: positional
// block of 2*omega_t*e, plus 2*omega_i*(u(N)+f(N)+g) + 2*B'*omega_t*e.
Vec3 gradient_terminal(const QpSolution& sol, const MpcConfig& cfg, const Vec3& destination);

}  // namespace dqmpc

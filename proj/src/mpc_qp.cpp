#include "dqmpc/mpc_qp.hpp"

#include <stdexcept>

#include "dqmpc/qp_solver.hpp"

namespace dqmpc {

namespace {

Mat6 make_a(double dt) {
    Mat6 A = Mat6::Identity();
    A.topRightCorner<3, 3>() = dt * Mat3::Identity();
    return A;
}

Eigen::Matrix<double, 6, 3> make_b(double dt) {
    Eigen::Matrix<double, 6, 3> B;
    B.topRows<3>() = 0.5 * dt * dt * Mat3::Identity();
    B.bottomRows<3>() = dt * Mat3::Identity();
    return B;
}

Vec6 stack_state(const AgentState& s) {
    Vec6 z;
    z << s.position, s.velocity;
    return z;
}

void check_lengths(const std::vector<Vec3>& controls, const std::vector<Vec3>& forces,
                   const char* who) {
    if (!forces.empty() && forces.size() != controls.size()) {
        throw std::invalid_argument(std::string(who) +
                                    ": forces must be empty or match controls length");
    }
}

}  // namespace

std::vector<AgentState> rollout(const AgentState& initial, const std::vector<Vec3>& controls,
                                const std::vector<Vec3>& forces, const MpcConfig& cfg) {
    check_lengths(controls, forces, "rollout");
    const Mat6 A = make_a(cfg.dt);
    const Eigen::Matrix<double, 6, 3> B = make_b(cfg.dt);

    std::vector<AgentState> out;
    out.reserve(controls.size());
    Vec6 z = stack_state(initial);
    for (std::size_t nidx = 0; nidx < controls.size(); ++nidx) {
        Vec3 w = controls[nidx];
        if (!forces.empty()) w += forces[nidx];
        w += cfg.gravity;
        z = A * z + B * w;
        out.push_back({z.head<3>(), z.tail<3>()});
    }
    return out;
}

double objective(const AgentState& initial, const std::vector<Vec3>& controls,
                 const std::vector<Vec3>& forces, const MpcConfig& cfg, const Vec3& destination) {
    check_lengths(controls, forces, "objective");
    const std::vector<AgentState> traj = rollout(initial, controls, forces, cfg);

    double j = 0.0;
    for (std::size_t nidx = 0; nidx < controls.size(); ++nidx) {
        Vec3 w = controls[nidx];
        if (!forces.empty()) w += forces[nidx];
        w += cfg.gravity;
        j += w.dot(cfg.omega_i * w);
    }
    Vec6 e;
    e << traj.back().position - destination, traj.back().velocity;
    j += e.dot(cfg.omega_t * e);
    return j;
}

QpProblem condense(const AgentState& initial, const std::vector<Vec3>& forces,
                   const MpcConfig& cfg, const Vec3& destination) {
    cfg.validate();
    const int N = cfg.horizon_n;
    const int steps = N + 1;        // controls u(0..N)
    const int nv = 3 * steps;       // stacked decision vector
    if (static_cast<int>(forces.size()) != steps) {
        throw std::invalid_argument("condense: forces must have horizon_n + 1 entries");
    }

    const Mat6 A = make_a(cfg.dt);
    const Eigen::Matrix<double, 6, 3> B = make_b(cfg.dt);

    // M[j] = A^j * B: influence of an input j steps in the past.
    std::vector<Eigen::Matrix<double, 6, 3>> M(steps);
    M[0] = B;
    for (int j = 1; j < steps; ++j) M[j] = A * M[j - 1];

    // Zero-input rollout o(n) carries the initial state, forces and gravity:
    // z(n) = o(n) + sum_{m<n} M[n-1-m] u(m).
    std::vector<Vec6> o(steps + 1);
    o[0] = stack_state(initial);
    for (int nstep = 0; nstep < steps; ++nstep) {
        o[nstep + 1] = A * o[nstep] + B * (forces[nstep] + cfg.gravity);
    }

    // Terminal-state sensitivity S: z(N+1) = o(N+1) + S u.
    Eigen::MatrixXd S(6, nv);
    for (int mctl = 0; mctl < steps; ++mctl) S.middleCols(3 * mctl, 3) = M[N - mctl];

    QpProblem qp;
    qp.cfg = cfg;
    qp.initial = initial;
    qp.destination = destination;
    qp.forces = forces;
    qp.slack_penalty = cfg.slack_penalty;

    Vec6 zref;
    zref << destination, Vec3::Zero();
    const Vec6 efree = o[steps] - zref;

    qp.hessian = Eigen::MatrixXd::Zero(nv, nv);
    for (int mctl = 0; mctl < steps; ++mctl) {
        qp.hessian.block(3 * mctl, 3 * mctl, 3, 3) = 2.0 * cfg.omega_i;
    }
    qp.hessian.noalias() += 2.0 * S.transpose() * cfg.omega_t * S;

    qp.linear_term = Eigen::VectorXd::Zero(nv);
    qp.constant = efree.dot(cfg.omega_t * efree);
    for (int mctl = 0; mctl < steps; ++mctl) {
        const Vec3 wbar = forces[mctl] + cfg.gravity;
        qp.linear_term.segment(3 * mctl, 3) = 2.0 * (cfg.omega_i * wbar);
        qp.constant += wbar.dot(cfg.omega_i * wbar);
    }
    qp.linear_term.noalias() += 2.0 * S.transpose() * (cfg.omega_t * efree);

    // Input rows: identity, hard.
    qp.inequality_rows.reserve(3 * steps + 6 * steps);
    for (int mctl = 0; mctl < steps; ++mctl) {
        for (int axis = 0; axis < 3; ++axis) {
            QpProblem::Row row;
            row.coeffs = Eigen::VectorXd::Zero(nv);
            row.coeffs(3 * mctl + axis) = 1.0;
            row.lower = cfg.u_min(axis);
            row.upper = cfg.u_max(axis);
            qp.inequality_rows.push_back(std::move(row));
        }
    }
    qp.input_row_count = static_cast<int>(qp.inequality_rows.size());

    // State rows per predicted step 1..N+1: three position rows then three
    // velocity rows, expressed over the stacked inputs.
    for (int nstep = 1; nstep <= steps; ++nstep) {
        Eigen::MatrixXd Gn = Eigen::MatrixXd::Zero(6, nv);
        for (int mctl = 0; mctl < nstep; ++mctl) {
            Gn.middleCols(3 * mctl, 3) = M[nstep - 1 - mctl];
        }
        for (int axis = 0; axis < 6; ++axis) {
            QpProblem::Row row;
            row.coeffs = Gn.row(axis).transpose();
            const double offset = o[nstep](axis);
            if (axis < 3) {
                row.lower = cfg.x_min(axis) - offset;
                row.upper = cfg.x_max(axis) - offset;
            } else {
                row.lower = cfg.v_min(axis - 3) - offset;
                row.upper = cfg.v_max(axis - 3) - offset;
            }
            qp.inequality_rows.push_back(std::move(row));
        }
    }
    return qp;
}

namespace {

// One-sided expansion of the two-sided rows. extra_slack appends the shared
// slack variable to the state rows (and the slack nonnegativity row).
DenseQp expand_rows(const QpProblem& qp, bool with_slack) {
    const int nv = static_cast<int>(qp.hessian.rows());
    const int nx = with_slack ? nv + 1 : nv;
    const int nrows = static_cast<int>(qp.inequality_rows.size());

    DenseQp dense;
    dense.G = Eigen::MatrixXd::Zero(nx, nx);
    dense.G.topLeftCorner(nv, nv) = qp.hessian;
    dense.g0 = Eigen::VectorXd::Zero(nx);
    dense.g0.head(nv) = qp.linear_term;
    if (with_slack) dense.G(nv, nv) = 2.0 * qp.slack_penalty;

    const int m = 2 * nrows + (with_slack ? 1 : 0);
    dense.C = Eigen::MatrixXd::Zero(nx, m);
    dense.b = Eigen::VectorXd::Zero(m);
    int col = 0;
    for (int i = 0; i < nrows; ++i) {
        const QpProblem::Row& row = qp.inequality_rows[i];
        const bool soft = with_slack && i >= qp.input_row_count;
        // coeffs' u >= lower
        dense.C.col(col).head(nv) = row.coeffs;
        if (soft) dense.C(nv, col) = 1.0;
        dense.b(col) = row.lower;
        ++col;
        // -coeffs' u >= -upper
        dense.C.col(col).head(nv) = -row.coeffs;
        if (soft) dense.C(nv, col) = 1.0;
        dense.b(col) = -row.upper;
        ++col;
    }
    if (with_slack) {
        dense.C(nv, col) = 1.0;
        dense.b(col) = 0.0;
    }
    return dense;
}

std::vector<Vec3> unstack_controls(const Eigen::VectorXd& x, int steps) {
    std::vector<Vec3> u(steps);
    for (int mctl = 0; mctl < steps; ++mctl) u[mctl] = x.segment(3 * mctl, 3);
    return u;
}

}  // namespace

QpSolution solve(const QpProblem& qp) {
    constexpr int kIterationBudget = 500;
    const int steps = qp.cfg.horizon_n + 1;

    QpSolution sol;
    sol.forces = qp.forces;

    // Phase 1: all rows hard.
    const DenseQp hard = expand_rows(qp, false);
    DenseQpResult r1 = solve_dense_qp(hard, kIterationBudget);
    sol.iterations = r1.iterations;
    if (r1.solved) {
        sol.status = QpStatus::optimal;
        sol.controls = unstack_controls(r1.x, steps);
        sol.slack = 0.0;
        sol.kkt_residual = r1.kkt_residual;
    } else if (r1.infeasible) {
        // Phase 2: state rows share one nonnegative, penalized slack.
        const DenseQp soft = expand_rows(qp, true);
        DenseQpResult r2 = solve_dense_qp(soft, kIterationBudget - r1.iterations);
        sol.iterations += r2.iterations;
        if (!r2.solved) return sol;  // failed
        sol.status = QpStatus::relaxed;
        sol.controls = unstack_controls(r2.x, steps);
        sol.slack = r2.x(3 * steps);
        sol.kkt_residual = r2.kkt_residual;
    } else {
        return sol;  // budget exhausted: failed
    }

    sol.trajectory = rollout(qp.initial, sol.controls, qp.forces, qp.cfg);
    sol.objective_value =
        objective(qp.initial, sol.controls, qp.forces, qp.cfg, qp.destination);
    return sol;
}

Vec3 gradient_terminal(const QpSolution& sol, const MpcConfig& cfg, const Vec3& destination) {
    if (sol.status == QpStatus::failed) {
        throw std::invalid_argument("gradient_terminal: solution status is failed");
    }
    if (sol.trajectory.empty() || sol.controls.empty()) {
        throw std::invalid_argument("gradient_terminal: empty solution");
    }
    Vec6 e;
    e << sol.trajectory.back().position - destination, sol.trajectory.back().velocity;

    const Vec6 te = 2.0 * (cfg.omega_t * e);
    Vec3 wN = sol.controls.back() + cfg.gravity;
    if (!sol.forces.empty()) wN += sol.forces.back();

    const Eigen::Matrix<double, 6, 3> B = make_b(cfg.dt);
    return te.head<3>() + 2.0 * (cfg.omega_i * wN) + B.transpose() * te;
}

}  // namespace dqmpc

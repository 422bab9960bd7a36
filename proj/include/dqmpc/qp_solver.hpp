#pragma once

#include <Eigen/Dense>

namespace dqmpc {

// Dense strictly convex QP with one-sided linear inequalities:
//
//   minimize   1/2 x' G x + g0' x
//   subject to C' x >= b        (one column of C per constraint)
//
// G must be symmetric positive definite.
struct DenseQp {
    Eigen::MatrixXd G;
    Eigen::VectorXd g0;
    Eigen::MatrixXd C;
    Eigen::VectorXd b;
};

struct DenseQpResult {
    bool solved = false;      // optimum found and certified
    bool infeasible = false;  // constraints proven inconsistent
    int iterations = 0;       // active-set changes consumed
    Eigen::VectorXd x;
    Eigen::VectorXd lambda;   // multipliers, one per constraint, >= 0
    double kkt_residual = std::numeric_limits<double>::infinity();
};

// Dual active-set method (Goldfarb-Idnani): starts from the unconstrained
// minimizer and adds violated constraints until primal feasible, dropping
// blocking ones along the way. Finite, deterministic (most-violated rule,
// lowest index on ties), and exact at termination; a final KKT polish step
// re-solves the active-set equality system to push the residual to machine
// precision. Exceeding max_iterations returns solved=false, infeasible=false.
DenseQpResult solve_dense_qp(const DenseQp& qp, int max_iterations = 500);

// Max-norm KKT residual of (x, lambda) for the given problem: stationarity,
// primal feasibility and complementarity.
double kkt_residual(const DenseQp& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& lambda);

}  // namespace dqmpc

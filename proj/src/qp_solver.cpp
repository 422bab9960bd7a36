#include "dqmpc/qp_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dqmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Applies the Givens rotation (c, s) to columns a and b of M.
void rotate_columns(Eigen::MatrixXd& M, int a, int b, double c, double s) {
    for (int r = 0; r < M.rows(); ++r) {
        const double t1 = M(r, a);
        const double t2 = M(r, b);
        M(r, a) = c * t1 + s * t2;
        M(r, b) = -s * t1 + c * t2;
    }
}

// Re-solves the KKT equality system of the final active set on the original
// (unscaled) problem. One step of iterative refinement pushes the residual
// to machine precision when the system is well posed.
bool polish(const DenseQp& qp, const std::vector<int>& active, Eigen::VectorXd& x,
            Eigen::VectorXd& lambda) {
    const int n = static_cast<int>(qp.G.rows());
    const int q = static_cast<int>(active.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + q, n + q);
    K.topLeftCorner(n, n) = qp.G;
    for (int k = 0; k < q; ++k) {
        K.block(0, n + k, n, 1) = -qp.C.col(active[k]);
        K.block(n + k, 0, 1, n) = qp.C.col(active[k]).transpose();
    }
    Eigen::VectorXd rhs(n + q);
    rhs.head(n) = -qp.g0;
    for (int k = 0; k < q; ++k) rhs(n + k) = qp.b(active[k]);

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
    Eigen::VectorXd y = lu.solve(rhs);
    y += lu.solve(rhs - K * y);
    if (!y.allFinite()) return false;

    // Multipliers must stay (almost) nonnegative and the dropped rows
    // (almost) satisfied, otherwise the polished active set is wrong and we
    // keep the iterate from the active-set sweep.
    const double lam_tol = 1e-7 * (1.0 + y.tail(q).cwiseAbs().maxCoeff());
    for (int k = 0; k < q; ++k) {
        if (y(n + k) < -lam_tol) return false;
    }
    Eigen::VectorXd cand_lambda = Eigen::VectorXd::Zero(qp.C.cols());
    for (int k = 0; k < q; ++k) cand_lambda(active[k]) = std::max(0.0, y(n + k));
    Eigen::VectorXd cand_x = y.head(n);
    for (int i = 0; i < qp.C.cols(); ++i) {
        const double slack = qp.C.col(i).dot(cand_x) - qp.b(i);
        const double tol = 1e-7 * (1.0 + std::abs(qp.b(i)));
        if (slack < -tol) return false;
    }
    x = cand_x;
    lambda = cand_lambda;
    return true;
}

}  // namespace

double kkt_residual(const DenseQp& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& lambda) {
    Eigen::VectorXd stat = qp.G * x + qp.g0;
    if (qp.C.cols() > 0) stat.noalias() -= qp.C * lambda;
    double r = stat.lpNorm<Eigen::Infinity>();
    if (qp.C.cols() > 0) {
        const Eigen::VectorXd s = qp.C.transpose() * x - qp.b;
        for (int i = 0; i < s.size(); ++i) {
            r = std::max(r, -std::min(0.0, s(i)));
            r = std::max(r, std::abs(lambda(i) * s(i)));
            r = std::max(r, -std::min(0.0, lambda(i)));
        }
    }
    return r;
}

DenseQpResult solve_dense_qp(const DenseQp& qp_in, int max_iterations) {
    const int n = static_cast<int>(qp_in.G.rows());
    const int m = static_cast<int>(qp_in.C.cols());
    if (qp_in.G.cols() != n || qp_in.g0.size() != n) {
        throw std::invalid_argument("solve_dense_qp: inconsistent objective dimensions");
    }
    if (m > 0 && (qp_in.C.rows() != n || qp_in.b.size() != m)) {
        throw std::invalid_argument("solve_dense_qp: inconsistent constraint dimensions");
    }

    DenseQpResult res;
    res.lambda = Eigen::VectorXd::Zero(m);

    // Normalize constraint columns so feasibility tolerances mean the same
    // thing for every row; multipliers are unscaled on the way out.
    Eigen::MatrixXd C = qp_in.C;
    Eigen::VectorXd b = qp_in.b;
    Eigen::VectorXd col_scale = Eigen::VectorXd::Ones(m);
    for (int i = 0; i < m; ++i) {
        const double s = C.col(i).norm();
        if (s > 0.0) {
            col_scale(i) = s;
            C.col(i) /= s;
            b(i) /= s;
        }
    }

    Eigen::LLT<Eigen::MatrixXd> llt(qp_in.G);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("solve_dense_qp: G is not positive definite");
    }

    // J = L^-T. Its first q columns are kept rotated into the range of the
    // active constraint normals; the remainder spans the free subspace.
    Eigen::MatrixXd J = llt.matrixU().solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::VectorXd x = -llt.solve(qp_in.g0);

    if (m == 0) {
        res.solved = true;
        res.x = x;
        res.kkt_residual = kkt_residual(qp_in, x, res.lambda);
        return res;
    }

    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
    std::vector<int> active;
    active.reserve(n);
    std::vector<char> is_active(m, 0);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n + 1);
    int q = 0;
    int iter = 0;

    const double feas_tol = 1e-11 * (1.0 + b.cwiseAbs().maxCoeff());

    // Removes active constraint at position `pos` and restores the
    // triangularity of R (rotations mirrored onto J's columns).
    auto drop_active = [&](int pos) {
        is_active[active[pos]] = 0;
        active.erase(active.begin() + pos);
        for (int j = pos; j < q - 1; ++j) {
            u(j) = u(j + 1);
            R.col(j) = R.col(j + 1);
        }
        --q;
        u(q) = 0.0;
        R.col(q).setZero();
        for (int j = pos; j < q; ++j) {
            const double cc = R(j, j);
            const double ss = R(j + 1, j);
            const double h = std::hypot(cc, ss);
            if (h == 0.0) continue;
            const double c = cc / h;
            const double s = ss / h;
            R(j, j) = h;
            R(j + 1, j) = 0.0;
            for (int k = j + 1; k < q; ++k) {
                const double t1 = R(j, k);
                const double t2 = R(j + 1, k);
                R(j, k) = c * t1 + s * t2;
                R(j + 1, k) = -s * t1 + c * t2;
            }
            rotate_columns(J, j, j + 1, c, s);
        }
    };

    Eigen::VectorXd d(n), np(n), rvec(n);

    while (true) {
        // Most violated inactive constraint; lowest index wins ties.
        int ip = -1;
        double worst = -feas_tol;
        for (int i = 0; i < m; ++i) {
            if (is_active[i]) continue;
            const double s = C.col(i).dot(x) - b(i);
            if (s < worst) {
                worst = s;
                ip = i;
            }
        }
        if (ip < 0) break;  // primal feasible: done

        np = C.col(ip);
        double s_ip = worst;
        double u_plus = 0.0;

        while (true) {
            if (++iter > max_iterations) {
                res.iterations = iter - 1;
                return res;  // budget exhausted: solved=false, infeasible=false
            }

            d.noalias() = J.transpose() * np;
            const double zn = q < n ? d.tail(n - q).squaredNorm() : 0.0;
            if (q > 0) {
                rvec.head(q) = R.topLeftCorner(q, q)
                                   .template triangularView<Eigen::Upper>()
                                   .solve(d.head(q));
            }

            // Dual blocking step length over active constraints.
            double t1 = kInf;
            int blocking = -1;
            for (int k = 0; k < q; ++k) {
                if (rvec(k) > 0.0) {
                    const double t = u(k) / rvec(k);
                    if (t < t1) {
                        t1 = t;
                        blocking = k;
                    }
                }
            }

            // Full step length along z = J2 * d2 (z'np == |d2|^2).
            const bool z_nonzero = zn > 1e-16 * std::max(1.0, d.squaredNorm());
            const double t2 = z_nonzero ? -s_ip / zn : kInf;

            const double t = std::min(t1, t2);
            if (t >= kInf) {
                res.infeasible = true;
                res.iterations = iter;
                return res;
            }

            if (!z_nonzero) {
                // Step in the dual only; drop the blocking constraint and
                // retry with the same candidate.
                for (int k = 0; k < q; ++k) u(k) -= t * rvec(k);
                u_plus += t;
                drop_active(blocking);
                continue;
            }

            if (q < n) x.noalias() += t * (J.rightCols(n - q) * d.tail(n - q));
            for (int k = 0; k < q; ++k) u(k) -= t * rvec(k);
            u_plus += t;

            if (t2 <= t1) {
                // Candidate becomes active: rotate d's free components onto
                // one axis and extend R.
                for (int j = n - 1; j > q; --j) {
                    const double cc = d(j - 1);
                    const double ss = d(j);
                    const double h = std::hypot(cc, ss);
                    if (h == 0.0) continue;
                    d(j - 1) = h;
                    d(j) = 0.0;
                    rotate_columns(J, j - 1, j, cc / h, ss / h);
                }
                R.col(q).head(q + 1) = d.head(q + 1);
                u(q) = u_plus;
                active.push_back(ip);
                is_active[ip] = 1;
                ++q;
                break;
            }

            // Partial step: the blocking constraint leaves, candidate stays.
            drop_active(blocking);
            s_ip = np.dot(x) - b(ip);
        }
    }

    res.iterations = iter;
    for (int k = 0; k < q; ++k) res.lambda(active[k]) = u(k) / col_scale(active[k]);
    res.x = x;

    Eigen::VectorXd px = x;
    Eigen::VectorXd plambda = res.lambda;
    const double raw_res = kkt_residual(qp_in, x, res.lambda);
    if (q > 0 && polish(qp_in, active, px, plambda)) {
        const double pol_res = kkt_residual(qp_in, px, plambda);
        if (pol_res < raw_res) {
            res.x = px;
            res.lambda = plambda;
            res.kkt_residual = pol_res;
        } else {
            res.kkt_residual = raw_res;
        }
    } else {
        res.kkt_residual = raw_res;
    }
    res.solved = true;
    return res;
}

}  // namespace dqmpc

#include "dqmpc/mpc_config.hpp"

#include <Eigen/Cholesky>
#include <stdexcept>

namespace dqmpc {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

template <typename M>
bool symmetric_positive_definite(const M& m) {
    if (!m.isApprox(m.transpose(), 1e-12)) return false;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    return llt.info() == Eigen::Success;
}

}  // namespace

void MpcConfig::validate() const {
    require(dt > 0.0, "MpcConfig: dt must be positive");
    require(horizon_n >= 0, "MpcConfig: horizon_n must be nonnegative");
    require(symmetric_positive_definite(omega_i),
            "MpcConfig: omega_i must be symmetric positive definite");
    require(symmetric_positive_definite(omega_t),
            "MpcConfig: omega_t must be symmetric positive definite");
    require((u_min.array() < u_max.array()).all(), "MpcConfig: u_min must be below u_max");
    require((x_min.array() < x_max.array()).all(), "MpcConfig: x_min must be below x_max");
    require((v_min.array() < v_max.array()).all(), "MpcConfig: v_min must be below v_max");
    require(slack_penalty > 0.0, "MpcConfig: slack_penalty must be positive");
    require(gravity.allFinite(), "MpcConfig: gravity must be finite");
}

}  // namespace dqmpc

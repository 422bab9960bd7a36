#include "dqmpc/types.hpp"

#include <stdexcept>

namespace dqmpc {

std::string to_string(QpStatus s) {
    switch (s) {
        case QpStatus::optimal: return "optimal";
        case QpStatus::relaxed: return "relaxed";
        case QpStatus::failed: return "failed";
    }
    return "failed";
}

QpStatus qp_status_from_string(const std::string& s) {
    if (s == "optimal") return QpStatus::optimal;
    if (s == "relaxed") return QpStatus::relaxed;
    if (s == "failed") return QpStatus::failed;
    throw std::invalid_argument("unknown qp status: " + s);
}

}  // namespace dqmpc

#include "rallykit/planner.hpp"

#include <cmath>
#include <stdexcept>

namespace rallykit {

void PlannerParams::validate() const {
    if (!(k >= 0.0)) throw std::invalid_argument("planner.k must be >= 0");
    if (!(t_f > 0.0)) throw std::invalid_argument("planner.t_f must be > 0");
    if (!(e > 0.0 && e <= 1.0)) {
        throw std::invalid_argument("planner.e must be in (0, 1]");
    }
}

Eigen::Vector3d desired_outgoing_velocity(const Eigen::Vector3d& p_hit,
                                          const Eigen::Vector3d& p_target,
                                          double t_f, double k, double g_z) {
    if (!(t_f > 0.0)) {
        throw std::invalid_argument(
            "desired_outgoing_velocity: t_f must be > 0");
    }
    const Eigen::Vector3d dp = p_target - p_hit;
    if (k < 1e-6) {
        return {dp.x() / t_f, dp.y() / t_f, dp.z() / t_f - 0.5 * g_z * t_f};
    }
    const double decay = (1.0 - std::exp(-k * t_f)) / k;
    return {dp.x() / decay, dp.y() / decay,
            g_z / k + (dp.z() - g_z * t_f / k) / decay};
}

StrikePlan racket_plan(const Eigen::Vector3d& v_in,
                       const Eigen::Vector3d& v_out, double e) {
    const Eigen::Vector3d dv = v_out - v_in;
    const double dv_norm = dv.norm();
    if (dv_norm < 1e-9) {
        throw std::invalid_argument(
            "racket_plan: v_out equals v_in, no collision normal defined");
    }
    StrikePlan plan;
    plan.n_hat = dv / dv_norm;
    const double v_in_n = v_in.dot(plan.n_hat);
    const double v_out_n = v_out.dot(plan.n_hat);
    plan.v_n = v_in_n - (v_in_n - v_out_n) / (1.0 + e);
    plan.v_out = v_out;
    return plan;
}

Eigen::Vector3d apply_racket_collision(const Eigen::Vector3d& v_in,
                                       const StrikePlan& plan, double e) {
    if (std::abs(plan.n_hat.norm() - 1.0) > 1e-6) {
        throw std::invalid_argument(
            "apply_racket_collision: n_hat must be a unit vector");
    }
    const double v_in_n = v_in.dot(plan.n_hat);
    const double v_out_n = v_in_n - (1.0 + e) * (v_in_n - plan.v_n);
    return v_in + (v_out_n - v_in_n) * plan.n_hat;
}

}  // namespace rallykit

#pragma once

#include <Eigen/Dense>

namespace rallykit {

struct PlannerParams {
    double k{0.3};     // 1/s, linearized drag coefficient
    double g_z{-9.81}; // m/s^2, signed vertical gravity (z up)
    double t_f{0.7};   // s, desired ball flight time to the target
    double e{0.82};    // racket restitution, (0, 1]
    Eigen::Vector3d p_target{Eigen::Vector3d::Zero()};  // landing target, m

    void validate() const;
};

struct StrikePlan {
    Eigen::Vector3d n_hat{Eigen::Vector3d::UnitX()};  // racket face normal
    double v_n{0.0};            // m/s, signed racket speed along n_hat
    Eigen::Vector3d v_out{Eigen::Vector3d::Zero()};   // planned outgoing ball velocity

    Eigen::Vector3d racket_velocity() const { return v_n * n_hat; }
};

// Outgoing ball velocity that lands at p_target after t_f under the
// linear-drag model v' = -k v + g:
//   v_i = dp_i * k / (1 - e^{-k t_f})                    (i = x, y)
//   v_z = g_z/k + (dp_z - g_z t_f / k) / ((1 - e^{-k t_f}) / k)
// with the ballistic limits dp_i/t_f and dp_z/t_f - g_z t_f/2 for k < 1e-6.
Eigen::Vector3d desired_outgoing_velocity(const Eigen::Vector3d& p_hit,
                                          const Eigen::Vector3d& p_target,
                                          double t_f, double k, double g_z);

// Racket normal and speed realizing v_in -> v_out through a frictionless
// restitution collision: the velocity change is along the face normal,
//   n_hat = (v_out - v_in)/||v_out - v_in||
//   V_n = v_in_n - (v_in_n - v_out_n)/(1 + e)
// Throws std::invalid_argument when ||v_out - v_in|| < 1e-9 (no normal
// direction is defined).
StrikePlan racket_plan(const Eigen::Vector3d& v_in,
                       const Eigen::Vector3d& v_out, double e);

// Forward collision model: normal component mapped by
// v_out_n = v_in_n - (1+e)(v_in_n - V_n), tangential components preserved.
// Throws std::invalid_argument unless ||n_hat|| = 1 within 1e-6.
Eigen::Vector3d apply_racket_collision(const Eigen::Vector3d& v_in,
                                       const StrikePlan& plan, double e);

}  // namespace rallykit

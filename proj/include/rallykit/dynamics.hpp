#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "rallykit/frames.hpp"

namespace rallykit {

enum class DragModel { quadratic, linear };

struct PhysicsParams {
    double k{0.14};       // drag coefficient: 1/m (quadratic), 1/s (linear)
    double g{9.81};       // gravity magnitude, acts along -z
    double c_h{0.75};     // horizontal restitution
    double c_v{0.87};     // vertical restitution
    double z_c{0.02};     // collision height above table surface, m
    double l_x{1.37};     // table half-length, m
    double l_y{0.7625};   // table half-width, m

    void validate() const;
};

struct BallState {
    Eigen::Vector3d p{Eigen::Vector3d::Zero()};
    Eigen::Vector3d v{Eigen::Vector3d::Zero()};
    FrameId frame{FrameId::table};
};

struct Trajectory {
    double dt{0.0};
    std::vector<double> t;
    std::vector<BallState> states;
    std::vector<std::size_t> bounces;  // sample indices reached via a bounce

    std::size_t size() const { return states.size(); }
    bool bounced_at(std::size_t i) const;
    bool below_floor_at(std::size_t i) const;

    // Linear interpolation between bracketing samples; clamps outside [0, T].
    BallState interpolate(double time) const;
};

Eigen::Vector3d accel(DragModel model, const Eigen::Vector3d& v,
                      const PhysicsParams& params);

// One explicit step with the acceleration frozen at the pre-step velocity:
// p += v dt + 0.5 a(v) dt^2, v += a(v) dt.  No bounce check.
BallState step_free_flight(const BallState& s, double dt,
                           const PhysicsParams& params,
                           DragModel model = DragModel::quadratic);

// Reflects the state off the table plane when all four gates hold
// (|p_x| < L_x, |p_y| < L_y, p_z <= z_c, v_z < 0); otherwise returns the
// state unchanged.  Table-frame states only.
std::pair<BallState, bool> apply_bounce(const BallState& s,
                                        const PhysicsParams& params);

// Repeated free-flight step + bounce check at fixed dt.  Sample i holds the
// state at t = i*dt; floor(horizon/dt)+1 samples total.  Flight below floor
// level is not terminated; below_floor_at flags such samples.
Trajectory propagate(const BallState& s, double horizon, double dt,
                     const PhysicsParams& params,
                     DragModel model = DragModel::quadratic);

// Closed-form position of the linear-drag ODE  v' = -k v + g  at time t_f;
// falls back to the ballistic parabola for k < 1e-6.
Eigen::Vector3d analytic_linear_flight(const Eigen::Vector3d& p0,
                                       const Eigen::Vector3d& v0, double t_f,
                                       double k, double g_z);

inline Eigen::Vector3d analytic_linear_flight(const Eigen::Vector3d& p0,
                                              const Eigen::Vector3d& v0,
                                              double t_f,
                                              const PhysicsParams& params) {
    return analytic_linear_flight(p0, v0, t_f, params.k, -params.g);
}

}  // namespace rallykit

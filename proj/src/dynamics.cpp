#include "rallykit/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rallykit {

void PhysicsParams::validate() const {
    if (!(k >= 0.0)) throw std::invalid_argument("physics.k must be >= 0");
    if (!(g > 0.0)) throw std::invalid_argument("physics.g must be > 0");
    if (!(c_h > 0.0 && c_h <= 1.0)) {
        throw std::invalid_argument("physics.c_h must be in (0, 1]");
    }
    if (!(c_v > 0.0 && c_v <= 1.0)) {
        throw std::invalid_argument("physics.c_v must be in (0, 1]");
    }
    if (!(z_c >= 0.0)) throw std::invalid_argument("physics.z_c must be >= 0");
    if (!(l_x > 0.0)) throw std::invalid_argument("physics.l_x must be > 0");
    if (!(l_y > 0.0)) throw std::invalid_argument("physics.l_y must be > 0");
}

bool Trajectory::bounced_at(std::size_t i) const {
    return std::binary_search(bounces.begin(), bounces.end(), i);
}

bool Trajectory::below_floor_at(std::size_t i) const {
    return states.at(i).p.z() < 0.0;
}

BallState Trajectory::interpolate(double time) const {
    if (states.empty()) throw std::out_of_range("empty trajectory");
    if (time <= t.front()) return states.front();
    if (time >= t.back()) return states.back();
    const auto hi_it = std::upper_bound(t.begin(), t.end(), time);
    const std::size_t hi = static_cast<std::size_t>(hi_it - t.begin());
    const std::size_t lo = hi - 1;
    const double w = (time - t[lo]) / (t[hi] - t[lo]);
    BallState out = states[lo];
    out.p = (1.0 - w) * states[lo].p + w * states[hi].p;
    out.v = (1.0 - w) * states[lo].v + w * states[hi].v;
    return out;
}

Eigen::Vector3d accel(DragModel model, const Eigen::Vector3d& v,
                      const PhysicsParams& params) {
    const Eigen::Vector3d gravity(0.0, 0.0, -params.g);
    if (model == DragModel::quadratic) {
        return -params.k * v.norm() * v + gravity;
    }
    return -params.k * v + gravity;
}

BallState step_free_flight(const BallState& s, double dt,
                           const PhysicsParams& params, DragModel model) {
    const Eigen::Vector3d a = accel(model, s.v, params);
    BallState out = s;
    out.p = s.p + s.v * dt + 0.5 * a * (dt * dt);
    out.v = s.v + a * dt;
    return out;
}

std::pair<BallState, bool> apply_bounce(const BallState& s,
                                        const PhysicsParams& params) {
    if (s.frame != FrameId::table) {
        throw FrameMismatchError("bounce model requires a table-frame state");
    }
    const bool over_table =
        std::abs(s.p.x()) < params.l_x && std::abs(s.p.y()) < params.l_y;
    if (!(over_table && s.p.z() <= params.z_c && s.v.z() < 0.0)) {
        return {s, false};
    }
    BallState out = s;
    out.v = {params.c_h * s.v.x(), params.c_h * s.v.y(), -params.c_v * s.v.z()};
    out.p.z() = 2.0 * params.z_c - s.p.z();
    return {out, true};
}

Trajectory propagate(const BallState& s, double horizon, double dt,
                     const PhysicsParams& params, DragModel model) {
    if (!(dt > 0.0)) throw std::invalid_argument("propagate: dt must be > 0");
    if (!(horizon >= 0.0)) {
        throw std::invalid_argument("propagate: horizon must be >= 0");
    }
    const std::size_t n_steps = static_cast<std::size_t>(horizon / dt);
    Trajectory traj;
    traj.dt = dt;
    traj.t.reserve(n_steps + 1);
    traj.states.reserve(n_steps + 1);
    traj.t.push_back(0.0);
    traj.states.push_back(s);
    BallState cur = s;
    for (std::size_t i = 1; i <= n_steps; ++i) {
        cur = step_free_flight(cur, dt, params, model);
        auto [bounced_state, bounced] = apply_bounce(cur, params);
        cur = bounced_state;
        if (bounced) traj.bounces.push_back(i);
        traj.t.push_back(static_cast<double>(i) * dt);
        traj.states.push_back(cur);
    }
    return traj;
}

Eigen::Vector3d analytic_linear_flight(const Eigen::Vector3d& p0,
                                       const Eigen::Vector3d& v0, double t_f,
                                       double k, double g_z) {
    if (!(t_f >= 0.0)) {
        throw std::invalid_argument("analytic_linear_flight: t_f must be >= 0");
    }
    const Eigen::Vector3d g(0.0, 0.0, g_z);
    if (k < 1e-6) {
        return p0 + v0 * t_f + 0.5 * g * (t_f * t_f);
    }
    const Eigen::Vector3d v_inf = g / k;
    const double decay = 1.0 - std::exp(-k * t_f);
    return p0 + (v0 - v_inf) * (decay / k) + v_inf * t_f;
}

}  // namespace rallykit

#include "rallykit/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace rallykit {

Matrix6d EstimatorParams::default_p_init(double pos_var, double vel_var) {
    Vector6d diag;
    diag << pos_var, pos_var, pos_var, vel_var, vel_var, vel_var;
    return diag.asDiagonal();
}

void EstimatorParams::validate() const {
    if (!(q_pos_base > 0.0)) {
        throw std::invalid_argument("estimator.q_pos_base must be > 0");
    }
    if (!(q_vel_base > 0.0)) {
        throw std::invalid_argument("estimator.q_vel_base must be > 0");
    }
    if (!(dt0 > 0.0)) throw std::invalid_argument("estimator.dt0 must be > 0");
    if (!(r_base > 0.0)) {
        throw std::invalid_argument("estimator.r_base must be > 0");
    }
    if (!(beta >= 0.0)) {
        throw std::invalid_argument("estimator.beta must be >= 0");
    }
    if (!(dt_max > dt0)) {
        throw std::invalid_argument("estimator.dt_max must be > dt0");
    }
    if (!(tau_x > 0.0)) {
        throw std::invalid_argument("estimator.tau_x must be > 0");
    }
    if (!(substep_dt > 0.0)) {
        throw std::invalid_argument("estimator.substep_dt must be > 0");
    }
    physics.validate();
}

Matrix6d process_noise(double dt, const EstimatorParams& params) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("process_noise: dt must be > 0");
    }
    const double ratio = dt / params.dt0;
    const double q_pos = params.q_pos_base * ratio * ratio;
    const double q_vel = params.q_vel_base * ratio;
    Vector6d diag;
    diag << q_pos, q_pos, q_pos, q_vel, q_vel, q_vel;
    return diag.asDiagonal();
}

Eigen::Matrix3d measurement_noise(double d, const EstimatorParams& params) {
    if (!(d >= 0.0)) {
        throw std::invalid_argument("measurement_noise: d must be >= 0");
    }
    return params.r_base * (1.0 + params.beta * d) *
           Eigen::Matrix3d::Identity();
}

Matrix6d jacobian(const Vector6d& x, double dt, const PhysicsParams& params,
                  DragModel model) {
    Eigen::Matrix3d j_a = Eigen::Matrix3d::Zero();
    if (model == DragModel::linear) {
        j_a = -params.k * Eigen::Matrix3d::Identity();
    } else {
        const Eigen::Vector3d v = x.tail<3>();
        const double speed = v.norm();
        if (speed > 0.0) {
            j_a = -params.k * (speed * Eigen::Matrix3d::Identity() +
                               v * v.transpose() / speed);
        }
    }
    Matrix6d f = Matrix6d::Identity();
    f.topRightCorner<3, 3>() =
        dt * Eigen::Matrix3d::Identity() + 0.5 * dt * dt * j_a;
    f.bottomRightCorner<3, 3>() += dt * j_a;
    return f;
}

AdaptiveEkf::AdaptiveEkf(EstimatorParams params) : params_(std::move(params)) {
    params_.validate();
}

BallState AdaptiveEkf::estimate() const {
    return {state_.x.head<3>(), state_.x.tail<3>(), FrameId::table};
}

void AdaptiveEkf::reset() {
    state_ = FilterState{};
    updates_since_init_ = 0;
}

UpdateResult AdaptiveEkf::reinit(const Measurement& m, UpdateStatus status) {
    state_.x.head<3>() = m.z;
    state_.x.tail<3>() = params_.v_init;
    state_.P = params_.p_init;
    state_.t_last = m.t;
    state_.initialized = true;
    updates_since_init_ = 1;
    return {status, estimate(), 0.0};
}

void AdaptiveEkf::predict(double dt) {
    // Substep so a bounce between sparse measurements is not stepped over;
    // Jacobians compose by chain product.
    int n_sub = static_cast<int>(std::ceil(dt / params_.substep_dt));
    if (n_sub < 1) n_sub = 1;
    const double h = dt / n_sub;
    for (int i = 0; i < n_sub; ++i) {
        const Matrix6d f = jacobian(state_.x, h, params_.physics, params_.model);
        BallState s{state_.x.head<3>(), state_.x.tail<3>(), FrameId::table};
        s = step_free_flight(s, h, params_.physics, params_.model);
        if (params_.bounce_in_predict) {
            s = apply_bounce(s, params_.physics).first;
        }
        state_.x.head<3>() = s.p;
        state_.x.tail<3>() = s.v;
        state_.P = f * state_.P * f.transpose() + process_noise(h, params_);
    }
}

UpdateResult AdaptiveEkf::update(const Measurement& m) {
    if (!state_.initialized) {
        return reinit(m, UpdateStatus::initialized);
    }
    if (m.t <= state_.t_last) {
        return {UpdateStatus::rejected_stale, estimate(), 0.0};
    }
    const double dt = m.t - state_.t_last;
    if (dt > params_.dt_max) {
        return reinit(m, UpdateStatus::reinit_gap);
    }

    predict(dt);

    // Return detection on the predicted state: the ball re-appearing on the
    // far side of the measurement along +x while moving outgoing means a new
    // incoming pass cannot be this track.
    if (state_.x(0) - m.z.x() > params_.tau_x && state_.x(3) > 0.0) {
        return reinit(m, UpdateStatus::reinit_return);
    }

    const Eigen::Matrix3d r =
        params_.adaptive_noise ? measurement_noise(m.d, params_)
                               : Eigen::Matrix3d(params_.r_base *
                                                 Eigen::Matrix3d::Identity());
    Eigen::Matrix<double, 3, 6> h = Eigen::Matrix<double, 3, 6>::Zero();
    h.leftCols<3>() = Eigen::Matrix3d::Identity();

    const Eigen::Vector3d innovation = m.z - h * state_.x;
    const Eigen::Matrix3d s = h * state_.P * h.transpose() + r;
    const Eigen::Matrix3d s_inv = s.inverse();
    const Eigen::Matrix<double, 6, 3> k = state_.P * h.transpose() * s_inv;
    const double nis = innovation.dot(s_inv * innovation);

    state_.x = state_.x + k * innovation;
    const Matrix6d i_kh = Matrix6d::Identity() - k * h;
    state_.P = i_kh * state_.P * i_kh.transpose() + k * r * k.transpose();
    state_.P = 0.5 * (state_.P + state_.P.transpose());
    state_.t_last = m.t;
    ++updates_since_init_;
    return {UpdateStatus::accepted, estimate(), nis};
}

}  // namespace rallykit

#pragma once

#include <Eigen/Dense>

#include "rallykit/dynamics.hpp"

namespace rallykit {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

struct EstimatorParams {
    double q_pos_base{1e-4};   // m^2, at dt = dt0
    double q_vel_base{1e-2};   // (m/s)^2, at dt = dt0
    double dt0{1.0 / 60.0};    // nominal measurement period, s
    double r_base{4e-4};       // m^2, observation variance at zero distance
    double beta{0.3};          // 1/m, distance gain of the observation noise
    double dt_max{0.2};        // s, measurement gap triggering re-init
    double tau_x{0.3};         // m, return-detection threshold on x residual
    Eigen::Vector3d v_init{-3.0, 0.0, 1.0};  // m/s, velocity prior at re-init
    Matrix6d p_init{default_p_init()};
    double substep_dt{0.005};  // s, internal prediction substep
    bool bounce_in_predict{true};   // off = "no collision detection" ablation
    bool adaptive_noise{true};      // off = "no adaptive noise" ablation
    DragModel model{DragModel::quadratic};
    PhysicsParams physics{};

    static Matrix6d default_p_init(double pos_var = 1e-2, double vel_var = 25.0);
    void validate() const;
};

struct Measurement {
    Eigen::Vector3d z;  // position in the table frame, m
    double t{0.0};      // s
    double d{0.0};      // camera-ball distance, m
};

struct FilterState {
    Vector6d x{Vector6d::Zero()};
    Matrix6d P{Matrix6d::Identity()};
    double t_last{0.0};
    bool initialized{false};
};

// Dt-normalized diagonal process noise: q_pos = q_pos_base*(dt/dt0)^2,
// q_vel = q_vel_base*(dt/dt0).
Matrix6d process_noise(double dt, const EstimatorParams& params);

// Isotropic distance-scaled observation noise r(d) = r_base*(1 + beta*d).
Eigen::Matrix3d measurement_noise(double d, const EstimatorParams& params);

// Analytic Jacobian of the one-step free-flight map at state x:
//   F = [[I, dt*I + 0.5*dt^2*J_a], [0, I + dt*J_a]]
// with J_a = -k(||v||I + vv^T/||v||) for quadratic drag (0 at v = 0) and
// J_a = -k*I for linear drag.
Matrix6d jacobian(const Vector6d& x, double dt, const PhysicsParams& params,
                  DragModel model = DragModel::quadratic);

enum class UpdateStatus { accepted, initialized, reinit_gap, reinit_return,
                          rejected_stale };

struct UpdateResult {
    UpdateStatus status{UpdateStatus::accepted};
    BallState estimate;
    double nis{0.0};  // innovation^T S^-1 innovation; 0 on init/reject paths
};

// Position-only EKF over the drag/bounce flight model with distance-adaptive
// observation noise and two reset gates (stale measurement gap, return
// detection).  Update branch order:
//   1. uninitialized -> init from (z, v_init)
//   2. t <= t_last -> reject, state untouched
//   3. dt > dt_max -> re-init from the current measurement
//   4. predict: substepped free flight + bounce check, P = F P F^T + Q
//   5. predicted x residual > tau_x with outgoing v -> re-init
//   6. Kalman update with R(d), Joseph-form covariance, symmetrize
class AdaptiveEkf {
public:
    explicit AdaptiveEkf(EstimatorParams params);

    UpdateResult update(const Measurement& m);

    const FilterState& state() const { return state_; }
    const EstimatorParams& params() const { return params_; }
    BallState estimate() const;
    // Accepted measurement count since the last (re-)initialization.
    int updates_since_init() const { return updates_since_init_; }
    void reset();

private:
    UpdateResult reinit(const Measurement& m, UpdateStatus status);
    void predict(double dt);

    EstimatorParams params_;
    FilterState state_;
    int updates_since_init_{0};
};

}  // namespace rallykit

#pragma once

#include <Eigen/Dense>
#include <optional>

#include "rallykit/dynamics.hpp"
#include "rallykit/frames.hpp"

namespace rallykit {

struct StrikeVolume {
    double x_min{-0.15}, x_max{0.25};
    double y_min{-0.8}, y_max{0.8};
    double z_min{0.3}, z_max{1.25};

    bool contains(const Eigen::Vector3d& p) const;
    Eigen::Vector3d clamp(const Eigen::Vector3d& p) const;
    void validate() const;
};

struct PredictorConfig {
    double t_det_min{0.1};    // s, arrival-time search lower bound
    double t_det_max{1.2};    // s, arrival-time search upper bound
    double coarse_step{0.01}; // s, initial search grid step
    double w_tau{0.05};       // s, refinement half-window
    double delta_tau{0.002};  // s, refinement grid step
    double c_s_x{0.0};        // m, strike-plane x in the origin frame
    double tau_min{0.0};      // s
    double tau_max{1.5};      // s
    double sim_dt{0.002};     // s, forward-propagation step
    double v_bound{12.0};     // m/s, per-axis clip on predicted hit velocity
    bool clip_outputs{true};

    void validate() const;
};

// Strike command: remaining time to contact plus predicted ball position and
// incoming velocity at contact, both in the origin frame.
struct StrikePrediction {
    double tau{0.0};
    Eigen::Vector3d p_hit{Eigen::Vector3d::Zero()};
    Eigen::Vector3d v_hit_in{Eigen::Vector3d::Zero()};
};

// Coarse arrival-time search.  Propagates the table-frame ball state forward
// (bounces included), maps each grid sample into the origin frame, and among
// samples inside the strike volume picks the time minimizing
// |p_x(tau) - c_s_x|, ties toward the smaller tau.  Requires an approaching
// ball (v_x < 0 and p_x > c_s_x in the origin frame); returns nothing when
// the gate fails or no feasible sample exists.
std::optional<StrikePrediction> initial_search(const BallState& ball,
                                               const RigidTransform& oTt,
                                               const PredictorConfig& cfg,
                                               const StrikeVolume& vol,
                                               const PhysicsParams& physics,
                                               DragModel model = DragModel::quadratic);

// Local re-search over [prev.tau - w_tau, prev.tau + w_tau] at step
// delta_tau from the latest ball state, without enforcing strike-volume
// membership.  Returns nothing when the ball is already past the strike
// plane (caller falls back to decay) or prev.tau <= 0.
std::optional<StrikePrediction> refine(const StrikePrediction& prev,
                                       const BallState& ball,
                                       const RigidTransform& oTt,
                                       const PredictorConfig& cfg,
                                       const PhysicsParams& physics,
                                       DragModel model = DragModel::quadratic);

// Measurement-free tick: tau decreases by control_dt; negative tau ends the
// strike phase (empty result); otherwise tau is clamped to
// [tau_min, tau_max] and, when clipping is enabled, p_hit is clamped to the
// volume and v_hit_in to +-v_bound per axis.
std::optional<StrikePrediction> decay_and_clip(const StrikePrediction& prev,
                                               double control_dt,
                                               const PredictorConfig& cfg,
                                               const StrikeVolume& vol);

}  // namespace rallykit

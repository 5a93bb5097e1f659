#include "rallykit/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rallykit {
namespace {

double clamp(double v, double lo, double hi) {
    return std::min(std::max(v, lo), hi);
}

struct GridScan {
    bool found{false};
    double tau{0.0};
    double score{0.0};
    Eigen::Vector3d p_o{Eigen::Vector3d::Zero()};
    Eigen::Vector3d v_o{Eigen::Vector3d::Zero()};
};

// Scans candidate times tau = tau_lo + j*step over the propagated
// trajectory, scoring |p_x(tau) - c_s_x| in the origin frame.  Candidates
// are snapped to the nearest propagation sample.  Strictly-smaller score
// updates keep the first (smallest-tau) minimizer on ties.
template <typename Feasible>
GridScan scan_grid(const Trajectory& traj, const RigidTransform& oTt,
                   double tau_lo, double tau_hi, double step, double c_s_x,
                   Feasible feasible) {
    GridScan best;
    const std::size_t n = traj.size();
    for (int j = 0;; ++j) {
        const double tau = tau_lo + j * step;
        if (tau > tau_hi + 1e-12) break;
        const auto idx =
            static_cast<std::size_t>(std::llround(tau / traj.dt));
        if (idx >= n) break;
        const Eigen::Vector3d p_o = oTt.apply(traj.states[idx].p);
        if (!feasible(p_o)) continue;
        const double score = std::abs(p_o.x() - c_s_x);
        if (!best.found || score < best.score) {
            best.found = true;
            best.tau = tau;
            best.score = score;
            best.p_o = p_o;
            best.v_o = oTt.rotate(traj.states[idx].v);
        }
    }
    return best;
}

}  // namespace

bool StrikeVolume::contains(const Eigen::Vector3d& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min &&
           p.y() <= y_max && p.z() >= z_min && p.z() <= z_max;
}

Eigen::Vector3d StrikeVolume::clamp(const Eigen::Vector3d& p) const {
    return {rallykit::clamp(p.x(), x_min, x_max),
            rallykit::clamp(p.y(), y_min, y_max),
            rallykit::clamp(p.z(), z_min, z_max)};
}

void StrikeVolume::validate() const {
    if (!(x_min < x_max && y_min < y_max && z_min < z_max)) {
        throw std::invalid_argument(
            "strike volume: min must be < max on every axis");
    }
}

void PredictorConfig::validate() const {
    if (!(coarse_step > 0.0)) {
        throw std::invalid_argument("predictor.coarse_step must be > 0");
    }
    if (!(delta_tau > 0.0 && delta_tau <= coarse_step)) {
        throw std::invalid_argument(
            "predictor.delta_tau must be in (0, coarse_step]");
    }
    if (!(tau_min >= 0.0)) {
        throw std::invalid_argument("predictor.tau_min must be >= 0");
    }
    if (!(tau_max > tau_min)) {
        throw std::invalid_argument("predictor.tau_max must be > tau_min");
    }
    if (!(t_det_min >= 0.0 && t_det_max > t_det_min)) {
        throw std::invalid_argument(
            "predictor.t_det bounds must satisfy 0 <= min < max");
    }
    if (!(w_tau > 0.0)) {
        throw std::invalid_argument("predictor.w_tau must be > 0");
    }
    if (!(sim_dt > 0.0)) {
        throw std::invalid_argument("predictor.sim_dt must be > 0");
    }
    if (!(v_bound > 0.0)) {
        throw std::invalid_argument("predictor.v_bound must be > 0");
    }
}

std::optional<StrikePrediction> initial_search(const BallState& ball,
                                               const RigidTransform& oTt,
                                               const PredictorConfig& cfg,
                                               const StrikeVolume& vol,
                                               const PhysicsParams& physics,
                                               DragModel model) {
    const Eigen::Vector3d p_o = oTt.apply(ball.p);
    const Eigen::Vector3d v_o = oTt.rotate(ball.v);
    if (!(v_o.x() < 0.0 && p_o.x() > cfg.c_s_x)) {
        return std::nullopt;
    }
    const Trajectory traj =
        propagate(ball, cfg.t_det_max, cfg.sim_dt, physics, model);
    const GridScan best = scan_grid(
        traj, oTt, cfg.t_det_min, cfg.t_det_max, cfg.coarse_step, cfg.c_s_x,
        [&vol](const Eigen::Vector3d& p) { return vol.contains(p); });
    if (!best.found) return std::nullopt;
    StrikePrediction pred;
    pred.tau = clamp(best.tau, cfg.tau_min, cfg.tau_max);
    pred.p_hit = best.p_o;
    pred.v_hit_in = best.v_o;
    return pred;
}

std::optional<StrikePrediction> refine(const StrikePrediction& prev,
                                       const BallState& ball,
                                       const RigidTransform& oTt,
                                       const PredictorConfig& cfg,
                                       const PhysicsParams& physics,
                                       DragModel model) {
    if (!(prev.tau > 0.0)) return std::nullopt;
    const Eigen::Vector3d p_o = oTt.apply(ball.p);
    if (!(p_o.x() > cfg.c_s_x)) return std::nullopt;
    const double tau_lo = std::max(0.0, prev.tau - cfg.w_tau);
    const double tau_hi = prev.tau + cfg.w_tau;
    const Trajectory traj = propagate(ball, tau_hi, cfg.sim_dt, physics, model);
    const GridScan best =
        scan_grid(traj, oTt, tau_lo, tau_hi, cfg.delta_tau, cfg.c_s_x,
                  [](const Eigen::Vector3d&) { return true; });
    if (!best.found) return std::nullopt;
    StrikePrediction pred;
    pred.tau = clamp(best.tau, cfg.tau_min, cfg.tau_max);
    pred.p_hit = best.p_o;
    pred.v_hit_in = best.v_o;
    return pred;
}

std::optional<StrikePrediction> decay_and_clip(const StrikePrediction& prev,
                                               double control_dt,
                                               const PredictorConfig& cfg,
                                               const StrikeVolume& vol) {
    const double tau = prev.tau - control_dt;
    if (tau < 0.0) return std::nullopt;
    StrikePrediction next = prev;
    next.tau = clamp(tau, cfg.tau_min, cfg.tau_max);
    if (cfg.clip_outputs) {
        next.p_hit = vol.clamp(prev.p_hit);
        next.v_hit_in = {clamp(prev.v_hit_in.x(), -cfg.v_bound, cfg.v_bound),
                         clamp(prev.v_hit_in.y(), -cfg.v_bound, cfg.v_bound),
                         clamp(prev.v_hit_in.z(), -cfg.v_bound, cfg.v_bound)};
    }
    return next;
}

}  // namespace rallykit

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rallykit/dynamics.hpp"
#include "rallykit/estimator.hpp"
#include "rallykit/frames.hpp"
#include "rallykit/motionlib.hpp"
#include "rallykit/planner.hpp"
#include "rallykit/predictor.hpp"
#include "rallykit/rng.hpp"

namespace rallykit {

// Ball camera model for the synthetic rally loop: fixed position in the
// table frame, conical field of view, distance-scaled isotropic noise.
// The noise floor here is the world's, decoupled from the filter's belief
// (r_base, beta) so a noiseless world can drive a regular filter.
struct SensorConfig {
    double rate{60.0};          // Hz
    double drop_prob{0.02};
    Eigen::Vector3d camera_pos{-1.55, 0.0, 0.9};      // table frame, m
    Eigen::Vector3d camera_forward{1.0, 0.0, 0.0};
    double fov_half_angle{1.396};  // rad
    double r_base{1e-4};           // m^2 at zero distance
    double beta{0.3};              // 1/m

    void validate() const;
};

// Gaussian execution error standing in for a tracking controller: position,
// velocity, and small-angle face-normal perturbations, plus an optional
// contact-time offset.
struct ExecErrorConfig {
    double sigma_p{0.0};      // m
    double sigma_v{0.0};      // m/s
    double sigma_angle{0.0};  // rad
    double latency{0.0};      // s, realized contact lags the command

    // Embodied-camera preset: position error at the scale an onboard
    // perception stack leaves after control.
    static ExecErrorConfig ego();
    void validate() const;
};

// Phase-dependent command perturbation: sigma(tau) = sigma_max *
// min(tau/tau_ref, 1), so commands are noisiest far from contact and settle
// as the strike approaches.
struct CommandNoiseConfig {
    double sigma_max{0.0};  // m and m/s
    double tau_ref{0.3};    // s

    void validate() const;
};

struct AblationConfig {
    bool no_collision{false};      // filter predicts without the bounce branch
    bool no_adaptive_noise{false}; // fixed observation noise R = r_base I
    bool zero_init{false};         // velocity prior zeroed at (re-)init
};

struct LaunchConfig {
    Eigen::Vector3d p_min{1.0, -0.35, 0.25};   // table frame, m
    Eigen::Vector3d p_max{1.3, 0.35, 0.45};
    Eigen::Vector3d v_min{-5.2, -0.6, 0.8};    // m/s
    Eigen::Vector3d v_max{-3.8, 0.6, 2.2};
    double landing_x_min{-1.37};   // accepted first-bounce window, table frame
    double landing_x_max{0.0};
    double landing_y_abs{0.7625};
    int max_attempts{200};
    bool require_bounce{true};

    void validate() const;
};

// Execution success thresholds: E_p < pos, E_o < orient, E_v < vel.
struct SrThresholds {
    double pos{0.04};     // m
    double orient{0.05};  // scaled rad (100 * arccos)
    double vel{0.5};      // m/s

    void validate() const;
};

struct ScenarioConfig {
    int n_episodes{200};
    double control_rate{120.0};  // Hz
    double horizon{2.5};         // s, truth rollout length
    double truth_dt{0.002};      // s
    double return_horizon{2.0};  // s, post-strike rollout length
    int min_filter_updates{2};   // accepted updates before predictions start
    double contact_radius{0.09}; // m, racket-ball contact proxy
    DragModel drag_model{DragModel::quadratic};
    bool emit_traces{false};
    LaunchConfig launch{};
    SensorConfig sensor{};
    ExecErrorConfig exec_error{};
    CommandNoiseConfig command_noise{};
    AblationConfig ablations{};

    void validate() const;
};

struct SimulationConfig {
    std::uint64_t seed{0};
    PhysicsParams physics{};
    // Filter tuned to the launch distribution: informed velocity prior at its
    // mean, tighter prior variance, and process/observation noise sized for
    // the synthetic sensor.
    EstimatorParams estimator{make_scenario_estimator()};
    PredictorConfig predictor{};
    StrikeVolume volume{};
    PlannerParams planner{make_default_planner()};  // p_target in table frame
    ScenarioConfig scenario{};
    SrThresholds sr{};
    CalibrationSet calibration{default_calibration(1.37, 0.3, 0.76)};
    Eigen::Vector3d match_anchor{0.0, 0.0, 0.8};  // origin frame, m
    double eps_scale{0.02};                       // m, match perturbation

    void validate() const;

    static EstimatorParams make_scenario_estimator();

private:
    static PlannerParams make_default_planner();
};

struct RealizedStrike {
    Eigen::Vector3d racket_pos{Eigen::Vector3d::Zero()};  // origin frame
    Eigen::Vector3d racket_vel{Eigen::Vector3d::Zero()};
    Eigen::Vector3d n_hat{Eigen::Vector3d::UnitX()};
};

struct StrikeScore {
    double e_p{0.0};  // m
    double e_v{0.0};  // m/s
    double e_o{0.0};  // scaled rad
    bool ok_p{false}, ok_v{false}, ok_o{false};
    bool success{false};
};

enum class PredStage { initial, refine, decay };

const char* pred_stage_name(PredStage stage);

// One prediction-error sample against the episode's reference (the last
// measurement-driven prediction before contact).
struct PredError {
    double tts{0.0};      // s, reference contact time minus sample time
    double err_pos{0.0};  // m
    double err_vel{0.0};  // m/s
    double err_tau{0.0};  // s
};

struct RallyOutcome {
    std::uint64_t episode{0};
    bool detected{false};
    bool hit{false};
    bool returned{false};
    bool strike_attempted{false};
    StrikeScore score{};              // valid when strike_attempted
    double t_contact{0.0};            // s, commanded contact time
    std::int64_t matched_clip{-1};
    bool has_landing{false};
    Eigen::Vector3d landing{Eigen::Vector3d::Zero()};  // table frame
    double landing_bias{0.0};  // m, landing vs planner target, model mismatch
    std::vector<PredError> pred_errors;
};

struct ConvergenceBin {
    double lo{0.0}, hi{0.0};  // s, time-to-strike edges
    std::size_t n{0};
    double mean_pos{0.0}, std_pos{0.0};
    double mean_vel{0.0}, std_vel{0.0};
    double mean_tau{0.0}, std_tau{0.0};
};

struct MetricsReport {
    std::size_t n_episodes{0};
    std::size_t n_detected{0};
    std::size_t n_hit{0};
    std::size_t n_returned{0};
    std::size_t n_strikes{0};  // strike commands issued
    double sr_det{0.0}, sr_hit{0.0}, sr_return{0.0};
    double sr{0.0};  // execution success over issued strikes
    double mean_e_p{0.0}, mean_e_v{0.0}, mean_e_o{0.0};
    std::size_t n_pred{0};
    double e_predpos{0.0}, e_predvel{0.0}, e_predtau{0.0};
    std::vector<ConvergenceBin> bins;  // 12 x 0.1 s over [0, 1.2)

    static MetricsReport from_outcomes(const std::vector<RallyOutcome>& outs,
                                       const SrThresholds& th);
};

// Rejection-samples a serve until the true quadratic/linear-drag trajectory
// crosses the strike volume while approaching (v_x < 0 in the origin frame)
// and, when required, first bounces inside the landing window.  Throws
// std::runtime_error when max_attempts launches all miss.
struct LaunchResult {
    BallState initial;    // table frame
    Trajectory truth;     // table frame, t = 0 at launch
};
LaunchResult launch_ball(Rng& rng, const LaunchConfig& cfg,
                         const PhysicsParams& physics, DragModel model,
                         const RigidTransform& oTt, const StrikeVolume& vol,
                         double horizon, double truth_dt);

// FOV-gated, dropout-thinned, distance-noisy ball observation.  No RNG draws
// on gated-out samples, one uniform for dropout (when drop_prob > 0), three
// normals for noise (when r_base > 0).
std::optional<Measurement> sense(const BallState& truth, double t,
                                 const SensorConfig& cfg, Rng& rng);

// Additive Gaussian command noise with sigma(tau); tau itself is untouched.
StrikePrediction perturb_command(const StrikePrediction& cmd,
                                 const CommandNoiseConfig& cfg, Rng& rng);

// Idealized executor: realized contact = command + Gaussian errors.  Draw
// order is position, velocity, normal tilt; zero-sigma channels draw nothing.
RealizedStrike execute_strike(const StrikePrediction& cmd,
                              const StrikePlan& plan,
                              const ExecErrorConfig& cfg, Rng& rng);

StrikeScore score_strike(const RealizedStrike& realized,
                         const StrikePrediction& cmd, const StrikePlan& plan,
                         const SrThresholds& th);

struct EpisodeResult {
    RallyOutcome outcome{};
    std::vector<std::string> trace;  // JSONL rows, empty unless emit_traces
};

// One closed-loop rally: launch, sense at sensor rate, filter, predict or
// refine or decay at the control rate, then plan, match, execute, and score
// at the commanded contact, and roll the struck ball out to classify the
// return.  `lib` may be null (no matching).
EpisodeResult run_episode(const SimulationConfig& cfg,
                          const MotionLibrary* lib,
                          std::uint64_t episode_index);

struct BatchResult {
    std::vector<RallyOutcome> outcomes;
    std::vector<std::vector<std::string>> traces;
    MetricsReport report{};
};

// Episodes [first, first + count) with per-episode RNG streams, so any
// split of the range reproduces the full batch outcome-for-outcome.
BatchResult run_batch(const SimulationConfig& cfg, const MotionLibrary* lib,
                      std::uint64_t first, std::uint64_t count);
BatchResult run_batch(const SimulationConfig& cfg,
                      const MotionLibrary* lib = nullptr);

// Report CSV: seed comment, column header, one row per episode, then a
// commented summary block.
std::vector<std::string> report_csv(const std::vector<RallyOutcome>& outs,
                                    const MetricsReport& report,
                                    std::uint64_t seed);

// Convergence-curve CSV: bin center, count, mean and std per error channel.
std::vector<std::string> convergence_csv(const MetricsReport& report,
                                         std::uint64_t seed);

}  // namespace rallykit

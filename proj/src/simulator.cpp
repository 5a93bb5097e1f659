#include "rallykit/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "rallykit/io.hpp"

namespace rallykit {

void SensorConfig::validate() const {
    if (!(rate > 0.0)) throw std::invalid_argument("sensor.rate must be > 0");
    if (!(drop_prob >= 0.0 && drop_prob <= 1.0)) {
        throw std::invalid_argument("sensor.drop_prob must be in [0, 1]");
    }
    if (!(camera_forward.norm() > 0.0)) {
        throw std::invalid_argument("sensor.camera_forward must be nonzero");
    }
    if (!(fov_half_angle > 0.0 && fov_half_angle <= M_PI)) {
        throw std::invalid_argument("sensor.fov_half_angle must be in (0, pi]");
    }
    if (!(r_base >= 0.0)) {
        throw std::invalid_argument("sensor.r_base must be >= 0");
    }
    if (!(beta >= 0.0)) throw std::invalid_argument("sensor.beta must be >= 0");
}

ExecErrorConfig ExecErrorConfig::ego() {
    ExecErrorConfig cfg;
    cfg.sigma_p = 0.065;
    cfg.sigma_v = 0.3;
    cfg.sigma_angle = 0.03;
    return cfg;
}

void ExecErrorConfig::validate() const {
    if (!(sigma_p >= 0.0)) {
        throw std::invalid_argument("exec_error.sigma_p must be >= 0");
    }
    if (!(sigma_v >= 0.0)) {
        throw std::invalid_argument("exec_error.sigma_v must be >= 0");
    }
    if (!(sigma_angle >= 0.0)) {
        throw std::invalid_argument("exec_error.sigma_angle must be >= 0");
    }
    if (!(latency >= 0.0)) {
        throw std::invalid_argument("exec_error.latency must be >= 0");
    }
}

void CommandNoiseConfig::validate() const {
    if (!(sigma_max >= 0.0)) {
        throw std::invalid_argument("command_noise.sigma_max must be >= 0");
    }
    if (!(tau_ref > 0.0)) {
        throw std::invalid_argument("command_noise.tau_ref must be > 0");
    }
}

void LaunchConfig::validate() const {
    for (int c = 0; c < 3; ++c) {
        if (!(p_min[c] <= p_max[c])) {
            throw std::invalid_argument("launch.p_min must be <= p_max");
        }
        if (!(v_min[c] <= v_max[c])) {
            throw std::invalid_argument("launch.v_min must be <= v_max");
        }
    }
    if (!(landing_x_min < landing_x_max)) {
        throw std::invalid_argument("launch.landing_x window is empty");
    }
    if (!(landing_y_abs > 0.0)) {
        throw std::invalid_argument("launch.landing_y_abs must be > 0");
    }
    if (max_attempts < 1) {
        throw std::invalid_argument("launch.max_attempts must be >= 1");
    }
}

void SrThresholds::validate() const {
    if (!(pos > 0.0 && orient > 0.0 && vel > 0.0)) {
        throw std::invalid_argument("sr thresholds must be > 0");
    }
}

void ScenarioConfig::validate() const {
    if (n_episodes < 1) {
        throw std::invalid_argument("scenario.n_episodes must be >= 1");
    }
    if (!(control_rate > 0.0)) {
        throw std::invalid_argument("scenario.control_rate must be > 0");
    }
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("scenario.horizon must be > 0");
    }
    if (!(truth_dt > 0.0 && truth_dt <= horizon)) {
        throw std::invalid_argument("scenario.truth_dt must be in (0, horizon]");
    }
    if (!(return_horizon > 0.0)) {
        throw std::invalid_argument("scenario.return_horizon must be > 0");
    }
    if (min_filter_updates < 1) {
        throw std::invalid_argument("scenario.min_filter_updates must be >= 1");
    }
    if (!(contact_radius > 0.0)) {
        throw std::invalid_argument("scenario.contact_radius must be > 0");
    }
    launch.validate();
    sensor.validate();
    exec_error.validate();
    command_noise.validate();
}

PlannerParams SimulationConfig::make_default_planner() {
    PlannerParams p;
    p.p_target = Eigen::Vector3d(0.685, 0.0, 0.0);
    return p;
}

EstimatorParams SimulationConfig::make_scenario_estimator() {
    EstimatorParams e;
    e.q_vel_base = 1e-3;
    e.r_base = 1e-4;
    e.v_init = Eigen::Vector3d(-4.5, 0.0, 1.5);
    e.p_init = EstimatorParams::default_p_init(1e-2, 4.0);
    return e;
}

void SimulationConfig::validate() const {
    physics.validate();
    estimator.validate();
    predictor.validate();
    volume.validate();
    planner.validate();
    scenario.validate();
    sr.validate();
    if (!(eps_scale >= 0.0)) {
        throw std::invalid_argument("eps_scale must be >= 0");
    }
}

const char* pred_stage_name(PredStage stage) {
    switch (stage) {
        case PredStage::initial: return "initial";
        case PredStage::refine: return "refine";
        case PredStage::decay: return "decay";
    }
    return "?";
}

namespace {

const char* update_status_name(UpdateStatus s) {
    switch (s) {
        case UpdateStatus::accepted: return "accepted";
        case UpdateStatus::initialized: return "initialized";
        case UpdateStatus::reinit_gap: return "reinit_gap";
        case UpdateStatus::reinit_return: return "reinit_return";
        case UpdateStatus::rejected_stale: return "rejected_stale";
    }
    return "?";
}

std::string pred_row(double t, const StrikePrediction& p, PredStage stage) {
    return "{\"t\":" + format_double(t) + ",\"tau\":" + format_double(p.tau) +
           ",\"phx\":" + format_double(p.p_hit.x()) +
           ",\"phy\":" + format_double(p.p_hit.y()) +
           ",\"phz\":" + format_double(p.p_hit.z()) +
           ",\"vhx\":" + format_double(p.v_hit_in.x()) +
           ",\"vhy\":" + format_double(p.v_hit_in.y()) +
           ",\"vhz\":" + format_double(p.v_hit_in.z()) + ",\"stage\":\"" +
           pred_stage_name(stage) + "\"}";
}

}  // namespace

LaunchResult launch_ball(Rng& rng, const LaunchConfig& cfg,
                         const PhysicsParams& physics, DragModel model,
                         const RigidTransform& oTt, const StrikeVolume& vol,
                         double horizon, double truth_dt) {
    cfg.validate();
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        Eigen::Vector3d p, v;
        for (int c = 0; c < 3; ++c) p[c] = rng.uniform(cfg.p_min[c], cfg.p_max[c]);
        for (int c = 0; c < 3; ++c) v[c] = rng.uniform(cfg.v_min[c], cfg.v_max[c]);
        const BallState init{p, v, FrameId::table};
        Trajectory traj = propagate(init, horizon, truth_dt, physics, model);

        std::size_t cross = traj.size();
        for (std::size_t i = 0; i < traj.size(); ++i) {
            if (oTt.rotate(traj.states[i].v).x() < 0.0 &&
                vol.contains(oTt.apply(traj.states[i].p))) {
                cross = i;
                break;
            }
        }
        if (cross == traj.size()) continue;

        if (cfg.require_bounce) {
            if (traj.bounces.empty() || traj.bounces.front() >= cross) continue;
            const Eigen::Vector3d& bp = traj.states[traj.bounces.front()].p;
            if (bp.x() < cfg.landing_x_min || bp.x() > cfg.landing_x_max ||
                std::abs(bp.y()) > cfg.landing_y_abs) {
                continue;
            }
        }
        return {init, std::move(traj)};
    }
    throw std::runtime_error("launch_ball: no feasible launch within max_attempts");
}

std::optional<Measurement> sense(const BallState& truth, double t,
                                 const SensorConfig& cfg, Rng& rng) {
    if (truth.frame != FrameId::table) {
        throw FrameMismatchError("sense: ball state must be in the table frame");
    }
    const Eigen::Vector3d rel = truth.p - cfg.camera_pos;
    const double d = rel.norm();
    const double along = rel.dot(cfg.camera_forward.normalized());
    if (along <= 0.0) return std::nullopt;
    if (std::acos(std::clamp(along / d, -1.0, 1.0)) > cfg.fov_half_angle) {
        return std::nullopt;
    }
    if (cfg.drop_prob > 0.0 && rng.uniform() < cfg.drop_prob) return std::nullopt;
    Measurement m{truth.p, t, d};
    if (cfg.r_base > 0.0) {
        m.z += rng.normal3(std::sqrt(cfg.r_base * (1.0 + cfg.beta * d)));
    }
    return m;
}

StrikePrediction perturb_command(const StrikePrediction& cmd,
                                 const CommandNoiseConfig& cfg, Rng& rng) {
    if (cfg.sigma_max <= 0.0) return cmd;
    const double sigma = cfg.sigma_max * std::min(cmd.tau / cfg.tau_ref, 1.0);
    if (sigma <= 0.0) return cmd;
    StrikePrediction out = cmd;
    out.p_hit += rng.normal3(sigma);
    out.v_hit_in += rng.normal3(sigma);
    return out;
}

RealizedStrike execute_strike(const StrikePrediction& cmd,
                              const StrikePlan& plan,
                              const ExecErrorConfig& cfg, Rng& rng) {
    RealizedStrike r;
    r.racket_pos = cmd.p_hit;
    r.racket_vel = plan.racket_velocity();
    r.n_hat = plan.n_hat;
    if (cfg.sigma_p > 0.0) r.racket_pos += rng.normal3(cfg.sigma_p);
    if (cfg.sigma_v > 0.0) r.racket_vel += rng.normal3(cfg.sigma_v);
    if (cfg.sigma_angle > 0.0) {
        const Eigen::Vector3d seed_axis = std::abs(plan.n_hat.x()) < 0.9
                                              ? Eigen::Vector3d::UnitX()
                                              : Eigen::Vector3d::UnitY();
        const Eigen::Vector3d t1 = plan.n_hat.cross(seed_axis).normalized();
        const Eigen::Vector3d t2 = plan.n_hat.cross(t1);
        const double a1 = rng.normal(0.0, cfg.sigma_angle);
        const double a2 = rng.normal(0.0, cfg.sigma_angle);
        r.n_hat = (plan.n_hat + a1 * t1 + a2 * t2).normalized();
    }
    return r;
}

StrikeScore score_strike(const RealizedStrike& realized,
                         const StrikePrediction& cmd, const StrikePlan& plan,
                         const SrThresholds& th) {
    StrikeScore s;
    s.e_p = (realized.racket_pos - cmd.p_hit).norm();
    s.e_v = (realized.racket_vel - plan.racket_velocity()).norm();
    // arccos(|n . m|) in atan2 form: well conditioned near alignment and
    // exactly zero for parallel or antiparallel unit normals.
    s.e_o = 100.0 * std::atan2(realized.n_hat.cross(plan.n_hat).norm(),
                               std::abs(realized.n_hat.dot(plan.n_hat)));
    s.ok_p = s.e_p < th.pos;
    s.ok_v = s.e_v < th.vel;
    s.ok_o = s.e_o < th.orient;
    s.success = s.ok_p && s.ok_v && s.ok_o;
    return s;
}

EpisodeResult run_episode(const SimulationConfig& cfg,
                          const MotionLibrary* lib,
                          std::uint64_t episode_index) {
    cfg.validate();
    const ScenarioConfig& sc = cfg.scenario;
    const RigidTransform& oTt = cfg.calibration.oTt();
    const DragModel model = sc.drag_model;
    const bool emit = sc.emit_traces;

    Rng rng = Rng::stream(cfg.seed, episode_index);
    EpisodeResult result;
    RallyOutcome& out = result.outcome;
    out.episode = episode_index;

    LaunchResult launch = launch_ball(rng, sc.launch, cfg.physics, model, oTt,
                                      cfg.volume, sc.horizon, sc.truth_dt);
    double plane_cross_t = sc.horizon;
    for (std::size_t i = 0; i < launch.truth.size(); ++i) {
        if (oTt.apply(launch.truth.states[i].p).x() <= cfg.predictor.c_s_x) {
            plane_cross_t = launch.truth.t[i];
            break;
        }
    }
    if (emit) {
        result.trace.push_back("{\"event\":\"launch\",\"p\":" +
                               format_vec3(launch.initial.p) + ",\"v\":" +
                               format_vec3(launch.initial.v) + "}");
    }

    EstimatorParams belief = cfg.estimator;
    belief.physics = cfg.physics;
    belief.model = model;
    if (sc.ablations.no_collision) belief.bounce_in_predict = false;
    if (sc.ablations.no_adaptive_noise) belief.adaptive_noise = false;
    if (sc.ablations.zero_init) belief.v_init.setZero();
    AdaptiveEkf ekf(belief);

    const double dt_c = 1.0 / sc.control_rate;
    const double meas_period = 1.0 / sc.sensor.rate;
    double next_meas_t = 0.0;
    std::optional<double> first_init_t;
    std::optional<StrikePrediction> pred;
    std::vector<double> series_t;
    std::vector<StrikePrediction> series;
    std::vector<PredStage> stages;

    const long n_ticks = std::lround(sc.horizon * sc.control_rate);
    for (long tick = 0; tick <= n_ticks; ++tick) {
        const double t = tick * dt_c;
        const BallState truth_now = launch.truth.interpolate(t);
        bool consumed = false;

        std::string row;
        if (emit) {
            row = "{\"t\":" + format_double(t) +
                  ",\"truth_p\":" + format_vec3(truth_now.p) +
                  ",\"truth_v\":" + format_vec3(truth_now.v);
        }

        if (t + 1e-9 >= next_meas_t) {
            next_meas_t += meas_period;
            const std::optional<Measurement> m = sense(truth_now, t, sc.sensor, rng);
            if (m) {
                const UpdateResult res = ekf.update(*m);
                consumed = res.status != UpdateStatus::rejected_stale;
                if (consumed && !first_init_t) first_init_t = t;
                if (emit) {
                    row += ",\"z\":" + format_vec3(m->z) +
                           ",\"d\":" + format_double(m->d) +
                           ",\"est_p\":" + format_vec3(res.estimate.p) +
                           ",\"est_v\":" + format_vec3(res.estimate.v) +
                           ",\"status\":\"" + update_status_name(res.status) +
                           "\"";
                }
            }
        }
        if (emit) result.trace.push_back(row + "}");

        bool stepped = false;
        PredStage stage = PredStage::decay;
        if (consumed && ekf.updates_since_init() >= sc.min_filter_updates) {
            const BallState est = ekf.estimate();
            if (pred) {
                const auto refined = refine(*pred, est, oTt, cfg.predictor,
                                            cfg.physics, model);
                if (refined) {
                    pred = refined;
                    stage = PredStage::refine;
                    stepped = true;
                } else {
                    pred = decay_and_clip(*pred, dt_c, cfg.predictor, cfg.volume);
                    stepped = pred.has_value();
                }
            } else {
                const auto found = initial_search(est, oTt, cfg.predictor,
                                                  cfg.volume, cfg.physics, model);
                if (found) {
                    pred = found;
                    stage = PredStage::initial;
                    stepped = true;
                }
            }
        } else if (pred) {
            pred = decay_and_clip(*pred, dt_c, cfg.predictor, cfg.volume);
            stepped = pred.has_value();
        }
        if (stepped) {
            series_t.push_back(t);
            series.push_back(*pred);
            stages.push_back(stage);
            if (emit) result.trace.push_back(pred_row(t, *pred, stage));
        }

        if (pred && pred->tau < dt_c) {
            out.strike_attempted = true;
            const StrikePrediction cmd = perturb_command(*pred, sc.command_noise, rng);
            const double t_contact = t + cmd.tau;
            out.t_contact = t_contact;

            const Eigen::Vector3d p_target_o = oTt.apply(cfg.planner.p_target);
            const Eigen::Vector3d v_out = desired_outgoing_velocity(
                cmd.p_hit, p_target_o, cfg.planner.t_f, cfg.planner.k,
                cfg.planner.g_z);
            const StrikePlan plan = racket_plan(cmd.v_hit_in, v_out, cfg.planner.e);

            if (lib && !lib->empty()) {
                out.matched_clip = static_cast<std::int64_t>(
                    lib->match(cmd.p_hit, cfg.match_anchor, cfg.eps_scale, rng));
            }

            const RealizedStrike realized =
                execute_strike(cmd, plan, sc.exec_error, rng);
            out.score = score_strike(realized, cmd, plan, cfg.sr);

            const double t_real = t_contact + sc.exec_error.latency;
            const BallState truth_c = launch.truth.interpolate(t_real);
            const Eigen::Vector3d p_true_o = oTt.apply(truth_c.p);
            out.hit = (realized.racket_pos - p_true_o).norm() <= sc.contact_radius;

            if (out.hit) {
                StrikePlan real_face;
                real_face.n_hat = realized.n_hat;
                real_face.v_n = realized.racket_vel.dot(realized.n_hat);
                const Eigen::Vector3d v_in_o = oTt.rotate(truth_c.v);
                const Eigen::Vector3d v_out_o =
                    apply_racket_collision(v_in_o, real_face, cfg.planner.e);
                const RigidTransform tTo = oTt.inverse();
                const BallState post{truth_c.p, tTo.rotate(v_out_o),
                                     FrameId::table};
                const Trajectory ret = propagate(post, sc.return_horizon,
                                                 sc.truth_dt, cfg.physics, model);
                if (!ret.bounces.empty()) {
                    const Eigen::Vector3d& lp = ret.states[ret.bounces.front()].p;
                    out.has_landing = true;
                    out.landing = lp;
                    out.landing_bias =
                        (lp.head<2>() - cfg.planner.p_target.head<2>()).norm();
                    out.returned =
                        lp.x() > 0.0 && std::abs(lp.y()) < cfg.physics.l_y;
                }
            }
            if (emit) {
                result.trace.push_back(
                    "{\"event\":\"strike\",\"t\":" + format_double(t) +
                    ",\"t_contact\":" + format_double(t_contact) +
                    ",\"p_hit\":" + format_vec3(cmd.p_hit) +
                    ",\"v_out\":" + format_vec3(plan.v_out) +
                    ",\"e_p\":" + format_double(out.score.e_p) +
                    ",\"e_v\":" + format_double(out.score.e_v) +
                    ",\"e_o\":" + format_double(out.score.e_o) +
                    ",\"success\":" + (out.score.success ? "1" : "0") +
                    ",\"hit\":" + (out.hit ? "1" : "0") + ",\"matched_clip\":" +
                    std::to_string(out.matched_clip) + "}");
            }
            break;
        }
    }

    out.detected = first_init_t.has_value() && *first_init_t <= plane_cross_t;

    // Error series against the last measurement-driven prediction, the
    // stand-in for truth once the ball leaves the camera's view.
    std::ptrdiff_t ref = -1;
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(series.size()) - 1;
         i >= 0; --i) {
        if (stages[i] != PredStage::decay) {
            ref = i;
            break;
        }
    }
    if (ref >= 0) {
        const StrikePrediction& r = series[ref];
        const double t_ref = series_t[ref] + r.tau;
        for (std::size_t i = 0; i < series.size(); ++i) {
            const double tts = t_ref - series_t[i];
            if (tts < 0.0) continue;
            out.pred_errors.push_back(
                {tts, (series[i].p_hit - r.p_hit).norm(),
                 (series[i].v_hit_in - r.v_hit_in).norm(),
                 std::abs(series_t[i] + series[i].tau - t_ref)});
        }
    }

    if (emit) {
        std::string row = "{\"event\":\"outcome\",\"detected\":";
        row += out.detected ? "1" : "0";
        row += ",\"hit\":";
        row += out.hit ? "1" : "0";
        row += ",\"returned\":";
        row += out.returned ? "1" : "0";
        if (out.has_landing) {
            row += ",\"landing\":" + format_vec3(out.landing) +
                   ",\"landing_bias\":" + format_double(out.landing_bias);
        }
        result.trace.push_back(row + "}");
    }
    return result;
}

MetricsReport MetricsReport::from_outcomes(const std::vector<RallyOutcome>& outs,
                                           const SrThresholds& th) {
    th.validate();
    MetricsReport r;
    r.n_episodes = outs.size();
    r.bins.resize(12);
    for (std::size_t b = 0; b < r.bins.size(); ++b) {
        r.bins[b].lo = 0.1 * static_cast<double>(b);
        r.bins[b].hi = r.bins[b].lo + 0.1;
    }
    std::vector<Eigen::Vector3d> bin_sum(r.bins.size(), Eigen::Vector3d::Zero());
    std::vector<Eigen::Vector3d> bin_sumsq(r.bins.size(),
                                           Eigen::Vector3d::Zero());

    double sum_e_p = 0.0, sum_e_v = 0.0, sum_e_o = 0.0;
    std::size_t n_success = 0;
    double sum_pos = 0.0, sum_vel = 0.0, sum_tau = 0.0;
    for (const RallyOutcome& o : outs) {
        r.n_detected += o.detected ? 1 : 0;
        r.n_hit += o.hit ? 1 : 0;
        r.n_returned += o.returned ? 1 : 0;
        if (o.strike_attempted) {
            ++r.n_strikes;
            sum_e_p += o.score.e_p;
            sum_e_v += o.score.e_v;
            sum_e_o += o.score.e_o;
            n_success += o.score.success ? 1 : 0;
        }
        for (const PredError& pe : o.pred_errors) {
            ++r.n_pred;
            sum_pos += pe.err_pos;
            sum_vel += pe.err_vel;
            sum_tau += pe.err_tau;
            const std::ptrdiff_t b = static_cast<std::ptrdiff_t>(
                std::floor(pe.tts / 0.1));
            if (b < 0 || b >= static_cast<std::ptrdiff_t>(r.bins.size())) {
                continue;
            }
            ++r.bins[b].n;
            const Eigen::Vector3d e(pe.err_pos, pe.err_vel, pe.err_tau);
            bin_sum[b] += e;
            bin_sumsq[b] += e.cwiseProduct(e);
        }
    }
    const double n_ep = static_cast<double>(r.n_episodes);
    if (r.n_episodes > 0) {
        r.sr_det = static_cast<double>(r.n_detected) / n_ep;
        r.sr_hit = static_cast<double>(r.n_hit) / n_ep;
        r.sr_return = static_cast<double>(r.n_returned) / n_ep;
    }
    if (r.n_strikes > 0) {
        const double n_s = static_cast<double>(r.n_strikes);
        r.sr = static_cast<double>(n_success) / n_s;
        r.mean_e_p = sum_e_p / n_s;
        r.mean_e_v = sum_e_v / n_s;
        r.mean_e_o = sum_e_o / n_s;
    }
    if (r.n_pred > 0) {
        const double n_p = static_cast<double>(r.n_pred);
        r.e_predpos = sum_pos / n_p;
        r.e_predvel = sum_vel / n_p;
        r.e_predtau = sum_tau / n_p;
    }
    for (std::size_t b = 0; b < r.bins.size(); ++b) {
        if (r.bins[b].n == 0) continue;
        const double n = static_cast<double>(r.bins[b].n);
        const Eigen::Vector3d mean = bin_sum[b] / n;
        const Eigen::Vector3d var =
            (bin_sumsq[b] / n - mean.cwiseProduct(mean)).cwiseMax(0.0);
        r.bins[b].mean_pos = mean.x();
        r.bins[b].mean_vel = mean.y();
        r.bins[b].mean_tau = mean.z();
        r.bins[b].std_pos = std::sqrt(var.x());
        r.bins[b].std_vel = std::sqrt(var.y());
        r.bins[b].std_tau = std::sqrt(var.z());
    }
    return r;
}

BatchResult run_batch(const SimulationConfig& cfg, const MotionLibrary* lib,
                      std::uint64_t first, std::uint64_t count) {
    cfg.validate();
    BatchResult br;
    br.outcomes.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        EpisodeResult er = run_episode(cfg, lib, first + i);
        br.outcomes.push_back(std::move(er.outcome));
        if (cfg.scenario.emit_traces) br.traces.push_back(std::move(er.trace));
    }
    br.report = MetricsReport::from_outcomes(br.outcomes, cfg.sr);
    return br;
}

BatchResult run_batch(const SimulationConfig& cfg, const MotionLibrary* lib) {
    return run_batch(cfg, lib, 0,
                     static_cast<std::uint64_t>(cfg.scenario.n_episodes));
}

std::vector<std::string> report_csv(const std::vector<RallyOutcome>& outs,
                                    const MetricsReport& report,
                                    std::uint64_t seed) {
    std::vector<std::string> lines;
    lines.push_back("# seed " + std::to_string(seed));
    lines.push_back(
        "episode,detected,hit,returned,strike,e_p,e_v,e_o,success,"
        "matched_clip,n_pred,e_predpos,e_predvel,e_predtau,t_contact,"
        "has_landing,landing_x,landing_y,landing_bias");
    for (const RallyOutcome& o : outs) {
        double ep_pos = 0.0, ep_vel = 0.0, ep_tau = 0.0;
        for (const PredError& pe : o.pred_errors) {
            ep_pos += pe.err_pos;
            ep_vel += pe.err_vel;
            ep_tau += pe.err_tau;
        }
        if (!o.pred_errors.empty()) {
            const double n = static_cast<double>(o.pred_errors.size());
            ep_pos /= n;
            ep_vel /= n;
            ep_tau /= n;
        }
        std::string row = std::to_string(o.episode);
        row += o.detected ? ",1" : ",0";
        row += o.hit ? ",1" : ",0";
        row += o.returned ? ",1" : ",0";
        row += o.strike_attempted ? ",1" : ",0";
        row += "," + format_double(o.score.e_p);
        row += "," + format_double(o.score.e_v);
        row += "," + format_double(o.score.e_o);
        row += o.score.success ? ",1" : ",0";
        row += "," + std::to_string(o.matched_clip);
        row += "," + std::to_string(o.pred_errors.size());
        row += "," + format_double(ep_pos);
        row += "," + format_double(ep_vel);
        row += "," + format_double(ep_tau);
        row += "," + format_double(o.t_contact);
        row += o.has_landing ? ",1" : ",0";
        row += "," + format_double(o.landing.x());
        row += "," + format_double(o.landing.y());
        row += "," + format_double(o.landing_bias);
        lines.push_back(row);
    }
    lines.push_back("# summary");
    lines.push_back("# n_episodes," + std::to_string(report.n_episodes));
    lines.push_back("# sr_det," + format_double(report.sr_det));
    lines.push_back("# sr_hit," + format_double(report.sr_hit));
    lines.push_back("# sr_return," + format_double(report.sr_return));
    lines.push_back("# n_strikes," + std::to_string(report.n_strikes));
    lines.push_back("# sr," + format_double(report.sr));
    lines.push_back("# mean_e_p," + format_double(report.mean_e_p));
    lines.push_back("# mean_e_v," + format_double(report.mean_e_v));
    lines.push_back("# mean_e_o," + format_double(report.mean_e_o));
    lines.push_back("# n_pred," + std::to_string(report.n_pred));
    lines.push_back("# e_predpos," + format_double(report.e_predpos));
    lines.push_back("# e_predvel," + format_double(report.e_predvel));
    lines.push_back("# e_predtau," + format_double(report.e_predtau));
    return lines;
}

std::vector<std::string> convergence_csv(const MetricsReport& report,
                                         std::uint64_t seed) {
    std::vector<std::string> lines;
    lines.push_back("# seed " + std::to_string(seed));
    lines.push_back(
        "bin_center,n,mean_pos,std_pos,mean_vel,std_vel,mean_tau,std_tau");
    for (const ConvergenceBin& b : report.bins) {
        lines.push_back(format_double(0.5 * (b.lo + b.hi)) + "," +
                        std::to_string(b.n) + "," + format_double(b.mean_pos) +
                        "," + format_double(b.std_pos) + "," +
                        format_double(b.mean_vel) + "," +
                        format_double(b.std_vel) + "," +
                        format_double(b.mean_tau) + "," +
                        format_double(b.std_tau));
    }
    return lines;
}

}  // namespace rallykit

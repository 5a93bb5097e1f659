#include "rallykit/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rallykit {

namespace {

using nlohmann::json;

// Object view that tracks consumed keys so finish() can reject unknown ones
// with a full path.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw std::invalid_argument("config: " + path_ +
                                        " must be a JSON object");
        }
    }

    double number(const std::string& key, double def) {
        seen_.insert(key);
        if (!j_.contains(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_number()) bad(key, "a number");
        return v.get<double>();
    }

    int integer(const std::string& key, int def) {
        seen_.insert(key);
        if (!j_.contains(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) bad(key, "an integer");
        return v.get<int>();
    }

    std::uint64_t u64(const std::string& key, std::uint64_t def) {
        seen_.insert(key);
        if (!j_.contains(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_number_unsigned() && !v.is_number_integer()) {
            bad(key, "an integer");
        }
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool def) {
        seen_.insert(key);
        if (!j_.contains(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_boolean()) bad(key, "a boolean");
        return v.get<bool>();
    }

    std::string str(const std::string& key, const std::string& def) {
        seen_.insert(key);
        if (!j_.contains(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_string()) bad(key, "a string");
        return v.get<std::string>();
    }

    Eigen::Vector3d vec3(const std::string& key, const Eigen::Vector3d& def) {
        seen_.insert(key);
        if (!j_.contains(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_array() || v.size() != 3) bad(key, "an array of 3 numbers");
        Eigen::Vector3d out;
        for (int c = 0; c < 3; ++c) {
            if (!v[c].is_number()) bad(key, "an array of 3 numbers");
            out[c] = v[c].get<double>();
        }
        return out;
    }

    // Nested object; absent key yields an empty object.
    json child(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) return json::object();
        const json& v = j_.at(key);
        if (!v.is_object()) bad(key, "an object");
        return v;
    }

    std::string sub_path(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.count(item.key())) {
                throw std::invalid_argument("config: unknown key " +
                                            sub_path(item.key()));
            }
        }
    }

private:
    [[noreturn]] void bad(const std::string& key, const char* expect) const {
        throw std::invalid_argument("config: " + sub_path(key) + " must be " +
                                    expect);
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

DragModel parse_drag_model(const std::string& name, const std::string& path) {
    if (name == "quadratic") return DragModel::quadratic;
    if (name == "linear") return DragModel::linear;
    throw std::invalid_argument("config: " + path +
                                " must be \"quadratic\" or \"linear\"");
}

json vec3_json(const Eigen::Vector3d& v) {
    return json::array({v.x(), v.y(), v.z()});
}

GlobalConfig parse(const json& root) {
    GlobalConfig cfg;
    Section top(root, "");

    cfg.seed = top.u64("seed", cfg.seed);
    cfg.out_dir = top.str("out_dir", cfg.out_dir);

    {
        const json j = top.child("frames");
        Section s(j, "frames");
        cfg.d_orig = s.number("d_orig", cfg.d_orig);
        cfg.table_height = s.number("table_height", cfg.table_height);
        cfg.calibration_file = s.str("calibration_file", cfg.calibration_file);
        s.finish();
    }
    {
        const json j = top.child("physics");
        Section s(j, "physics");
        cfg.physics.k = s.number("k", cfg.physics.k);
        cfg.physics.g = s.number("g", cfg.physics.g);
        cfg.physics.c_h = s.number("c_h", cfg.physics.c_h);
        cfg.physics.c_v = s.number("c_v", cfg.physics.c_v);
        cfg.physics.z_c = s.number("z_c", cfg.physics.z_c);
        cfg.physics.l_x = s.number("l_x", cfg.physics.l_x);
        cfg.physics.l_y = s.number("l_y", cfg.physics.l_y);
        s.finish();
    }
    {
        const json j = top.child("estimator");
        Section s(j, "estimator");
        EstimatorParams& e = cfg.estimator;
        e.q_pos_base = s.number("q_pos_base", e.q_pos_base);
        e.q_vel_base = s.number("q_vel_base", e.q_vel_base);
        e.dt0 = s.number("dt0", e.dt0);
        e.r_base = s.number("r_base", e.r_base);
        e.beta = s.number("beta", e.beta);
        e.dt_max = s.number("dt_max", e.dt_max);
        e.tau_x = s.number("tau_x", e.tau_x);
        e.v_init = s.vec3("v_init", e.v_init);
        cfg.p_init_pos = s.number("p_init_pos", cfg.p_init_pos);
        cfg.p_init_vel = s.number("p_init_vel", cfg.p_init_vel);
        e.substep_dt = s.number("substep_dt", e.substep_dt);
        e.bounce_in_predict = s.boolean("bounce_in_predict", e.bounce_in_predict);
        e.adaptive_noise = s.boolean("adaptive_noise", e.adaptive_noise);
        s.finish();
    }
    {
        const json j = top.child("predictor");
        Section s(j, "predictor");
        PredictorConfig& p = cfg.predictor;
        p.t_det_min = s.number("t_det_min", p.t_det_min);
        p.t_det_max = s.number("t_det_max", p.t_det_max);
        p.coarse_step = s.number("coarse_step", p.coarse_step);
        p.w_tau = s.number("w_tau", p.w_tau);
        p.delta_tau = s.number("delta_tau", p.delta_tau);
        p.c_s_x = s.number("c_s_x", p.c_s_x);
        p.tau_min = s.number("tau_min", p.tau_min);
        p.tau_max = s.number("tau_max", p.tau_max);
        p.sim_dt = s.number("sim_dt", p.sim_dt);
        p.v_bound = s.number("v_bound", p.v_bound);
        p.clip_outputs = s.boolean("clip_outputs", p.clip_outputs);
        {
            const json jv = s.child("volume");
            Section sv(jv, "predictor.volume");
            StrikeVolume& v = cfg.volume;
            v.x_min = sv.number("x_min", v.x_min);
            v.x_max = sv.number("x_max", v.x_max);
            v.y_min = sv.number("y_min", v.y_min);
            v.y_max = sv.number("y_max", v.y_max);
            v.z_min = sv.number("z_min", v.z_min);
            v.z_max = sv.number("z_max", v.z_max);
            sv.finish();
        }
        s.finish();
    }
    {
        const json j = top.child("planner");
        Section s(j, "planner");
        PlannerParams& p = cfg.planner;
        p.k = s.number("k", p.k);
        p.g_z = s.number("g_z", p.g_z);
        p.t_f = s.number("t_f", p.t_f);
        p.e = s.number("e", p.e);
        p.p_target = s.vec3("p_target", p.p_target);
        s.finish();
    }
    {
        const json j = top.child("motionlib");
        Section s(j, "motionlib");
        cfg.eps_scale = s.number("eps_scale", cfg.eps_scale);
        cfg.match_anchor = s.vec3("anchor", cfg.match_anchor);
        cfg.library_size = s.integer("library_size", cfg.library_size);
        {
            const json jt = s.child("thresholds");
            Section st(jt, "motionlib.thresholds");
            QualityThresholds& t = cfg.thresholds;
            t.center_window = st.number("center_window", t.center_window);
            t.phase_tol = st.number("phase_tol", t.phase_tol);
            t.z_g = st.number("z_g", t.z_g);
            t.max_l_foot = st.number("max_l_foot", t.max_l_foot);
            t.max_l_phase = st.number("max_l_phase", t.max_l_phase);
            st.finish();
        }
        {
            const json js = s.child("style");
            Section ss(js, "motionlib.style");
            SwingStyle& st = cfg.style;
            st.n_dof = ss.integer("n_dof", st.n_dof);
            st.frame_dt = ss.number("frame_dt", st.frame_dt);
            st.duration = ss.number("duration", st.duration);
            st.torso_start = ss.vec3("torso_start", st.torso_start);
            st.rest_offset = ss.vec3("rest_offset", st.rest_offset);
            st.foot_height = ss.number("foot_height", st.foot_height);
            st.n_foot_points = ss.integer("n_foot_points", st.n_foot_points);
            st.reach_min = ss.vec3("reach_min", st.reach_min);
            st.reach_max = ss.vec3("reach_max", st.reach_max);
            ss.finish();
        }
        s.finish();
    }
    {
        const json j = top.child("scenario");
        Section s(j, "scenario");
        ScenarioConfig& sc = cfg.scenario;
        sc.n_episodes = s.integer("n_episodes", sc.n_episodes);
        sc.control_rate = s.number("control_rate", sc.control_rate);
        sc.horizon = s.number("horizon", sc.horizon);
        sc.truth_dt = s.number("truth_dt", sc.truth_dt);
        sc.return_horizon = s.number("return_horizon", sc.return_horizon);
        sc.min_filter_updates =
            s.integer("min_filter_updates", sc.min_filter_updates);
        sc.contact_radius = s.number("contact_radius", sc.contact_radius);
        sc.drag_model = parse_drag_model(
            s.str("drag_model", "quadratic"), "scenario.drag_model");
        sc.emit_traces = s.boolean("emit_traces", sc.emit_traces);
        {
            const json jl = s.child("launch");
            Section sl(jl, "scenario.launch");
            LaunchConfig& l = sc.launch;
            l.p_min = sl.vec3("p_min", l.p_min);
            l.p_max = sl.vec3("p_max", l.p_max);
            l.v_min = sl.vec3("v_min", l.v_min);
            l.v_max = sl.vec3("v_max", l.v_max);
            l.landing_x_min = sl.number("landing_x_min", l.landing_x_min);
            l.landing_x_max = sl.number("landing_x_max", l.landing_x_max);
            l.landing_y_abs = sl.number("landing_y_abs", l.landing_y_abs);
            l.max_attempts = sl.integer("max_attempts", l.max_attempts);
            l.require_bounce = sl.boolean("require_bounce", l.require_bounce);
            sl.finish();
        }
        {
            const json js = s.child("sensor");
            Section ss(js, "scenario.sensor");
            SensorConfig& sn = sc.sensor;
            sn.rate = ss.number("rate", sn.rate);
            sn.drop_prob = ss.number("drop_prob", sn.drop_prob);
            sn.camera_pos = ss.vec3("camera_pos", sn.camera_pos);
            sn.camera_forward = ss.vec3("camera_forward", sn.camera_forward);
            sn.fov_half_angle = ss.number("fov_half_angle", sn.fov_half_angle);
            sn.r_base = ss.number("r_base", sn.r_base);
            sn.beta = ss.number("beta", sn.beta);
            ss.finish();
        }
        {
            const json je = s.child("exec_error");
            Section se(je, "scenario.exec_error");
            const std::string preset = se.str("preset", "");
            if (!preset.empty()) {
                if (preset != "ego") {
                    throw std::invalid_argument(
                        "config: scenario.exec_error.preset must be \"ego\"");
                }
                sc.exec_error = ExecErrorConfig::ego();
            }
            ExecErrorConfig& e = sc.exec_error;
            e.sigma_p = se.number("sigma_p", e.sigma_p);
            e.sigma_v = se.number("sigma_v", e.sigma_v);
            e.sigma_angle = se.number("sigma_angle", e.sigma_angle);
            e.latency = se.number("latency", e.latency);
            se.finish();
        }
        {
            const json jc = s.child("command_noise");
            Section scn(jc, "scenario.command_noise");
            CommandNoiseConfig& c = sc.command_noise;
            c.sigma_max = scn.number("sigma_max", c.sigma_max);
            c.tau_ref = scn.number("tau_ref", c.tau_ref);
            scn.finish();
        }
        {
            const json ja = s.child("ablations");
            Section sa(ja, "scenario.ablations");
            AblationConfig& a = sc.ablations;
            a.no_collision = sa.boolean("no_collision", a.no_collision);
            a.no_adaptive_noise =
                sa.boolean("no_adaptive_noise", a.no_adaptive_noise);
            a.zero_init = sa.boolean("zero_init", a.zero_init);
            sa.finish();
        }
        s.finish();
    }
    {
        const json j = top.child("sr");
        Section s(j, "sr");
        cfg.sr.pos = s.number("pos", cfg.sr.pos);
        cfg.sr.orient = s.number("orient", cfg.sr.orient);
        cfg.sr.vel = s.number("vel", cfg.sr.vel);
        s.finish();
    }
    top.finish();
    cfg.validate();
    return cfg;
}

}  // namespace

GlobalConfig::GlobalConfig() {
    planner.p_target = Eigen::Vector3d(0.685, 0.0, 0.0);
    estimator = SimulationConfig::make_scenario_estimator();
}

void GlobalConfig::validate() const {
    if (!(d_orig >= 0.0)) {
        throw std::invalid_argument("frames.d_orig must be >= 0");
    }
    if (!(table_height > 0.0)) {
        throw std::invalid_argument("frames.table_height must be > 0");
    }
    physics.validate();
    estimator.validate();
    if (!(p_init_pos > 0.0)) {
        throw std::invalid_argument("estimator.p_init_pos must be > 0");
    }
    if (!(p_init_vel > 0.0)) {
        throw std::invalid_argument("estimator.p_init_vel must be > 0");
    }
    predictor.validate();
    volume.validate();
    planner.validate();
    if (!(eps_scale >= 0.0)) {
        throw std::invalid_argument("motionlib.eps_scale must be >= 0");
    }
    thresholds.validate();
    if (library_size < 0) {
        throw std::invalid_argument("motionlib.library_size must be >= 0");
    }
    scenario.validate();
    sr.validate();
}

GlobalConfig GlobalConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

GlobalConfig GlobalConfig::from_json_text(const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        GlobalConfig cfg;
        cfg.validate();
        return cfg;
    }
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    return parse(root);
}

std::string GlobalConfig::dump() const {
    json root;
    root["seed"] = seed;
    root["out_dir"] = out_dir;
    root["frames"] = {{"d_orig", d_orig},
                      {"table_height", table_height},
                      {"calibration_file", calibration_file}};
    root["physics"] = {{"k", physics.k},   {"g", physics.g},
                       {"c_h", physics.c_h}, {"c_v", physics.c_v},
                       {"z_c", physics.z_c}, {"l_x", physics.l_x},
                       {"l_y", physics.l_y}};
    root["estimator"] = {{"q_pos_base", estimator.q_pos_base},
                         {"q_vel_base", estimator.q_vel_base},
                         {"dt0", estimator.dt0},
                         {"r_base", estimator.r_base},
                         {"beta", estimator.beta},
                         {"dt_max", estimator.dt_max},
                         {"tau_x", estimator.tau_x},
                         {"v_init", vec3_json(estimator.v_init)},
                         {"p_init_pos", p_init_pos},
                         {"p_init_vel", p_init_vel},
                         {"substep_dt", estimator.substep_dt},
                         {"bounce_in_predict", estimator.bounce_in_predict},
                         {"adaptive_noise", estimator.adaptive_noise}};
    root["predictor"] = {{"t_det_min", predictor.t_det_min},
                         {"t_det_max", predictor.t_det_max},
                         {"coarse_step", predictor.coarse_step},
                         {"w_tau", predictor.w_tau},
                         {"delta_tau", predictor.delta_tau},
                         {"c_s_x", predictor.c_s_x},
                         {"tau_min", predictor.tau_min},
                         {"tau_max", predictor.tau_max},
                         {"sim_dt", predictor.sim_dt},
                         {"v_bound", predictor.v_bound},
                         {"clip_outputs", predictor.clip_outputs},
                         {"volume",
                          {{"x_min", volume.x_min},
                           {"x_max", volume.x_max},
                           {"y_min", volume.y_min},
                           {"y_max", volume.y_max},
                           {"z_min", volume.z_min},
                           {"z_max", volume.z_max}}}};
    root["planner"] = {{"k", planner.k},
                       {"g_z", planner.g_z},
                       {"t_f", planner.t_f},
                       {"e", planner.e},
                       {"p_target", vec3_json(planner.p_target)}};
    root["motionlib"] = {{"eps_scale", eps_scale},
                         {"anchor", vec3_json(match_anchor)},
                         {"library_size", library_size},
                         {"thresholds",
                          {{"center_window", thresholds.center_window},
                           {"phase_tol", thresholds.phase_tol},
                           {"z_g", thresholds.z_g},
                           {"max_l_foot", thresholds.max_l_foot},
                           {"max_l_phase", thresholds.max_l_phase}}},
                         {"style",
                          {{"n_dof", style.n_dof},
                           {"frame_dt", style.frame_dt},
                           {"duration", style.duration},
                           {"torso_start", vec3_json(style.torso_start)},
                           {"rest_offset", vec3_json(style.rest_offset)},
                           {"foot_height", style.foot_height},
                           {"n_foot_points", style.n_foot_points},
                           {"reach_min", vec3_json(style.reach_min)},
                           {"reach_max", vec3_json(style.reach_max)}}}};
    root["scenario"] = {
        {"n_episodes", scenario.n_episodes},
        {"control_rate", scenario.control_rate},
        {"horizon", scenario.horizon},
        {"truth_dt", scenario.truth_dt},
        {"return_horizon", scenario.return_horizon},
        {"min_filter_updates", scenario.min_filter_updates},
        {"contact_radius", scenario.contact_radius},
        {"drag_model",
         scenario.drag_model == DragModel::linear ? "linear" : "quadratic"},
        {"emit_traces", scenario.emit_traces},
        {"launch",
         {{"p_min", vec3_json(scenario.launch.p_min)},
          {"p_max", vec3_json(scenario.launch.p_max)},
          {"v_min", vec3_json(scenario.launch.v_min)},
          {"v_max", vec3_json(scenario.launch.v_max)},
          {"landing_x_min", scenario.launch.landing_x_min},
          {"landing_x_max", scenario.launch.landing_x_max},
          {"landing_y_abs", scenario.launch.landing_y_abs},
          {"max_attempts", scenario.launch.max_attempts},
          {"require_bounce", scenario.launch.require_bounce}}},
        {"sensor",
         {{"rate", scenario.sensor.rate},
          {"drop_prob", scenario.sensor.drop_prob},
          {"camera_pos", vec3_json(scenario.sensor.camera_pos)},
          {"camera_forward", vec3_json(scenario.sensor.camera_forward)},
          {"fov_half_angle", scenario.sensor.fov_half_angle},
          {"r_base", scenario.sensor.r_base},
          {"beta", scenario.sensor.beta}}},
        {"exec_error",
         {{"sigma_p", scenario.exec_error.sigma_p},
          {"sigma_v", scenario.exec_error.sigma_v},
          {"sigma_angle", scenario.exec_error.sigma_angle},
          {"latency", scenario.exec_error.latency}}},
        {"command_noise",
         {{"sigma_max", scenario.command_noise.sigma_max},
          {"tau_ref", scenario.command_noise.tau_ref}}},
        {"ablations",
         {{"no_collision", scenario.ablations.no_collision},
          {"no_adaptive_noise", scenario.ablations.no_adaptive_noise},
          {"zero_init", scenario.ablations.zero_init}}}};
    root["sr"] = {{"pos", sr.pos}, {"orient", sr.orient}, {"vel", sr.vel}};
    return root.dump(2);
}

SimulationConfig GlobalConfig::to_simulation() const {
    validate();
    SimulationConfig s;
    s.seed = seed;
    s.physics = physics;
    s.estimator = estimator;
    s.estimator.p_init = EstimatorParams::default_p_init(p_init_pos, p_init_vel);
    s.estimator.physics = physics;
    s.predictor = predictor;
    s.volume = volume;
    s.planner = planner;
    s.scenario = scenario;
    s.sr = sr;
    s.calibration = calibration_file.empty()
                        ? default_calibration(physics.l_x, d_orig, table_height)
                        : CalibrationSet::load(calibration_file);
    s.match_anchor = match_anchor;
    s.eps_scale = eps_scale;
    return s;
}

}  // namespace rallykit

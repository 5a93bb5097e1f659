#include "rallykit/motionlib.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace rallykit {
namespace {

constexpr double kTwoPi = 2.0 * M_PI;

Eigen::Vector2d phase_encoding(double phi) {
    return {std::sin(phi), std::cos(phi)};
}

double wrap_to_pi(double a) {
    double w = std::fmod(a + M_PI, kTwoPi);
    if (w <= 0.0) w += kTwoPi;
    return w - M_PI;
}

std::vector<double> unwrap_phases(const MotionClip& clip) {
    std::vector<double> out;
    out.reserve(clip.frames.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < clip.frames.size(); ++i) {
        if (i == 0) {
            prev = clip.frames[i].phase;
        } else {
            prev += wrap_to_pi(clip.frames[i].phase - clip.frames[i - 1].phase);
        }
        out.push_back(prev);
    }
    return out;
}

// Least-squares constant-rate fit phi_hat_i = a + b*i over the unwrapped
// phase track; returns per-frame fitted phases.
std::vector<double> constant_rate_fit(const std::vector<double>& phi) {
    const std::size_t n = phi.size();
    std::vector<double> fit(n, phi.empty() ? 0.0 : phi[0]);
    if (n < 2) return fit;
    double mean_i = 0.0, mean_phi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_i += static_cast<double>(i);
        mean_phi += phi[i];
    }
    mean_i /= static_cast<double>(n);
    mean_phi /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double di = static_cast<double>(i) - mean_i;
        num += di * (phi[i] - mean_phi);
        den += di * di;
    }
    const double b = num / den;
    const double a = mean_phi - b * mean_i;
    for (std::size_t i = 0; i < n; ++i) {
        fit[i] = a + b * static_cast<double>(i);
    }
    return fit;
}

// Minimum-jerk interpolation profile on s in [0, 1].
double min_jerk(double s) {
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double min_jerk_rate(double s) {
    return s * s * (30.0 + s * (-60.0 + 30.0 * s));
}

std::vector<double> kinematic_state(const MotionFrame& f) {
    std::vector<double> s;
    s.reserve(f.dof_pos.size() + f.dof_vel.size() + 6 + f.foot_z.size());
    s.insert(s.end(), f.dof_pos.begin(), f.dof_pos.end());
    s.insert(s.end(), f.dof_vel.begin(), f.dof_vel.end());
    for (int i = 0; i < 3; ++i) s.push_back(f.racket_pos[i]);
    for (int i = 0; i < 3; ++i) s.push_back(f.torso_pos[i]);
    s.insert(s.end(), f.foot_z.begin(), f.foot_z.end());
    return s;
}

std::string clip_file_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "clip_%06zu.json", i);
    return buf;
}

}  // namespace

void MotionClip::validate_structure() const {
    if (frames.empty()) throw std::invalid_argument("clip has no frames");
    if (strike_index >= frames.size()) {
        throw std::invalid_argument("clip strike_index out of range");
    }
    const std::size_t n_dof = frames.front().dof_pos.size();
    const std::size_t n_foot = frames.front().foot_z.size();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const MotionFrame& f = frames[i];
        if (i > 0 && !(f.t > frames[i - 1].t)) {
            throw std::invalid_argument("clip frame times must be strictly increasing");
        }
        if (f.dof_pos.size() != n_dof || f.dof_vel.size() != n_dof) {
            throw std::invalid_argument("clip dof channel width is inconsistent");
        }
        if (f.foot_z.size() != n_foot) {
            throw std::invalid_argument("clip foot channel width is inconsistent");
        }
        if (i > 0 && wrap_to_pi(f.phase - frames[i - 1].phase) < -1e-9) {
            throw std::invalid_argument("clip phase must be non-decreasing modulo 2*pi");
        }
    }
}

StrikeFeature extract_feature(const MotionClip& clip) {
    if (clip.frames.empty() || clip.strike_index >= clip.frames.size()) {
        throw std::invalid_argument("extract_feature: strike_index out of range");
    }
    return clip.frames[clip.strike_index].racket_pos -
           clip.frames.front().torso_pos;
}

ClipQuality clip_quality(const MotionClip& pred, const MotionClip& ref,
                         double z_g) {
    if (pred.frames.size() != ref.frames.size() || pred.frames.empty()) {
        throw std::invalid_argument("clip_quality: clip lengths differ");
    }
    const std::size_t n = pred.frames.size();
    ClipQuality q;
    for (std::size_t i = 0; i < n; ++i) {
        q.l_phase += (phase_encoding(pred.frames[i].phase) -
                      phase_encoding(ref.frames[i].phase))
                         .squaredNorm();
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Eigen::Vector2d d_pred =
            phase_encoding(pred.frames[i + 1].phase) -
            phase_encoding(pred.frames[i].phase);
        const Eigen::Vector2d d_ref = phase_encoding(ref.frames[i + 1].phase) -
                                      phase_encoding(ref.frames[i].phase);
        q.l_phase += (d_pred - d_ref).squaredNorm();
    }

    const std::vector<double> s_pred = kinematic_state(pred.frames.front());
    const std::vector<double> s_ref = kinematic_state(ref.frames.front());
    if (s_pred.size() != s_ref.size()) {
        throw std::invalid_argument("clip_quality: frame channel widths differ");
    }
    for (std::size_t i = 0; i < s_pred.size(); ++i) {
        const double d = s_pred[i] - s_ref[i];
        q.l_smooth += d * d;
    }

    for (const MotionFrame& f : pred.frames) {
        for (double z : f.foot_z) {
            q.l_foot += std::max(0.0, z_g - z);
        }
    }
    return q;
}

void QualityThresholds::validate() const {
    if (!(center_window > 0.0 && center_window < 0.5)) {
        throw std::invalid_argument(
            "motionlib.center_window must be in (0, 0.5)");
    }
    if (!(phase_tol > 0.0)) {
        throw std::invalid_argument("motionlib.phase_tol must be > 0");
    }
    if (!(z_g >= 0.0)) throw std::invalid_argument("motionlib.z_g must be >= 0");
    if (!(max_l_foot >= 0.0)) {
        throw std::invalid_argument("motionlib.max_l_foot must be >= 0");
    }
    if (!(max_l_phase >= 0.0)) {
        throw std::invalid_argument("motionlib.max_l_phase must be >= 0");
    }
}

ClipVerdict validate_clip(const MotionClip& clip, const QualityThresholds& th) {
    ClipVerdict v;
    try {
        clip.validate_structure();
    } catch (const std::invalid_argument& e) {
        v.reasons.emplace_back(e.what());
        return v;
    }

    const double centering =
        std::abs(static_cast<double>(clip.strike_index) /
                     static_cast<double>(clip.frames.size()) -
                 0.5);
    if (centering > th.center_window) {
        v.reasons.push_back("strike instant not near the clip center");
    }

    const std::vector<double> phi = unwrap_phases(clip);
    const std::vector<double> fit = constant_rate_fit(phi);
    double max_dev = 0.0;
    double score = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double dev =
            (phase_encoding(phi[i]) - phase_encoding(fit[i])).norm();
        max_dev = std::max(max_dev, dev);
        score += dev * dev;
    }
    score /= static_cast<double>(phi.size());
    v.phase_score = score;
    if (score > th.max_l_phase || max_dev > th.phase_tol) {
        v.reasons.push_back("phase deviates from a constant-rate strike cycle");
    }

    double l_foot = 0.0;
    for (const MotionFrame& f : clip.frames) {
        for (double z : f.foot_z) l_foot += std::max(0.0, th.z_g - z);
    }
    v.l_foot = l_foot;
    if (l_foot > th.max_l_foot) {
        v.reasons.push_back("foot ground penetration");
    }

    v.accepted = v.reasons.empty();
    return v;
}

MotionClip synth_swing(const Eigen::Vector3d& target, const SwingStyle& style,
                       std::uint64_t seed) {
    for (int i = 0; i < 3; ++i) {
        if (target[i] < style.reach_min[i] || target[i] > style.reach_max[i]) {
            throw std::invalid_argument(
                "synth_swing: target outside the reachable box");
        }
    }
    const int n_frames =
        static_cast<int>(std::lround(style.duration / style.frame_dt)) + 1;
    const int mid = (n_frames - 1) / 2;
    const double t_strike = mid * style.frame_dt;
    const double t_end = (n_frames - 1) * style.frame_dt;

    Rng rng(seed);
    std::vector<double> dof_gain(style.n_dof);
    std::vector<double> dof_jitter(style.n_dof);
    for (int j = 0; j < style.n_dof; ++j) {
        // Fixed pseudo-basis mapping the target into joint space, plus a
        // seeded per-clip style offset.
        dof_gain[j] = 0.4 * target.x() * std::cos(0.9 * j) +
                      0.4 * target.y() * std::sin(1.3 * j) +
                      0.3 * target.z() * std::cos(0.7 * j + 1.0);
        dof_jitter[j] = rng.uniform(-0.05, 0.05);
    }

    const Eigen::Vector3d p_rest = style.torso_start + style.rest_offset;
    const Eigen::Vector3d p_strike = style.torso_start + target;

    MotionClip clip;
    clip.dt = style.frame_dt;
    clip.strike_index = static_cast<std::size_t>(mid);
    clip.duration = t_end;
    clip.frames.reserve(n_frames);
    for (int i = 0; i < n_frames; ++i) {
        const double t = i * style.frame_dt;
        MotionFrame f;
        f.t = t;
        const bool forward = i <= mid;
        const double seg_t0 = forward ? 0.0 : t_strike;
        const double seg_len = forward ? t_strike : (t_end - t_strike);
        const double s = seg_len > 0.0 ? (t - seg_t0) / seg_len : 0.0;
        const Eigen::Vector3d a = forward ? p_rest : p_strike;
        const Eigen::Vector3d b = forward ? p_strike : p_rest;
        f.racket_pos = a + (b - a) * min_jerk(s);
        f.torso_pos = style.torso_start;
        f.dof_pos.resize(style.n_dof);
        f.dof_vel.resize(style.n_dof);
        const double dir = forward ? 1.0 : -1.0;
        for (int j = 0; j < style.n_dof; ++j) {
            const double amp = dof_gain[j] + dof_jitter[j];
            f.dof_pos[j] = amp * min_jerk(forward ? s : 1.0 - s);
            f.dof_vel[j] =
                seg_len > 0.0
                    ? dir * amp * min_jerk_rate(forward ? s : 1.0 - s) / seg_len
                    : 0.0;
        }
        f.foot_z.assign(style.n_foot_points, style.foot_height);
        f.phase = kTwoPi * t / t_end;
        clip.frames.push_back(f);
    }
    return clip;
}

void MotionLibrary::add(MotionClip clip) {
    clip.validate_structure();
    features_.push_back(extract_feature(clip));
    quality_.push_back(validate_clip(clip, QualityThresholds{}));
    clips_.push_back(std::move(clip));
}

std::size_t MotionLibrary::match(const Eigen::Vector3d& p_hit,
                                 const Eigen::Vector3d& p_anchor,
                                 double eps_scale, Rng& rng) const {
    if (clips_.empty()) {
        throw std::invalid_argument("match: empty motion library");
    }
    const Eigen::Vector3d eps = rng.uniform_in_ball(eps_scale);
    return argmin_feature(features_, p_hit + eps - p_anchor);
}

std::size_t MotionLibrary::match(const Eigen::Vector3d& p_hit,
                                 const Eigen::Vector3d& p_anchor,
                                 double eps_scale, std::uint64_t seed) const {
    Rng rng(seed);
    return match(p_hit, p_anchor, eps_scale, rng);
}

void MotionLibrary::revalidate(const QualityThresholds& th) {
    for (std::size_t i = 0; i < clips_.size(); ++i) {
        quality_[i] = validate_clip(clips_[i], th);
    }
}

namespace {

nlohmann::json clip_to_json(const MotionClip& clip) {
    nlohmann::json frames = nlohmann::json::array();
    for (const MotionFrame& f : clip.frames) {
        frames.push_back({{"t", f.t},
                          {"dof_pos", f.dof_pos},
                          {"dof_vel", f.dof_vel},
                          {"racket_pos", {f.racket_pos.x(), f.racket_pos.y(),
                                          f.racket_pos.z()}},
                          {"torso_pos", {f.torso_pos.x(), f.torso_pos.y(),
                                         f.torso_pos.z()}},
                          {"foot_z", f.foot_z},
                          {"phase", f.phase}});
    }
    return {{"dt", clip.dt},
            {"strike_index", clip.strike_index},
            {"frames", frames}};
}

MotionClip clip_from_json(const nlohmann::json& doc) {
    MotionClip clip;
    clip.dt = doc.at("dt").get<double>();
    clip.strike_index = doc.at("strike_index").get<std::size_t>();
    for (const auto& jf : doc.at("frames")) {
        MotionFrame f;
        f.t = jf.at("t").get<double>();
        f.dof_pos = jf.at("dof_pos").get<std::vector<double>>();
        f.dof_vel = jf.at("dof_vel").get<std::vector<double>>();
        const auto rp = jf.at("racket_pos").get<std::vector<double>>();
        const auto tp = jf.at("torso_pos").get<std::vector<double>>();
        if (rp.size() != 3 || tp.size() != 3) {
            throw std::invalid_argument("clip frame positions need 3 numbers");
        }
        f.racket_pos = {rp[0], rp[1], rp[2]};
        f.torso_pos = {tp[0], tp[1], tp[2]};
        f.foot_z = jf.at("foot_z").get<std::vector<double>>();
        f.phase = jf.at("phase").get<double>();
        clip.frames.push_back(std::move(f));
    }
    clip.duration = clip.frames.empty() ? 0.0 : clip.frames.back().t;
    clip.validate_structure();
    return clip;
}

}  // namespace

MotionClip load_clip_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open clip file: " + path);
    nlohmann::json doc;
    in >> doc;
    return clip_from_json(doc);
}

void save_clip_json(const MotionClip& clip, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write clip file: " + path);
    out << clip_to_json(clip).dump() << '\n';
}

void MotionLibrary::save(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    nlohmann::json files = nlohmann::json::array();
    for (std::size_t i = 0; i < clips_.size(); ++i) {
        const std::string name = clip_file_name(i);
        save_clip_json(clips_[i], dir + "/" + name);
        files.push_back(name);
    }
    std::ofstream out(dir + "/index.json");
    if (!out) throw std::runtime_error("cannot write library index: " + dir);
    out << nlohmann::json{{"clips", files}}.dump(2) << '\n';
}

MotionLibrary MotionLibrary::load(const std::string& dir) {
    std::ifstream in(dir + "/index.json");
    if (!in) throw std::runtime_error("cannot open library index in: " + dir);
    nlohmann::json doc;
    in >> doc;
    MotionLibrary lib;
    for (const auto& name : doc.at("clips")) {
        lib.add(load_clip_json(dir + "/" + name.get<std::string>()));
    }
    return lib;
}

MotionLibrary synth_library(const SwingStyle& style, int count,
                            std::uint64_t seed) {
    if (count < 0) {
        throw std::invalid_argument("synth_library: count must be >= 0");
    }
    MotionLibrary lib;
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        Eigen::Vector3d target;
        for (int c = 0; c < 3; ++c) {
            target[c] = rng.uniform(style.reach_min[c], style.reach_max[c]);
        }
        lib.add(synth_swing(target, style, rng.next_u64()));
    }
    return lib;
}

}  // namespace rallykit

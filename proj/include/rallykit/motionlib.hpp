#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rallykit/match_kernel.hpp"
#include "rallykit/rng.hpp"

namespace rallykit {

struct MotionFrame {
    double t{0.0};
    std::vector<double> dof_pos;   // rad
    std::vector<double> dof_vel;   // rad/s
    Eigen::Vector3d racket_pos{Eigen::Vector3d::Zero()};
    Eigen::Vector3d torso_pos{Eigen::Vector3d::Zero()};
    std::vector<double> foot_z;    // m, tracked foot points
    double phase{0.0};             // rad, cyclic strike-cycle progress
};

struct MotionClip {
    double dt{0.02};
    std::vector<MotionFrame> frames;
    std::size_t strike_index{0};
    double duration{0.0};

    // Checks strictly increasing t, strike_index range, consistent channel
    // widths, and phase monotonicity modulo 2*pi.
    void validate_structure() const;
};

// Strike-target feature: racket position at the strike instant relative to
// the torso at the first frame.  Invariant to rigid translation of the clip.
using StrikeFeature = Eigen::Vector3d;

StrikeFeature extract_feature(const MotionClip& clip);

struct ClipQuality {
    double l_phase{0.0};
    double l_smooth{0.0};
    double l_foot{0.0};
};

// Deterministic reconstruction metrics between a predicted and a reference
// clip of equal length:
//   l_phase  sum_t ||c_hat_t - c_t||^2 + sum_t ||dc_hat_t - dc_t||^2 over
//            the phase encoding c_t = (sin phi, cos phi)
//   l_smooth squared jump between the first predicted frame's kinematic
//            state and the reference conditioning frame (dof_pos, dof_vel,
//            racket_pos, torso_pos, foot_z)
//   l_foot   sum over frames and foot points of max(0, z_g - z)
ClipQuality clip_quality(const MotionClip& pred, const MotionClip& ref,
                         double z_g);

struct QualityThresholds {
    double center_window{0.15}; // fraction of clip length around the middle
    double phase_tol{0.5};      // max per-frame ||c_t - c_fit_t||
    double z_g{0.035};          // m, foot clearance height
    double max_l_foot{0.0};
    double max_l_phase{0.05};   // mean squared phase deviation bound

    void validate() const;
};

struct ClipVerdict {
    bool accepted{false};
    std::vector<std::string> reasons;
    double l_foot{0.0};
    double phase_score{0.0};  // mean ||c_t - c_fit_t||^2 vs constant-rate fit
};

// Filters a clip on (a) strike-instant centering, (b) deviation of the
// phase track from the best-fit constant-rate cycle, (c) foot ground
// penetration.  Reasons list every failed criterion.
ClipVerdict validate_clip(const MotionClip& clip, const QualityThresholds& th);

struct SwingStyle {
    int n_dof{12};
    double frame_dt{0.02};
    double duration{1.08};
    Eigen::Vector3d torso_start{0.0, 0.0, 0.8};
    Eigen::Vector3d rest_offset{0.25, -0.3, 0.15};  // racket rest pose, torso-relative
    double foot_height{0.05};
    int n_foot_points{4};
    // Reachable box for commanded strike targets, torso-relative, m.
    Eigen::Vector3d reach_min{-0.1, -0.9, -0.2};
    Eigen::Vector3d reach_max{0.8, 0.9, 0.8};
};

// Deterministic synthetic swing: minimum-jerk racket arc from a rest pose
// through `target` (torso-relative) at the strike instant and back, linear
// phase advance over one cycle, constant foot clearance.  Throws when the
// target leaves the reachable box.
MotionClip synth_swing(const Eigen::Vector3d& target, const SwingStyle& style,
                       std::uint64_t seed);

class MotionLibrary {
public:
    void add(MotionClip clip);

    std::size_t size() const { return clips_.size(); }
    bool empty() const { return clips_.empty(); }
    const MotionClip& clip(std::size_t i) const { return clips_.at(i); }
    const StrikeFeature feature(std::size_t i) const {
        return features_.at(i);
    }
    const FeatureSoa& features() const { return features_; }
    const std::vector<ClipVerdict>& quality() const { return quality_; }

    // Task-conditioned nearest neighbor: query is p_hit + eps - p_anchor
    // with eps uniform in a ball of radius eps_scale; ties go to the lowest
    // index.  Throws std::invalid_argument on an empty library.
    std::size_t match(const Eigen::Vector3d& p_hit,
                      const Eigen::Vector3d& p_anchor, double eps_scale,
                      Rng& rng) const;
    std::size_t match(const Eigen::Vector3d& p_hit,
                      const Eigen::Vector3d& p_anchor, double eps_scale,
                      std::uint64_t seed) const;

    void revalidate(const QualityThresholds& th);

    // Directory layout: index.json plus one clip_NNNNNN.json per clip.
    void save(const std::string& dir) const;
    static MotionLibrary load(const std::string& dir);

private:
    std::vector<MotionClip> clips_;
    FeatureSoa features_;
    std::vector<ClipVerdict> quality_;
};

// Seeded library of synthetic swings with strike targets uniform over the
// style's reachable box.
MotionLibrary synth_library(const SwingStyle& style, int count,
                            std::uint64_t seed);

MotionClip load_clip_json(const std::string& path);
void save_clip_json(const MotionClip& clip, const std::string& path);

}  // namespace rallykit

#pragma once

#include <cstdint>
#include <string>

#include "rallykit/motionlib.hpp"
#include "rallykit/simulator.hpp"

namespace rallykit {

// Whole-stack configuration: one JSON document with a section per module.
// Loading applies defaults for absent keys, validates every bound, and
// rejects unknown keys anywhere in the tree.
struct GlobalConfig {
    std::uint64_t seed{0};
    std::string out_dir{"out"};

    double d_orig{0.3};          // robot-side table edge to origin gap, m
    double table_height{0.76};   // m
    std::string calibration_file;  // optional explicit chain, else synthetic

    PhysicsParams physics{};
    EstimatorParams estimator{};
    double p_init_pos{1e-2};  // m^2, position variance at (re-)init
    double p_init_vel{4.0};   // (m/s)^2
    PredictorConfig predictor{};
    StrikeVolume volume{};
    PlannerParams planner{};

    double eps_scale{0.02};
    Eigen::Vector3d match_anchor{0.0, 0.0, 0.8};
    QualityThresholds thresholds{};
    SwingStyle style{};
    int library_size{64};

    ScenarioConfig scenario{};
    SrThresholds sr{};

    GlobalConfig();

    void validate() const;

    // Empty or whitespace-only file loads full defaults.  Parse errors and
    // unknown keys report the offending position or key path.
    static GlobalConfig load(const std::string& path);
    static GlobalConfig from_json_text(const std::string& text);

    std::string dump() const;  // canonical full-document JSON

    SimulationConfig to_simulation() const;
};

}  // namespace rallykit

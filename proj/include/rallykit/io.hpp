#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rallykit/dynamics.hpp"
#include "rallykit/estimator.hpp"

namespace rallykit {

// Decimal serialization with 9 significant digits ("%.9g"), used for every
// number the tools emit so outputs are byte-stable across runs.
std::string format_double(double v);
std::string format_vec3(const Eigen::Vector3d& v);  // [x,y,z]

void write_lines(const std::string& path, const std::vector<std::string>& lines);

// Trajectory JSONL: one row {t, px, py, pz, vx, vy, vz, bounced} per sample.
std::vector<std::string> trajectory_jsonl(const Trajectory& traj);

// Measurement replay JSONL: rows {t, zx, zy, zz, d}.
std::vector<Measurement> read_measurements_jsonl(const std::string& path);

// Filter replay output row {t, px, py, pz, vx, vy, vz, reinit}.
std::string estimate_jsonl_row(double t, const BallState& estimate, bool reinit);

}  // namespace rallykit

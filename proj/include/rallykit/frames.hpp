#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>

namespace rallykit {

// Reference frames used across the stack.
//   world     fixed lab frame (mocap origin), z up
//   table     table-surface center, x toward the opponent half, z up
//   origin    robot task frame on the floor under the robot, axes aligned
//             with table, x toward the table
//   cam_ball  camera frame in which ball detections are expressed
//   cam_pose  camera frame whose table-relative pose is known
//   tracker   mocap rigid body mounted on the torso
//   torso     robot torso frame
enum class FrameId { world, table, origin, cam_ball, cam_pose, tracker, torso };

const char* frame_name(FrameId id);

class FrameMismatchError : public std::runtime_error {
public:
    explicit FrameMismatchError(const std::string& what)
        : std::runtime_error(what) {}
};

/// Labeled rigid transform.  A transform with source frame `b` and target
/// frame `a` maps points expressed in `b` into `a`: p_a = R p_b + t.
/// Composition and application check the frame labels and throw
/// FrameMismatchError on a chain break, so a miswired calibration chain
/// fails loudly instead of producing silently wrong coordinates.
class RigidTransform {
public:
    /// Throws std::invalid_argument if `rotation` is not orthonormal with
    /// determinant +1.  Drift up to 1e-6 is accepted as-is, drift in
    /// (1e-6, 1e-3] is repaired by polar projection onto SO(3), and larger
    /// drift (or a reflection) is rejected.
    RigidTransform(const Eigen::Matrix3d& rotation,
                   const Eigen::Vector3d& translation, FrameId source,
                   FrameId target);

    static RigidTransform identity(FrameId source, FrameId target);

    const Eigen::Matrix3d& rotation() const { return rotation_; }
    const Eigen::Vector3d& translation() const { return translation_; }
    FrameId source() const { return source_; }
    FrameId target() const { return target_; }

    /// Map a point expressed in the source frame into the target frame.
    Eigen::Vector3d apply(const Eigen::Vector3d& p_source) const;

    /// Map a free vector (velocity, direction): rotation only.
    Eigen::Vector3d rotate(const Eigen::Vector3d& v_source) const;

    RigidTransform inverse() const;

    Eigen::Matrix4d homogeneous() const;

private:
    Eigen::Matrix3d rotation_;
    Eigen::Vector3d translation_;
    FrameId source_;
    FrameId target_;
};

/// Compose transforms: `lhs * rhs` applies `rhs` first, so it requires
/// lhs.source() == rhs.target() and yields a transform from rhs.source()
/// to lhs.target().  Throws FrameMismatchError otherwise.
RigidTransform operator*(const RigidTransform& lhs, const RigidTransform& rhs);

enum class SensingMode { mocap, egocam };

/// Static calibration chain.  Each field is named aTb and maps points from
/// frame b into frame a, matching the source/target labels it carries.
struct CalibrationSet {
    RigidTransform wTt;           // table -> world
    RigidTransform wTo;           // origin -> world
    RigidTransform c2Tc1;         // cam_ball -> cam_pose
    RigidTransform torsoTc2;      // cam_pose -> torso
    RigidTransform trackerTtorso; // tracker -> torso
    double d_orig{0.3};          // gap between robot-side table edge and origin, m

    CalibrationSet(RigidTransform wTt_, RigidTransform wTo_,
                   RigidTransform c2Tc1_, RigidTransform torsoTc2_,
                   RigidTransform trackerTtorso_, double d_orig_ = 0.3);

    /// table -> origin, derived once at construction: inv(wTo) * wTt.
    const RigidTransform& oTt() const { return oTt_; }

    static CalibrationSet identity();

    /// Load from a JSON file with one entry per transform, each
    /// {"rotation": [9 numbers, row-major], "translation": [3 numbers]}.
    /// All five transforms must be present; "d_orig" is optional.
    static CalibrationSet load(const std::string& path);

private:
    RigidTransform oTt_;
};

/// Simulation-default calibration: world coincides with table, the origin
/// frame sits on the floor under the robot at table-frame position
/// (-(half_length + d_orig), 0, -table_height) with axes aligned, and the
/// egocentric chain is identity.
CalibrationSet default_calibration(double half_length, double d_orig,
                                   double table_height);

/// Torso pose in the origin frame (a transform from torso to origin).
///   mocap:  obs is the tracker pose in world (tracker -> world);
///           result = inv(wTo) * obs * inv(trackerTtorso)
///   egocam: obs is the pose-camera pose in table (cam_pose -> table);
///           result = oTt * obs * inv(torsoTc2)
RigidTransform localize_torso(SensingMode mode, const CalibrationSet& calib,
                              const RigidTransform& obs);

/// Ball detection mapped into the table frame.
///   mocap:  obs_point is in world; result = inv(wTt) applied to it.
///   egocam: obs_point is in cam_ball and cam_pose_in_table (cam_pose ->
///           table) is required; result = cam_pose_in_table * c2Tc1
///           applied to it.
Eigen::Vector3d ball_to_table(
    SensingMode mode, const CalibrationSet& calib,
    const Eigen::Vector3d& obs_point,
    const std::optional<RigidTransform>& cam_pose_in_table = std::nullopt);

}  // namespace rallykit

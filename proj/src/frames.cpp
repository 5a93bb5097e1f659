#include "rallykit/frames.hpp"

#include <json.hpp>

#include <fstream>

namespace rallykit {
namespace {

constexpr double kDriftAccept = 1e-6;
constexpr double kDriftRepair = 1e-3;

double orthonormality_drift(const Eigen::Matrix3d& r) {
    return (r * r.transpose() - Eigen::Matrix3d::Identity())
        .cwiseAbs()
        .maxCoeff();
}

Eigen::Matrix3d polar_rotation(const Eigen::Matrix3d& m) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(
        m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace

const char* frame_name(FrameId id) {
    switch (id) {
        case FrameId::world: return "world";
        case FrameId::table: return "table";
        case FrameId::origin: return "origin";
        case FrameId::cam_ball: return "cam_ball";
        case FrameId::cam_pose: return "cam_pose";
        case FrameId::tracker: return "tracker";
        case FrameId::torso: return "torso";
    }
    return "unknown";
}

RigidTransform::RigidTransform(const Eigen::Matrix3d& rotation,
                               const Eigen::Vector3d& translation,
                               FrameId source, FrameId target)
    : rotation_(rotation),
      translation_(translation),
      source_(source),
      target_(target) {
    const double drift = orthonormality_drift(rotation_);
    if (drift > kDriftRepair) {
        throw std::invalid_argument(
            "rotation is not orthonormal (drift " + std::to_string(drift) +
            " exceeds " + std::to_string(kDriftRepair) + ")");
    }
    if (drift > kDriftAccept) {
        rotation_ = polar_rotation(rotation_);
    }
    if (rotation_.determinant() < 0.0) {
        throw std::invalid_argument(
            "rotation has determinant -1 (reflection, not a rotation)");
    }
}

RigidTransform RigidTransform::identity(FrameId source, FrameId target) {
    return {Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(), source,
            target};
}

Eigen::Vector3d RigidTransform::apply(const Eigen::Vector3d& p_source) const {
    return rotation_ * p_source + translation_;
}

Eigen::Vector3d RigidTransform::rotate(const Eigen::Vector3d& v_source) const {
    return rotation_ * v_source;
}

RigidTransform RigidTransform::inverse() const {
    return {rotation_.transpose(), -(rotation_.transpose() * translation_),
            target_, source_};
}

Eigen::Matrix4d RigidTransform::homogeneous() const {
    Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
    h.topLeftCorner<3, 3>() = rotation_;
    h.topRightCorner<3, 1>() = translation_;
    return h;
}

RigidTransform operator*(const RigidTransform& lhs, const RigidTransform& rhs) {
    if (lhs.source() != rhs.target()) {
        throw FrameMismatchError(
            std::string("cannot compose: left expects points in '") +
            frame_name(lhs.source()) + "' but right produces points in '" +
            frame_name(rhs.target()) + "'");
    }
    return {lhs.rotation() * rhs.rotation(),
            lhs.rotation() * rhs.translation() + lhs.translation(),
            rhs.source(), lhs.target()};
}

CalibrationSet::CalibrationSet(RigidTransform wTt_, RigidTransform wTo_,
                               RigidTransform c2Tc1_, RigidTransform torsoTc2_,
                               RigidTransform trackerTtorso_, double d_orig_)
    : wTt(std::move(wTt_)),
      wTo(std::move(wTo_)),
      c2Tc1(std::move(c2Tc1_)),
      torsoTc2(std::move(torsoTc2_)),
      trackerTtorso(std::move(trackerTtorso_)),
      d_orig(d_orig_),
      oTt_(wTo.inverse() * wTt) {}

CalibrationSet CalibrationSet::identity() {
    return {RigidTransform::identity(FrameId::table, FrameId::world),
            RigidTransform::identity(FrameId::origin, FrameId::world),
            RigidTransform::identity(FrameId::cam_ball, FrameId::cam_pose),
            RigidTransform::identity(FrameId::cam_pose, FrameId::torso),
            RigidTransform::identity(FrameId::tracker, FrameId::torso)};
}

CalibrationSet CalibrationSet::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open calibration file: " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("calibration file " + path + ": " + e.what());
    }

    auto read = [&doc, &path](const char* key, FrameId source,
                              FrameId target) {
        if (!doc.contains(key)) {
            throw std::runtime_error("calibration file " + path +
                                     ": missing transform '" + key + "'");
        }
        const auto& entry = doc.at(key);
        const auto rot = entry.at("rotation").get<std::vector<double>>();
        const auto tr = entry.at("translation").get<std::vector<double>>();
        if (rot.size() != 9 || tr.size() != 3) {
            throw std::runtime_error(
                "calibration file " + path + ": transform '" + key +
                "' needs 9 rotation and 3 translation numbers");
        }
        Eigen::Matrix3d r;
        r << rot[0], rot[1], rot[2], rot[3], rot[4], rot[5], rot[6], rot[7],
            rot[8];
        const Eigen::Vector3d t(tr[0], tr[1], tr[2]);
        try {
            return RigidTransform(r, t, source, target);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("calibration file " + path +
                                     ": transform '" + key + "': " + e.what());
        }
    };

    RigidTransform wTt = read("wTt", FrameId::table, FrameId::world);
    RigidTransform wTo = read("wTo", FrameId::origin, FrameId::world);
    RigidTransform c2Tc1 = read("c2Tc1", FrameId::cam_ball, FrameId::cam_pose);
    RigidTransform torsoTc2 =
        read("torsoTc2", FrameId::cam_pose, FrameId::torso);
    RigidTransform trackerTtorso =
        read("trackerTtorso", FrameId::tracker, FrameId::torso);
    CalibrationSet calib(std::move(wTt), std::move(wTo), std::move(c2Tc1),
                         std::move(torsoTc2), std::move(trackerTtorso));
    if (doc.contains("d_orig")) {
        calib.d_orig = doc.at("d_orig").get<double>();
    }
    return calib;
}

CalibrationSet default_calibration(double half_length, double d_orig,
                                   double table_height) {
    const Eigen::Vector3d origin_in_table(-(half_length + d_orig), 0.0,
                                          -table_height);
    CalibrationSet calib(
        RigidTransform::identity(FrameId::table, FrameId::world),
        RigidTransform(Eigen::Matrix3d::Identity(), origin_in_table,
                       FrameId::origin, FrameId::world),
        RigidTransform::identity(FrameId::cam_ball, FrameId::cam_pose),
        RigidTransform::identity(FrameId::cam_pose, FrameId::torso),
        RigidTransform::identity(FrameId::tracker, FrameId::torso), d_orig);
    return calib;
}

RigidTransform localize_torso(SensingMode mode, const CalibrationSet& calib,
                              const RigidTransform& obs) {
    if (mode == SensingMode::mocap) {
        return calib.wTo.inverse() * obs * calib.trackerTtorso.inverse();
    }
    return calib.oTt() * obs * calib.torsoTc2.inverse();
}

Eigen::Vector3d ball_to_table(
    SensingMode mode, const CalibrationSet& calib,
    const Eigen::Vector3d& obs_point,
    const std::optional<RigidTransform>& cam_pose_in_table) {
    if (mode == SensingMode::mocap) {
        return calib.wTt.inverse().apply(obs_point);
    }
    if (!cam_pose_in_table) {
        throw std::invalid_argument(
            "egocentric ball localization requires the camera pose in the "
            "table frame");
    }
    return (*cam_pose_in_table * calib.c2Tc1).apply(obs_point);
}

}  // namespace rallykit

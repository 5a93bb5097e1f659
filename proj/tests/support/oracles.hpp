#pragma once

// Reference computations the tests check library output against.  Everything
// here is written from the defining math (dense homogeneous matrices, RK4,
// central differences, a textbook Kalman step, a brute-force scan) rather
// than by calling back into the code under test.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rallykit/rng.hpp"

namespace oracles {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline Mat4 hmat(const Mat3& r, const Vec3& t) {
    Mat4 h = Mat4::Identity();
    h.block<3, 3>(0, 0) = r;
    h.block<3, 1>(0, 3) = t;
    return h;
}

inline Vec3 happly(const Mat4& h, const Vec3& p) {
    Eigen::Vector4d q;
    q << p.x(), p.y(), p.z(), 1.0;
    const Eigen::Vector4d out = h * q;
    return out.head<3>() / out(3);
}

inline Mat3 rot_x(double a) {
    Mat3 r;
    r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
    return r;
}

inline Mat3 rot_y(double a) {
    Mat3 r;
    r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
    return r;
}

inline Mat3 rot_z(double a) {
    Mat3 r;
    r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
    return r;
}

inline Mat3 random_rotation(rallykit::Rng& rng) {
    Vec3 axis;
    do {
        axis = Vec3(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                    rng.uniform(-1.0, 1.0));
    } while (axis.norm() < 1e-3);
    axis.normalize();
    return Eigen::AngleAxisd(rng.uniform(-M_PI, M_PI), axis).toRotationMatrix();
}

inline Vec3 random_vec(rallykit::Rng& rng, double lo, double hi) {
    return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

// Drag flight acceleration restated from its definition.
inline Vec3 drag_accel(bool quadratic, double k, double g_z, const Vec3& v) {
    const Vec3 g(0.0, 0.0, g_z);
    if (quadratic) {
        return -k * v.norm() * v + g;
    }
    return -k * v + g;
}

struct FlightPoint {
    Vec3 p;
    Vec3 v;
};

// Classic fixed-step RK4 on the flight ODE.  Dense enough steps make this
// the high-order ground truth the coarse explicit stepper is compared to.
inline FlightPoint rk4_flight(Vec3 p, Vec3 v, double horizon, int n_steps,
                              bool quadratic, double k, double g_z) {
    const double h = horizon / n_steps;
    for (int i = 0; i < n_steps; ++i) {
        const Vec3 k1p = v;
        const Vec3 k1v = drag_accel(quadratic, k, g_z, v);
        const Vec3 k2p = v + 0.5 * h * k1v;
        const Vec3 k2v = drag_accel(quadratic, k, g_z, v + 0.5 * h * k1v);
        const Vec3 k3p = v + 0.5 * h * k2v;
        const Vec3 k3v = drag_accel(quadratic, k, g_z, v + 0.5 * h * k2v);
        const Vec3 k4p = v + h * k3v;
        const Vec3 k4v = drag_accel(quadratic, k, g_z, v + h * k3v);
        p += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    return {p, v};
}

// Central-difference Jacobian of an R^6 -> R^6 map.
template <typename F>
Mat6 central_difference6(F f, const Vec6& x, double h) {
    Mat6 j;
    for (int c = 0; c < 6; ++c) {
        Vec6 hi = x;
        Vec6 lo = x;
        hi(c) += h;
        lo(c) -= h;
        j.col(c) = (f(hi) - f(lo)) / (2.0 * h);
    }
    return j;
}

// Plain constant-parameter extended Kalman filter written as the textbook
// predict/update pair.  Expression shapes deliberately mirror the standard
// formulation so the adaptive filter can be shown to reduce to it exactly
// when its gates and distance scaling are switched off.
struct ReferenceEkf {
    double q_pos_base{1e-4};
    double q_vel_base{1e-2};
    double dt0{1.0 / 60.0};
    double r_base{4e-4};
    double k_drag{0.14};
    double g{9.81};
    Vec3 v_init{-3.0, 0.0, 1.0};
    Mat6 p_init{Mat6::Identity()};

    Vec6 x{Vec6::Zero()};
    Mat6 P{Mat6::Identity()};
    bool initialized{false};

    void step(const Vec3& z, double dt) {
        if (!initialized) {
            x.head<3>() = z;
            x.tail<3>() = v_init;
            P = p_init;
            initialized = true;
            return;
        }

        const Vec3 v = x.tail<3>();
        const double speed = v.norm();
        Mat3 j_a = Mat3::Zero();
        if (speed > 0.0) {
            j_a = -k_drag * (speed * Mat3::Identity() +
                             v * v.transpose() / speed);
        }
        Mat6 f = Mat6::Identity();
        f.topRightCorner<3, 3>() = dt * Mat3::Identity() + 0.5 * dt * dt * j_a;
        f.bottomRightCorner<3, 3>() += dt * j_a;

        const Vec3 p = x.head<3>();
        const Vec3 gravity(0.0, 0.0, -g);
        const Vec3 a = -k_drag * v.norm() * v + gravity;
        x.head<3>() = p + v * dt + 0.5 * a * (dt * dt);
        x.tail<3>() = v + a * dt;

        const double ratio = dt / dt0;
        Vec6 q_diag;
        const double q_pos = q_pos_base * ratio * ratio;
        const double q_vel = q_vel_base * ratio;
        q_diag << q_pos, q_pos, q_pos, q_vel, q_vel, q_vel;
        const Mat6 q = q_diag.asDiagonal();
        P = f * P * f.transpose() + q;

        const Mat3 r = r_base * (1.0 + 0.0) * Mat3::Identity();
        Eigen::Matrix<double, 3, 6> h = Eigen::Matrix<double, 3, 6>::Zero();
        h.leftCols<3>() = Mat3::Identity();
        const Vec3 innovation = z - h * x;
        const Mat3 s = h * P * h.transpose() + r;
        const Mat3 s_inv = s.inverse();
        const Eigen::Matrix<double, 6, 3> k = P * h.transpose() * s_inv;
        x = x + k * innovation;
        const Mat6 i_kh = Mat6::Identity() - k * h;
        P = i_kh * P * i_kh.transpose() + k * r * k.transpose();
        P = 0.5 * (P + P.transpose());
    }
};

// Brute-force nearest feature with the same squared-distance expression and
// first-index tie rule the kernels promise.
inline std::size_t brute_argmin(const std::vector<Vec3>& feats,
                                const Vec3& q) {
    if (feats.empty()) {
        throw std::invalid_argument("brute_argmin: empty feature set");
    }
    std::size_t best = 0;
    double best_d = 0.0;
    for (std::size_t i = 0; i < feats.size(); ++i) {
        const double dx = feats[i].x() - q.x();
        const double dy = feats[i].y() - q.y();
        const double dz = feats[i].z() - q.z();
        const double d = dx * dx + dy * dy + dz * dz;
        if (i == 0 || d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

class TempDir {
public:
    TempDir() {
        std::string tmpl =
            (std::filesystem::temp_directory_path() / "rallykit_test_XXXXXX")
                .string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (mkdtemp(buf.data()) == nullptr) {
            throw std::runtime_error("mkdtemp failed");
        }
        path_ = buf.data();
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const {
        return (std::filesystem::path(path_) / name).string();
    }

private:
    std::string path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
}

}  // namespace oracles

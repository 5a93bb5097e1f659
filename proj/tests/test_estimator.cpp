#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "rallykit/estimator.hpp"
#include "rallykit/rng.hpp"
#include "support/oracles.hpp"

using namespace rallykit;
using oracles::Vec3;

namespace {

Measurement meas(const Vec3& z, double t, double d = 2.0) {
    Measurement m;
    m.z = z;
    m.t = t;
    m.d = d;
    return m;
}

const Vec3 kCamera(-1.55, 0.0, 0.9);

}  // namespace

TEST_CASE("process noise scales as dt^2 in position and dt in velocity") {
    EstimatorParams params;
    const double dt0 = params.dt0;

    const Matrix6d base = process_noise(dt0, params);
    for (int i = 0; i < 3; ++i) {
        CHECK(base(i, i) == params.q_pos_base);
        CHECK(base(i + 3, i + 3) == params.q_vel_base);
    }
    CHECK(base.diagonal().asDiagonal().toDenseMatrix() == base);

    const Matrix6d twice = process_noise(2.0 * dt0, params);
    CHECK(twice(0, 0) == 4.0 * params.q_pos_base);
    CHECK(twice(3, 3) == 2.0 * params.q_vel_base);

    const Matrix6d half = process_noise(0.5 * dt0, params);
    CHECK(half(0, 0) == 0.25 * params.q_pos_base);
    CHECK(half(3, 3) == 0.5 * params.q_vel_base);

    CHECK_THROWS_AS(process_noise(0.0, params), std::invalid_argument);
    CHECK_THROWS_AS(process_noise(-0.01, params), std::invalid_argument);
}

TEST_CASE("observation noise grows linearly with camera distance") {
    EstimatorParams params;

    const Eigen::Matrix3d at_zero = measurement_noise(0.0, params);
    CHECK(at_zero == Eigen::Matrix3d(params.r_base *
                                     Eigen::Matrix3d::Identity()));

    params.beta = 0.0;
    const Eigen::Matrix3d flat = measurement_noise(3.7, params);
    CHECK(flat(0, 0) == params.r_base);
    CHECK(flat(1, 0) == 0.0);

    params.r_base = 1e-4;
    params.beta = 0.5;
    const Eigen::Matrix3d scaled = measurement_noise(2.0, params);
    CHECK(scaled(0, 0) == 2e-4);
    CHECK(scaled(1, 1) == 2e-4);
    CHECK(scaled(2, 2) == 2e-4);

    CHECK_THROWS_AS(measurement_noise(-0.1, params), std::invalid_argument);
}

TEST_CASE("the dragless transition Jacobian is the exact double integrator") {
    PhysicsParams physics;
    physics.k = 0.0;
    Vector6d x;
    x << 0.4, -0.2, 0.9, -3.0, 0.5, 1.0;
    const double dt = 1.0 / 60.0;
    const Matrix6d f = jacobian(x, dt, physics);
    Matrix6d want = Matrix6d::Identity();
    want.topRightCorner<3, 3>() = dt * Eigen::Matrix3d::Identity();
    CHECK((f - want).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the axial drag derivative doubles along the motion direction") {
    PhysicsParams physics;
    physics.k = 0.1;
    Vector6d x = Vector6d::Zero();
    x(3) = 3.0;
    const double dt = 0.01;
    const Matrix6d f = jacobian(x, dt, physics);
    const Eigen::Matrix3d j_a =
        (f.bottomRightCorner<3, 3>() - Eigen::Matrix3d::Identity()) / dt;
    CHECK(std::abs(j_a(0, 0) + 0.6) < 1e-12);
    CHECK(std::abs(j_a(1, 1) + 0.3) < 1e-12);
    CHECK(std::abs(j_a(2, 2) + 0.3) < 1e-12);
}

TEST_CASE("the analytic Jacobian matches central differences") {
    PhysicsParams physics;
    Rng rng(301);
    const double dt = 1.0 / 60.0;
    for (const DragModel model : {DragModel::quadratic, DragModel::linear}) {
        for (int it = 0; it < 100; ++it) {
            Vector6d x;
            x << oracles::random_vec(rng, -2.0, 2.0),
                oracles::random_vec(rng, -10.0, 10.0);
            const Matrix6d f = jacobian(x, dt, physics, model);
            const auto step_map = [&](const oracles::Vec6& s) {
                BallState b;
                b.p = s.head<3>();
                b.v = s.tail<3>();
                const BallState out = step_free_flight(b, dt, physics, model);
                oracles::Vec6 y;
                y << out.p, out.v;
                return y;
            };
            const Matrix6d fd =
                oracles::central_difference6(step_map, x, 1e-6);
            const double rel = (f - fd).cwiseAbs().maxCoeff() /
                               f.cwiseAbs().maxCoeff();
            CHECK(rel < 1e-4);
        }
    }
}

TEST_CASE("the first measurement initializes position, prior velocity, prior P") {
    EstimatorParams params;
    AdaptiveEkf ekf(params);
    const Vec3 z(1.1, -0.2, 0.9);
    const UpdateResult res = ekf.update(meas(z, 0.25));
    CHECK(res.status == UpdateStatus::initialized);
    CHECK(res.nis == 0.0);
    CHECK((ekf.state().x.head<3>() - z).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ekf.state().x.tail<3>() - params.v_init).cwiseAbs().maxCoeff()
          == 0.0);
    CHECK((ekf.state().P - params.p_init).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ekf.state().t_last == 0.25);
    CHECK(ekf.updates_since_init() == 1);
}

TEST_CASE("a measurement gap larger than dt_max re-initializes the filter") {
    EstimatorParams params;
    AdaptiveEkf ekf(params);
    ekf.update(meas(Vec3(1.0, 0.0, 1.0), 0.0));
    const Vec3 z2(0.4, 0.1, 0.8);
    const UpdateResult res = ekf.update(meas(z2, params.dt_max + 0.05));
    CHECK(res.status == UpdateStatus::reinit_gap);
    CHECK((ekf.state().x.head<3>() - z2).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ekf.state().x.tail<3>() - params.v_init).cwiseAbs().maxCoeff()
          == 0.0);
    CHECK(ekf.updates_since_init() == 1);
}

TEST_CASE("an outgoing ball far past the measurement triggers a return reset") {
    EstimatorParams params;
    params.v_init = Vec3(2.0, 0.0, 0.0);
    AdaptiveEkf ekf(params);
    ekf.update(meas(Vec3(0.0, 0.0, 1.0), 0.0));
    const UpdateResult res = ekf.update(meas(Vec3(-0.2, 0.0, 1.0), 0.1));
    CHECK(res.status == UpdateStatus::reinit_return);
    CHECK((ekf.state().x.head<3>() - Vec3(-0.2, 0.0, 1.0)).cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("stale measurements are rejected without touching the state") {
    EstimatorParams params;
    AdaptiveEkf ekf(params);
    ekf.update(meas(Vec3(1.0, 0.0, 1.0), 0.0));
    ekf.update(meas(Vec3(0.95, 0.0, 1.02), 1.0 / 60.0));
    const FilterState before = ekf.state();
    const int count = ekf.updates_since_init();

    const UpdateResult res = ekf.update(meas(Vec3(0.0, 0.0, 0.0), 0.001));
    CHECK(res.status == UpdateStatus::rejected_stale);
    CHECK(res.nis == 0.0);
    CHECK((ekf.state().x - before.x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ekf.state().P - before.P).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ekf.state().t_last == before.t_last);
    CHECK(ekf.updates_since_init() == count);
}

TEST_CASE("reset drops initialization and the update counter") {
    AdaptiveEkf ekf({});
    ekf.update(meas(Vec3(1.0, 0.0, 1.0), 0.0));
    CHECK(ekf.state().initialized);
    ekf.reset();
    CHECK_FALSE(ekf.state().initialized);
    CHECK(ekf.updates_since_init() == 0);
    const UpdateResult res = ekf.update(meas(Vec3(0.5, 0.0, 0.9), 5.0));
    CHECK(res.status == UpdateStatus::initialized);
}

TEST_CASE("with fixed cadence and flat noise the filter is bitwise a plain EKF") {
    // Measurement times on an exactly representable 2^-7 s grid with the
    // substep equal to the period make every internal step use the same dt,
    // so the adaptive filter must reproduce the reference implementation
    // bit for bit while no gate fires.
    const double dt = 0.0078125;
    EstimatorParams params;
    params.beta = 0.0;
    params.substep_dt = dt;

    AdaptiveEkf ekf(params);
    oracles::ReferenceEkf ref;
    ref.q_pos_base = params.q_pos_base;
    ref.q_vel_base = params.q_vel_base;
    ref.dt0 = params.dt0;
    ref.r_base = params.r_base;
    ref.k_drag = params.physics.k;
    ref.g = params.physics.g;
    ref.v_init = params.v_init;
    ref.p_init = params.p_init;

    BallState truth;
    truth.p = Vec3(2.0, 0.0, 3.0);
    truth.v = Vec3(-3.0, 0.0, 2.0);

    Rng rng(302);
    for (int i = 0; i <= 64; ++i) {
        const double t = i * dt;
        const Vec3 z = truth.p + rng.normal3(0.02);
        const UpdateResult res = ekf.update(meas(z, t, rng.uniform(1.0, 3.0)));
        if (i > 0) {
            CHECK(res.status == UpdateStatus::accepted);
        }
        ref.step(z, dt);
        CHECK((ekf.state().x - ref.x).cwiseAbs().maxCoeff() == 0.0);
        CHECK((ekf.state().P - ref.P).cwiseAbs().maxCoeff() == 0.0);
        truth = step_free_flight(truth, dt, params.physics);
    }
}

TEST_CASE("noiseless measurements of a bouncing flight converge fast") {
    EstimatorParams params;
    const Trajectory truth = [&] {
        BallState s;
        s.p = Vec3(1.2, 0.0, 0.3);
        s.v = Vec3(-3.0, 0.0, -1.0);
        return propagate(s, 0.5, 1.0 / 600.0, params.physics);
    }();
    REQUIRE_FALSE(truth.bounces.empty());

    AdaptiveEkf ekf(params);
    for (int i = 0; i * (1.0 / 60.0) <= 0.5; ++i) {
        const double t = i * (1.0 / 60.0);
        const BallState ts = truth.interpolate(t);
        const UpdateResult res =
            ekf.update(meas(ts.p, t, (ts.p - kCamera).norm()));
        if (t >= 0.3) {
            CHECK(res.status == UpdateStatus::accepted);
            CHECK((res.estimate.p - ts.p).norm() < 5e-3);
            CHECK((res.estimate.v - ts.v).norm() < 0.05);
        }
    }
}

TEST_CASE("modeling the bounce strictly reduces tracking error") {
    EstimatorParams aware_params;
    EstimatorParams blind_params;
    blind_params.bounce_in_predict = false;

    const Trajectory truth = [&] {
        BallState s;
        s.p = Vec3(1.2, 0.0, 0.3);
        s.v = Vec3(-3.0, 0.0, -1.0);
        return propagate(s, 0.5, 1.0 / 600.0, aware_params.physics);
    }();

    AdaptiveEkf aware(aware_params);
    AdaptiveEkf blind(blind_params);
    std::vector<double> err_aware;
    std::vector<double> err_blind;
    for (int i = 0; i * (1.0 / 60.0) <= 0.5; ++i) {
        const double t = i * (1.0 / 60.0);
        const BallState ts = truth.interpolate(t);
        const Measurement m = meas(ts.p, t, (ts.p - kCamera).norm());
        const UpdateResult ra = aware.update(m);
        const UpdateResult rb = blind.update(m);
        if (t >= 0.2) {
            err_aware.push_back((ra.estimate.p - ts.p).norm());
            err_blind.push_back((rb.estimate.p - ts.p).norm());
        }
    }
    CHECK(oracles::mean_of(err_aware) < oracles::mean_of(err_blind));
}

TEST_CASE("the covariance stays symmetric with a positive diagonal") {
    Rng rng(303);
    int updates = 0;
    for (int series = 0; series < 25 && updates < 10000; ++series) {
        EstimatorParams params;
        AdaptiveEkf ekf(params);
        double t = 0.0;
        Vec3 z = oracles::random_vec(rng, -1.0, 1.0);
        z.z() = rng.uniform(0.5, 1.5);
        for (int i = 0; i < 500; ++i) {
            t += rng.uniform(1.0 / 120.0, 0.15);
            z += oracles::random_vec(rng, -0.05, 0.05);
            ekf.update(meas(z, t, rng.uniform(0.5, 4.0)));
            ++updates;
            const Matrix6d& p = ekf.state().P;
            for (int c = 0; c < 6; ++c) {
                CHECK(p(c, c) > 0.0);
            }
            CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    CHECK(updates >= 10000);
}

TEST_CASE("the normalized innovation statistic is consistent") {
    // A correctly specified filter has chi-square(3) innovations, mean 3.
    // Truth carries exactly the velocity process noise the filter assumes
    // (position process noise is set negligible) and the measurement noise
    // follows the distance-scaled model.
    EstimatorParams params;
    params.q_pos_base = 1e-8;

    Rng rng(304);
    double nis_sum = 0.0;
    long nis_count = 0;
    for (int episode = 0; episode < 600; ++episode) {
        AdaptiveEkf ekf(params);
        BallState truth;
        truth.p = Vec3(rng.uniform(0.9, 1.3), rng.uniform(-0.3, 0.3),
                       rng.uniform(1.0, 1.2));
        truth.v = Vec3(rng.uniform(-4.2, -3.4), rng.uniform(-0.4, 0.4),
                       rng.uniform(1.4, 1.8));
        const double dt = 1.0 / 60.0;
        for (int i = 0; i <= 30; ++i) {
            const double t = i * dt;
            if (i > 0) {
                for (int sub = 0; sub < 4; ++sub) {
                    truth = step_free_flight(truth, dt / 4.0, params.physics);
                }
                truth.v += rng.normal3(
                    std::sqrt(params.q_vel_base * (dt / params.dt0)));
            }
            const double d = (truth.p - kCamera).norm();
            const double sigma =
                std::sqrt(params.r_base * (1.0 + params.beta * d));
            const Vec3 z = truth.p + rng.normal3(sigma);
            const UpdateResult res = ekf.update(meas(z, t, d));
            if (res.status == UpdateStatus::accepted && i > 12) {
                nis_sum += res.nis;
                ++nis_count;
            }
        }
    }
    REQUIRE(nis_count >= 10000);
    const double nis_mean = nis_sum / static_cast<double>(nis_count);
    CHECK(nis_mean > 2.0);
    CHECK(nis_mean < 4.0);
}

TEST_CASE("estimator bounds are enforced with named messages") {
    EstimatorParams params;
    params.q_pos_base = 0.0;
    bool threw = false;
    try {
        params.validate();
    } catch (const std::invalid_argument& e) {
        threw = true;
        CHECK(std::string(e.what()).find("q_pos_base") != std::string::npos);
    }
    CHECK(threw);

    EstimatorParams gap;
    gap.dt_max = gap.dt0;
    CHECK_THROWS_AS(gap.validate(), std::invalid_argument);

    EstimatorParams sub;
    sub.substep_dt = 0.0;
    CHECK_THROWS_AS(sub.validate(), std::invalid_argument);

    CHECK_NOTHROW(EstimatorParams{}.validate());
}

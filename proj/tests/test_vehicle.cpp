#include <gtest/gtest.h>

#include <cmath>

#include "mixrl/ibe.hpp"
#include "mixrl/vehicle.hpp"

using namespace mixrl;

TEST(Fiala, LinearAndSaturated) {
    EXPECT_DOUBLE_EQ(fiala_force(0.0, 88000, 5000, 1.0), 0.0);
    EXPECT_NEAR(fiala_force(1e-4, 88000, 8000, 1.0), -8.8, 8.8e-3);
    EXPECT_DOUBLE_EQ(fiala_force(0.5, 88000, 5000, 1.0), -5000.0);
    EXPECT_DOUBLE_EQ(fiala_force(-0.5, 88000, 5000, 1.0), 5000.0);
}

TEST(Fiala, ContinuousAtSaturation) {
    const double edge = std::atan(3.0 * 5000.0 / 88000.0);
    EXPECT_NEAR(fiala_force(edge - 1e-9, 88000, 5000, 1.0), -5000.0, 1e-3);
}

TEST(VehicleDerivative, Equilibrium) {
    const VehicleParams p;
    EXPECT_LE(vehicle_derivative(Vec::Zero(5), Vec::Zero(2), p, 0.0).norm(), 1e-15);
    const Vec d = vehicle_derivative(Vec::Zero(5), (Vec(2) << 0, 1.0).finished(), p, 0.0);
    EXPECT_NEAR(d[2], 1.0, 1e-15);
    EXPECT_LE((d - Vec::Unit(5, 2)).norm(), 1e-15);
}

// Independent transcription of the bicycle model in the linear tyre regime.
TEST(VehicleDerivative, MatchesHandTranscription) {
    const VehicleParams p;
    const Vec x = (Vec(5) << 0.3, 0.1, 0, 0.05, 0.2).finished();
    const Vec u = (Vec(2) << 0.02, 0).finished();
    const double U = 12.0;
    const double af = std::atan((0.3 + 1.14 * 0.1) / U) - 0.02;
    const double ar = std::atan((0.3 - 1.40 * 0.1) / U);
    const double Fzf = 1500 * 9.81 * 1.40 / 2.54, Fzr = 1500 * 9.81 * 1.14 / 2.54;
    auto fiala = [](double a, double C, double Fz) {
        const double t = std::tan(a);
        return -C * t + C * C / (3 * Fz) * std::abs(t) * t - C * C * C / (27 * Fz * Fz) * t * t * t;
    };
    const double Ff = fiala(af, 88000, Fzf), Fr = fiala(ar, 94000, Fzr);
    const Vec d = vehicle_derivative(x, u, p, 261.0);
    EXPECT_NEAR(d[0], (Ff * std::cos(0.02) + Fr) / 1500 - U * 0.1, 1e-9);
    EXPECT_NEAR(d[1], (1.14 * Ff * std::cos(0.02) - 1.40 * Fr) / 2420, 1e-9);
    EXPECT_NEAR(d[2], 0.3 * 0.1 - Ff * std::sin(0.02) / 1500 + 261.0 / 1500, 1e-9);
    EXPECT_NEAR(d[3], 0.1, 1e-15);
    EXPECT_NEAR(d[4], U * std::sin(0.05) + 0.3 * std::cos(0.05), 1e-12);
}

TEST(VehicleUtility, Weights) {
    EXPECT_DOUBLE_EQ(vehicle_utility(Vec::Zero(5), Vec::Zero(2)), 0.0);
    EXPECT_DOUBLE_EQ(vehicle_utility(Vec::Unit(5, 2), Vec::Zero(2)), 45.0);
    EXPECT_DOUBLE_EQ(vehicle_utility(Vec::Zero(5), (Vec(2) << 0.1, 2).finished()), 12.0);
}

TEST(VehicleDisturbance, MeanOnSpeedCoordinate) {
    const Gaussian g = vehicle_disturbance(VehicleParams{});
    EXPECT_NEAR(g.mean[2], 8.7e-4, 1e-12);
    EXPECT_DOUBLE_EQ(g.mean[0], 0.0);
}

TEST(VehicleEnv, EmpiricalResidualMean) {
    const VehicleEnv env{VehicleParams{}};
    RngStream rng(7);
    const Vec x = (Vec(5) << 0.1, 0.02, 0.3, 0.01, 0.1).finished();
    const Vec u = (Vec(2) << 0.01, 0.5).finished();
    Vec sum = Vec::Zero(5);
    const int N = 10000;
    for (int i = 0; i < N; ++i) {
        const StepResult r = env_step(env, x, u, rng);
        sum += residual(Transition{x, u, r.x_next}, env);
    }
    const Vec mean = sum / N;
    const double se = std::sqrt(32.0) / 200.0 / 1500.0 / std::sqrt(N);
    EXPECT_NEAR(mean[2], 8.7e-4, 5 * se);
    EXPECT_NEAR(mean[0], 0.0, 1e-12);
}

TEST(ReferencePath, OffsetsAndSmoothness) {
    const DlcGeometry g;
    const ReferencePath path = reference_path_dlc(g);
    EXPECT_DOUBLE_EQ(path.offset(10.0), 0.0);
    EXPECT_DOUBLE_EQ(path.offset(g.straight_in + g.ramp + 0.5 * g.hold), g.lane_offset);
    EXPECT_DOUBLE_EQ(path.offset(g.total_length() - 1.0), 0.0);
    for (double s : path.knots()) {
        const double h = 1e-6;
        const double left = (path.offset(s) - path.offset(s - h)) / h;
        const double right = (path.offset(s + h) - path.offset(s)) / h;
        EXPECT_LE(std::abs(left - right), 1e-5);
    }
}

TEST(Dlc, ZeroPolicyDriftsOffPath) {
    const VehicleParams p;
    RngStream rng(1);
    const DlcResult r = simulate_dlc(p, reference_path_dlc(DlcGeometry{}), [](const Vec&) { return Vec::Zero(2); },
                                     rng);
    ASSERT_FALSE(r.samples.empty());
    EXPECT_GT(r.mean_abs_lateral_error, 0.5);
}

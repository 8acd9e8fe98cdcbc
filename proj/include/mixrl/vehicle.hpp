#pragma once

#include <vector>

#include "mixrl/envsim.hpp"

namespace mixrl {

/// Bicycle-model parameters. State x = [v_y, r, v_x, phi, y] where v_x is the
/// deviation from v_desired; action u = [delta, a_x].
struct VehicleParams {
    double mass = 1500.0;           // kg
    double a = 1.14;                // m, CG to front axle
    double b = 1.40;                // m, CG to rear axle
    double iz = 2420.0;             // kg m^2
    double cf = 88000.0;            // N/rad
    double cr = 94000.0;            // N/rad
    double friction = 1.0;
    double v_desired = 12.0;        // m/s
    double dt = 1.0 / 200.0;        // s
    double fdis_mean = 261.0;       // N
    double fdis_var = 32.0;         // N^2
    double gravity = 9.81;          // m/s^2
    double delta_max = 0.35;        // rad
    double ax_min = -4.0;           // m/s^2
    double ax_max = 3.0;            // m/s^2
    Vec init_std = (Vec(5) << 0.1, 0.05, 0.5, 0.02, 0.2).finished();

    void validate() const;
    double front_load() const { return mass * gravity * b / (a + b); }
    double rear_load() const { return mass * gravity * a / (a + b); }
};

/// Fiala lateral force for a slip angle. Linear (-C tan(alpha)) for small
/// slip, cubic falloff, and -mu Fz sign(alpha) beyond 3 mu Fz / C.
double fiala_force(double slip_angle, double cornering_stiffness, double normal_load,
                   double friction);

/// Continuous-time rates of the bicycle model under longitudinal disturbance
/// force `fdis`. Kinematics use the absolute speed v_x + v_desired.
Vec vehicle_derivative(const Vec& x, const Vec& u, const VehicleParams& p, double fdis);

/// 45 v_x^2 + 60 y^2 + 800 delta^2 + a_x^2.
double vehicle_utility(const Vec& x_next, const Vec& u);

/// Mean and covariance of the additive disturbance xi = F_dis * T / m on the
/// v_x coordinate.
Gaussian vehicle_disturbance(const VehicleParams& p);

class VehicleEnv final : public Environment {
public:
    explicit VehicleEnv(VehicleParams params);

    int state_dim() const override { return 5; }
    int action_dim() const override { return 2; }
    Vec f(const Vec& x, const Vec& u) const override;
    double utility(const Vec& x_next, const Vec& u) const override;
    void utility_grad(const Vec& x_next, const Vec& u, Vec& grad_x, Vec& grad_u) const override;
    const Gaussian& true_noise() const override { return noise_; }
    const ActionBounds& bounds() const override { return bounds_; }
    Gaussian initial_distribution() const override;

    const VehicleParams& params() const { return params_; }

private:
    VehicleParams params_;
    Gaussian noise_;
    ActionBounds bounds_;
};

/// Double-lane-change layout, all lengths in metres.
struct DlcGeometry {
    double lane_offset = 3.5;
    double straight_in = 50.0;
    double ramp = 30.0;
    double hold = 25.0;
    double ramp_back = 30.0;
    double straight_out = 50.0;

    void validate() const;
    double total_length() const { return straight_in + ramp + hold + ramp_back + straight_out; }
};

/// Lateral offset y_ref(s) and heading phi_ref(s) = atan(dy_ref/ds) along
/// station s. Cosine-smoothed ramps make the path C^1.
class ReferencePath {
public:
    explicit ReferencePath(DlcGeometry geometry);

    double offset(double s) const;
    double slope(double s) const;
    double heading(double s) const;
    const DlcGeometry& geometry() const { return geometry_; }
    /// Station knots where segments meet.
    std::vector<double> knots() const;

private:
    DlcGeometry geometry_;
};

ReferencePath reference_path_dlc(const DlcGeometry& geometry);

struct DlcSample {
    double t;
    double station;
    double y_ref;
    double y;
    double lateral_error;
    double speed_error;
    double heading_error;
    double delta;
    double ax;
};

struct DlcResult {
    std::vector<DlcSample> samples;
    double total_cost = 0.0;
    double mean_abs_lateral_error = 0.0;
    double mean_abs_speed_error = 0.0;
    bool diverged = false;
};

/// Drives the path in global coordinates with the true disturbance. The
/// policy observes [v_y, r, v_x, phi - phi_ref, y - y_ref].
DlcResult simulate_dlc(const VehicleParams& params, const ReferencePath& path, const Policy& policy,
                       RngStream& rng);

}  // namespace mixrl

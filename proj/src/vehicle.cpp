#include "mixrl/vehicle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mixrl {

void VehicleParams::validate() const {
    const double values[] = {mass, a, b, iz, cf, cr, friction, v_desired, dt, fdis_var, gravity,
                             delta_max, ax_max, -ax_min};
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("VehicleParams: all parameters must be strictly positive");
        }
    }
    if (!std::isfinite(fdis_mean)) throw std::invalid_argument("VehicleParams: fdis_mean not finite");
    if (init_std.size() != 5 || (init_std.array() < 0.0).any()) {
        throw std::invalid_argument("VehicleParams: init_std needs 5 nonnegative entries");
    }
}

double fiala_force(double slip_angle, double cornering_stiffness, double normal_load,
                   double friction) {
    const double limit = friction * normal_load;
    const double t = std::tan(slip_angle);
    const double saturation = 3.0 * limit / cornering_stiffness;
    if (std::abs(t) >= saturation || std::abs(slip_angle) >= std::numbers::pi / 2) {
        return slip_angle > 0.0 ? -limit : (slip_angle < 0.0 ? limit : 0.0);
    }
    const double c = cornering_stiffness;
    return -c * t + c * c / (3.0 * limit) * std::abs(t) * t -
           c * c * c / (27.0 * limit * limit) * t * t * t;
}

Vec vehicle_derivative(const Vec& x, const Vec& u, const VehicleParams& p, double fdis) {
    const double vy = x[0];
    const double r = x[1];
    const double vx = x[2];
    const double phi = x[3];
    const double delta = u[0];
    const double ax = u[1];

    // Absolute longitudinal speed, kept away from zero so slip stays defined.
    const double speed = std::max(vx + p.v_desired, 0.1);
    const double alpha_f = std::atan((vy + p.a * r) / speed) - delta;
    const double alpha_r = std::atan((vy - p.b * r) / speed);
    const double fyf = fiala_force(alpha_f, p.cf, p.front_load(), p.friction);
    const double fyr = fiala_force(alpha_r, p.cr, p.rear_load(), p.friction);

    const double cos_d = std::cos(delta);
    const double sin_d = std::sin(delta);
    Vec rates(5);
    rates[0] = (fyf * cos_d + fyr) / p.mass - speed * r;
    rates[1] = (p.a * fyf * cos_d - p.b * fyr) / p.iz;
    rates[2] = ax + vy * r - fyf * sin_d / p.mass + fdis / p.mass;
    rates[3] = r;
    rates[4] = speed * std::sin(phi) + vy * std::cos(phi);
    return rates;
}

double vehicle_utility(const Vec& x_next, const Vec& u) {
    return 45.0 * x_next[2] * x_next[2] + 60.0 * x_next[4] * x_next[4] + 800.0 * u[0] * u[0] +
           u[1] * u[1];
}

Gaussian vehicle_disturbance(const VehicleParams& p) {
    const double scale = p.dt / p.mass;
    Vec mean = Vec::Zero(5);
    Vec var = Vec::Zero(5);
    mean[2] = p.fdis_mean * scale;
    var[2] = p.fdis_var * scale * scale;
    return Gaussian::diagonal(mean, var);
}

VehicleEnv::VehicleEnv(VehicleParams params)
    : params_(std::move(params)), noise_(vehicle_disturbance(params_)) {
    params_.validate();
    bounds_.lo = Vec(2);
    bounds_.hi = Vec(2);
    bounds_.lo << -params_.delta_max, params_.ax_min;
    bounds_.hi << params_.delta_max, params_.ax_max;
}

Vec VehicleEnv::f(const Vec& x, const Vec& u) const {
    return x + params_.dt * vehicle_derivative(x, u, params_, 0.0);
}

double VehicleEnv::utility(const Vec& x_next, const Vec& u) const {
    return vehicle_utility(x_next, u);
}

void VehicleEnv::utility_grad(const Vec& x_next, const Vec& u, Vec& grad_x, Vec& grad_u) const {
    grad_x = Vec::Zero(5);
    grad_x[2] = 90.0 * x_next[2];
    grad_x[4] = 120.0 * x_next[4];
    grad_u = Vec(2);
    grad_u << 1600.0 * u[0], 2.0 * u[1];
}

Gaussian VehicleEnv::initial_distribution() const {
    return Gaussian::diagonal(Vec::Zero(5), params_.init_std.array().square().matrix());
}

// ---------------------------------------------------------------------------
// Reference path

void DlcGeometry::validate() const {
    if (!(lane_offset > 0.0) || !(ramp > 0.0) || !(ramp_back > 0.0)) {
        throw std::invalid_argument("DlcGeometry: lane offset and transition lengths must be > 0");
    }
    if (straight_in < 0.0 || hold < 0.0 || straight_out < 0.0) {
        throw std::invalid_argument("DlcGeometry: segment lengths must be >= 0");
    }
}

ReferencePath::ReferencePath(DlcGeometry geometry) : geometry_(geometry) { geometry_.validate(); }

std::vector<double> ReferencePath::knots() const {
    const auto& g = geometry_;
    const double k1 = g.straight_in;
    const double k2 = k1 + g.ramp;
    const double k3 = k2 + g.hold;
    const double k4 = k3 + g.ramp_back;
    return {k1, k2, k3, k4, k4 + g.straight_out};
}

double ReferencePath::offset(double s) const {
    const auto k = knots();
    const double h = geometry_.lane_offset;
    if (s <= k[0]) return 0.0;
    if (s < k[1]) return 0.5 * h * (1.0 - std::cos(std::numbers::pi * (s - k[0]) / geometry_.ramp));
    if (s <= k[2]) return h;
    if (s < k[3]) {
        return 0.5 * h * (1.0 + std::cos(std::numbers::pi * (s - k[2]) / geometry_.ramp_back));
    }
    return 0.0;
}

double ReferencePath::slope(double s) const {
    const auto k = knots();
    const double h = geometry_.lane_offset;
    const double pi = std::numbers::pi;
    if (s > k[0] && s < k[1]) {
        return 0.5 * h * pi / geometry_.ramp * std::sin(pi * (s - k[0]) / geometry_.ramp);
    }
    if (s > k[2] && s < k[3]) {
        return -0.5 * h * pi / geometry_.ramp_back * std::sin(pi * (s - k[2]) / geometry_.ramp_back);
    }
    return 0.0;
}

double ReferencePath::heading(double s) const { return std::atan(slope(s)); }

ReferencePath reference_path_dlc(const DlcGeometry& geometry) { return ReferencePath(geometry); }

// ---------------------------------------------------------------------------
// Closed-loop double lane change

DlcResult simulate_dlc(const VehicleParams& p, const ReferencePath& path, const Policy& policy,
                       RngStream& rng) {
    const VehicleEnv env(p);
    const double length = path.geometry().total_length();
    const int max_steps = static_cast<int>(4.0 * length / (p.v_desired * p.dt)) + 1;
    const double fdis_sd = std::sqrt(p.fdis_var);

    Vec g = Vec::Zero(5);  // [v_y, r, v_x, psi, Y]
    double station = 0.0;
    DlcResult result;
    result.samples.reserve(static_cast<std::size_t>(length / (p.v_desired * p.dt)) + 16);
    Vec obs(5);

    auto observe = [&](const Vec& state, double s) {
        obs = state;
        obs[3] = state[3] - path.heading(s);
        obs[4] = state[4] - path.offset(s);
    };

    double lat_sum = 0.0;
    double speed_sum = 0.0;
    for (int step = 0; step < max_steps && station < length; ++step) {
        observe(g, station);
        const Vec u = env.bounds().clip(policy(obs));
        const double fdis = p.fdis_mean + fdis_sd * rng.normal();
        const double speed = g[2] + p.v_desired;
        const double psi = g[3];
        const double vy = g[0];

        Vec next = env.f(g, u);
        next[2] += fdis * p.dt / p.mass;
        station += p.dt * (speed * std::cos(psi) - vy * std::sin(psi));
        g = std::move(next);
        if (!g.allFinite() || g.cwiseAbs().maxCoeff() > kBlowUpBound) {
            result.diverged = true;
            break;
        }

        observe(g, station);
        result.total_cost += vehicle_utility(obs, u);
        DlcSample sample{};
        sample.t = (step + 1) * p.dt;
        sample.station = station;
        sample.y_ref = path.offset(station);
        sample.y = g[4];
        sample.lateral_error = obs[4];
        sample.speed_error = g[2];
        sample.heading_error = obs[3];
        sample.delta = u[0];
        sample.ax = u[1];
        lat_sum += std::abs(sample.lateral_error);
        speed_sum += std::abs(sample.speed_error);
        result.samples.push_back(sample);
    }
    if (!result.samples.empty()) {
        const double count = static_cast<double>(result.samples.size());
        result.mean_abs_lateral_error = lat_sum / count;
        result.mean_abs_speed_error = speed_sum / count;
    }
    if (station < length) result.diverged = true;
    return result;
}

}  // namespace mixrl

#include "mixrl/envsim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mixrl {

ActionBounds ActionBounds::symmetric(int m, double limit) {
    return {Vec::Constant(m, -limit), Vec::Constant(m, limit)};
}

Vec ActionBounds::clip(const Vec& u) const { return u.cwiseMax(lo).cwiseMin(hi); }

Mat Environment::df_du(const Vec& x, const Vec& u) const {
    const int m = action_dim();
    Mat jac(state_dim(), m);
    for (int j = 0; j < m; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(u[j]));
        Vec up = u;
        Vec dn = u;
        up[j] += h;
        dn[j] -= h;
        jac.col(j) = (f(x, up) - f(x, dn)) / (2.0 * h);
    }
    return jac;
}

Gaussian Environment::initial_distribution() const {
    const int n = state_dim();
    return Gaussian::diagonal(Vec::Zero(n), Vec::Constant(n, 0.01));
}

LinearEnv::LinearEnv(Mat A, Mat B, Mat Q, Mat R, Gaussian noise, ActionBounds bounds, Vec init_std)
    : A_(std::move(A)), B_(std::move(B)), Q_(std::move(Q)), R_(std::move(R)),
      noise_(std::move(noise)), bounds_(std::move(bounds)), init_std_(std::move(init_std)) {
    const auto n = A_.rows();
    const auto m = B_.cols();
    if (A_.cols() != n || B_.rows() != n || Q_.rows() != n || Q_.cols() != n || R_.rows() != m ||
        R_.cols() != m || noise_.dim() != n || bounds_.dim() != m || init_std_.size() != n) {
        throw std::invalid_argument("LinearEnv: inconsistent dimensions");
    }
}

Vec LinearEnv::f(const Vec& x, const Vec& u) const { return A_ * x + B_ * u; }

double LinearEnv::utility(const Vec& x_next, const Vec& u) const {
    return x_next.dot(Q_ * x_next) + u.dot(R_ * u);
}

void LinearEnv::utility_grad(const Vec& x_next, const Vec& u, Vec& grad_x, Vec& grad_u) const {
    grad_x = (Q_ + Q_.transpose()) * x_next;
    grad_u = (R_ + R_.transpose()) * u;
}

Gaussian LinearEnv::initial_distribution() const {
    return Gaussian::diagonal(Vec::Zero(state_dim()), init_std_.array().square().matrix());
}

StepResult env_step(const Environment& env, const Vec& x, const Vec& u, RngStream& rng) {
    const Vec clipped = env.bounds().clip(u);
    Vec xi = sample_gaussian(env.true_noise(), rng);
    Vec next = env.f(x, clipped) + xi;
    return {std::move(next), std::move(xi)};
}

Trajectory rollout(const Environment& env, const Policy& policy, const Vec& x0, int horizon,
                   RngStream& rng, double blow_up) {
    if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
    const GaussianSampler noise(env.true_noise());
    Trajectory traj;
    traj.transitions.reserve(static_cast<std::size_t>(horizon));
    Vec x = x0;
    for (int t = 0; t < horizon; ++t) {
        const Vec u = env.bounds().clip(policy(x));
        Vec next = env.f(x, u) + noise.sample(rng);
        if (!next.allFinite() || next.cwiseAbs().maxCoeff() > blow_up) {
            traj.diverged = true;
            break;
        }
        traj.utilities.push_back(env.utility(next, u));
        traj.transitions.push_back({x, u, next});
        x = std::move(next);
    }
    return traj;
}

std::function<Vec(const Vec&, const Vec&)> discretize_euler(ContinuousDynamics rates, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("discretize_euler: T must be positive");
    return [rates = std::move(rates), T](const Vec& x, const Vec& u) -> Vec {
        return x + T * rates(x, u);
    };
}

// ---------------------------------------------------------------------------
// Tabular

void TabularMDP::validate() const {
    const int S = num_states();
    const int A = num_actions();
    if (S < 1 || A < 1) throw std::invalid_argument("TabularMDP: empty state or action set");
    if (static_cast<int>(transition.size()) != A) {
        throw std::invalid_argument("TabularMDP: one transition matrix per action required");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("TabularMDP: gamma must be in (0,1)");
    if ((utility.array() < 0.0).any()) throw std::invalid_argument("TabularMDP: negative utility");
    for (int a = 0; a < A; ++a) {
        const Mat& P = transition[a];
        if (P.rows() != S || P.cols() != S) throw std::invalid_argument("TabularMDP: bad kernel shape");
        if ((P.array() < 0.0).any()) throw std::invalid_argument("TabularMDP: negative probability");
        for (int s = 0; s < S; ++s) {
            if (std::abs(P.row(s).sum() - 1.0) > 1e-12) {
                std::ostringstream msg;
                msg << "TabularMDP: row (s=" << s << ", a=" << a << ") does not sum to 1";
                throw std::invalid_argument(msg.str());
            }
        }
    }
}

double TabularMDP::q_value(int s, int a, const Vec& V) const {
    const auto row = transition[static_cast<std::size_t>(a)].row(s);
    return row.dot(utility.col(a) + gamma * V);
}

TabularMDP random_mdp(int states, int actions, double gamma, RngStream& rng) {
    TabularMDP mdp;
    mdp.gamma = gamma;
    mdp.utility.resize(states, actions);
    for (int s = 0; s < states; ++s) {
        for (int a = 0; a < actions; ++a) mdp.utility(s, a) = rng.uniform();
    }
    for (int a = 0; a < actions; ++a) {
        Mat P(states, states);
        for (int s = 0; s < states; ++s) {
            for (int t = 0; t < states; ++t) P(s, t) = -std::log(rng.uniform());
            P.row(s) /= P.row(s).sum();
        }
        mdp.transition.push_back(std::move(P));
    }
    return mdp;
}

TabularMDP additive_mdp(const std::vector<std::vector<int>>& next_state, const Mat& utility,
                        double gamma, double noise_mean, double noise_var, int max_offset) {
    const int S = static_cast<int>(next_state.size());
    const int A = static_cast<int>(utility.cols());
    if (utility.rows() != S) throw std::invalid_argument("additive_mdp: utility shape mismatch");
    if (!(noise_var >= 0.0) || max_offset < 0) throw std::invalid_argument("additive_mdp: bad noise");

    // Offset probabilities: mass of N(mean, var) on [k - 1/2, k + 1/2), tails
    // folded into the end offsets.
    std::vector<double> prob(static_cast<std::size_t>(2 * max_offset + 1), 0.0);
    if (noise_var == 0.0) {
        const int k = std::clamp(static_cast<int>(std::lround(noise_mean)), -max_offset, max_offset);
        prob[static_cast<std::size_t>(k + max_offset)] = 1.0;
    } else {
        const double sd = std::sqrt(noise_var);
        auto cdf = [&](double z) { return 0.5 * std::erfc(-(z - noise_mean) / (sd * std::sqrt(2.0))); };
        for (int k = -max_offset; k <= max_offset; ++k) {
            const double lo = (k == -max_offset) ? 0.0 : cdf(k - 0.5);
            const double hi = (k == max_offset) ? 1.0 : cdf(k + 0.5);
            prob[static_cast<std::size_t>(k + max_offset)] = std::max(0.0, hi - lo);
        }
    }

    TabularMDP mdp;
    mdp.gamma = gamma;
    mdp.utility = utility;
    for (int a = 0; a < A; ++a) {
        Mat P = Mat::Zero(S, S);
        for (int s = 0; s < S; ++s) {
            const int base = next_state[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
            for (int k = -max_offset; k <= max_offset; ++k) {
                const int t = std::clamp(base + k, 0, S - 1);
                P(s, t) += prob[static_cast<std::size_t>(k + max_offset)];
            }
            P.row(s) /= P.row(s).sum();
        }
        mdp.transition.push_back(std::move(P));
    }
    return mdp;
}

}  // namespace mixrl

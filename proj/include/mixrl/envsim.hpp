#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "mixrl/numkit.hpp"

namespace mixrl {

/// Per-coordinate action box [lo, hi].
struct ActionBounds {
    Vec lo;
    Vec hi;

    static ActionBounds symmetric(int m, double limit);
    Vec clip(const Vec& u) const;
    Vec center() const { return 0.5 * (lo + hi); }
    Vec half_width() const { return 0.5 * (hi - lo); }
    int dim() const { return static_cast<int>(lo.size()); }
};

/// A recorded (x, u, x') triple.
struct Transition {
    Vec x;
    Vec u;
    Vec x_next;
};

using Policy = std::function<Vec(const Vec&)>;

/// Discrete-time plant x' = f(x, u) + xi with xi ~ true_noise. The learner
/// sees f, the utility and the bounds; true_noise is used by the simulator
/// only.
class Environment {
public:
    virtual ~Environment() = default;

    virtual int state_dim() const = 0;
    virtual int action_dim() const = 0;

    /// Deterministic part of the transition.
    virtual Vec f(const Vec& x, const Vec& u) const = 0;

    /// d f / d u, an n x m matrix. The default uses central differences.
    virtual Mat df_du(const Vec& x, const Vec& u) const;

    /// Utility l(x', u) >= 0 charged on the successor state.
    virtual double utility(const Vec& x_next, const Vec& u) const = 0;
    virtual void utility_grad(const Vec& x_next, const Vec& u, Vec& grad_x, Vec& grad_u) const = 0;

    virtual const Gaussian& true_noise() const = 0;
    virtual const ActionBounds& bounds() const = 0;

    /// Distribution of training-episode start states.
    virtual Gaussian initial_distribution() const;
};

/// x' = A x + B u + xi, utility x'^T Q x' + u^T R u.
class LinearEnv final : public Environment {
public:
    LinearEnv(Mat A, Mat B, Mat Q, Mat R, Gaussian noise, ActionBounds bounds, Vec init_std);

    int state_dim() const override { return static_cast<int>(A_.rows()); }
    int action_dim() const override { return static_cast<int>(B_.cols()); }
    Vec f(const Vec& x, const Vec& u) const override;
    Mat df_du(const Vec&, const Vec&) const override { return B_; }
    double utility(const Vec& x_next, const Vec& u) const override;
    void utility_grad(const Vec& x_next, const Vec& u, Vec& grad_x, Vec& grad_u) const override;
    const Gaussian& true_noise() const override { return noise_; }
    const ActionBounds& bounds() const override { return bounds_; }
    Gaussian initial_distribution() const override;

    const Mat& A() const { return A_; }
    const Mat& B() const { return B_; }
    const Mat& Q() const { return Q_; }
    const Mat& R() const { return R_; }

private:
    Mat A_, B_, Q_, R_;
    Gaussian noise_;
    ActionBounds bounds_;
    Vec init_std_;
};

struct StepResult {
    Vec x_next;
    Vec xi;
};

/// Clips u to the action bounds and applies x' = f(x, u) + xi, xi drawn from
/// the environment's true noise.
StepResult env_step(const Environment& env, const Vec& x, const Vec& u, RngStream& rng);

struct Trajectory {
    std::vector<Transition> transitions;
    std::vector<double> utilities;
    bool diverged = false;
};

/// ||x||_inf beyond which a rollout is declared diverged.
inline constexpr double kBlowUpBound = 1e3;

Trajectory rollout(const Environment& env, const Policy& policy, const Vec& x0, int horizon,
                   RngStream& rng, double blow_up = kBlowUpBound);

/// Forward-Euler discretization: f(x, u) = x + T * rates(x, u).
using ContinuousDynamics = std::function<Vec(const Vec&, const Vec&)>;
std::function<Vec(const Vec&, const Vec&)> discretize_euler(ContinuousDynamics rates, double T);

/// Finite MDP with utility charged on (s', a). transition[a](s, s') is the
/// probability of s' after taking a in s.
struct TabularMDP {
    std::vector<Mat> transition;
    Mat utility;  // |S| x |A|, indexed (s', a)
    double gamma = 0.9;

    int num_states() const { return static_cast<int>(utility.rows()); }
    int num_actions() const { return static_cast<int>(utility.cols()); }

    /// Throws std::invalid_argument unless rows sum to one within 1e-12,
    /// probabilities and utilities are nonnegative and 0 < gamma < 1.
    void validate() const;

    /// Expected one-step cost sum_{s'} P(s'|s,a) (l(s',a) + gamma * V(s')).
    double q_value(int s, int a, const Vec& V) const;
};

/// Random MDP with dense Dirichlet-like rows and utilities in [0, 1].
TabularMDP random_mdp(int states, int actions, double gamma, RngStream& rng);

/// Tabular analogue of x' = f(x, u) + xi on states {0..S-1}: successor
/// next_state[s][a] shifted by an integer offset drawn from a discretized
/// N(mean, var), clamped to the state range.
TabularMDP additive_mdp(const std::vector<std::vector<int>>& next_state, const Mat& utility,
                        double gamma, double noise_mean, double noise_var, int max_offset);

}  // namespace mixrl

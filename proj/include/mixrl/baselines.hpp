#pragma once

#include <memory>

#include "mixrl/mixedrl.hpp"

namespace mixrl {

/// Model-free deterministic actor-critic. The critic is an action value
/// Q([x; u]) trained on one-step TD targets l(x', u) + gamma Q(x', pi(x'))
/// from replayed transitions; the actor descends dQ/du through pi. No target
/// networks. A non-finite step restores the previous parameters and halves
/// both learning rates.
class DataDrivenTrainer final : public Learner {
public:
    DataDrivenTrainer(std::shared_ptr<const Environment> env, TrainerConfig config);

    IterationReport iterate() override;
    const ParametricFn& actor() const override { return actor_; }
    const ParametricFn& critic() const override { return critic_; }
    long iteration() const override { return k_; }

    int rate_halvings() const { return halvings_; }

private:
    double explore_fraction() const;
    void apply_rates();
    void halve_rates();

    std::shared_ptr<const Environment> env_;
    TrainerConfig config_;
    RngStream rng_replay_;
    Explorer explorer_;
    ReplayBuffer replay_;
    ParametricFn critic_;
    ParametricFn actor_;
    Optimizer critic_opt_;
    Optimizer actor_opt_;
    long k_ = 0;
    int halvings_ = 0;
};

/// Gradient of the TD loss 1/2 mean (Q(x,u) - y)^2 with y held fixed.
GradientResult q_critic_semi_gradient(const Environment& env, const ParametricFn& q,
                                      const ParametricFn& actor, const Mat& X, const Mat& U,
                                      const Mat& X_next, double gamma);

/// Gradient of mean_b Q(x_b, pi(x_b)) with respect to the actor parameters.
GradientResult q_actor_gradient(const ParametricFn& q, const ParametricFn& actor, const Mat& X);

}  // namespace mixrl

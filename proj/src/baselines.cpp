#include "mixrl/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mixrl {

namespace {

Mat stack(const Mat& X, const Mat& U) {
    Mat Z(X.rows() + U.rows(), X.cols());
    Z.topRows(X.rows()) = X;
    Z.bottomRows(U.rows()) = U;
    return Z;
}

}  // namespace

GradientResult q_critic_semi_gradient(const Environment& env, const ParametricFn& q,
                                      const ParametricFn& actor, const Mat& X, const Mat& U,
                                      const Mat& X_next, double gamma) {
    const auto B = X.cols();
    const Mat U_next = actor.forward_batch(X_next);
    const Mat q_next = q.forward_batch(stack(X_next, U_next));
    Vec delta(B);
    const Mat q_now = q.forward_batch(stack(X, U));
    for (Eigen::Index b = 0; b < B; ++b) {
        const double target = env.utility(X_next.col(b), U.col(b)) + gamma * q_next(0, b);
        delta[b] = q_now(0, b) - target;
    }
    GradientResult out;
    out.value = 0.5 * delta.squaredNorm() / static_cast<double>(B);
    if (!std::isfinite(out.value)) throw NumericError("TD loss is not finite");
    out.grad = q.grad_params_batch(stack(X, U), delta.transpose() / static_cast<double>(B));
    return out;
}

GradientResult q_actor_gradient(const ParametricFn& q, const ParametricFn& actor, const Mat& X) {
    const auto B = X.cols();
    const Mat U = actor.forward_batch(X);
    const Mat Z = stack(X, U);
    GradientResult out;
    out.value = q.forward_batch(Z).mean();
    if (!std::isfinite(out.value)) throw NumericError("actor objective is not finite");
    const Mat gz = q.grad_input_batch(Z, Mat::Ones(1, B));
    out.grad = actor.grad_params_batch(X, gz.bottomRows(U.rows()) / static_cast<double>(B));
    return out;
}

DataDrivenTrainer::DataDrivenTrainer(std::shared_ptr<const Environment> env, TrainerConfig config)
    : env_(std::move(env)), config_(std::move(config)),
      rng_replay_(RngStream(config_.seed).substream(2)),
      explorer_(*env_, config_.episode_length, config_.blow_up, RngStream(config_.seed).substream(1)),
      replay_(static_cast<std::size_t>(config_.replay_capacity)) {
    if (config_.algorithm != Algorithm::data_driven) {
        throw std::invalid_argument("DataDrivenTrainer: algorithm must be data_driven");
    }
    const int n = env_->state_dim();
    const int m = env_->action_dim();
    config_.validate(n, m);
    if (config_.critic_arch.input_dim != n + m || config_.critic_arch.output_dim != 1) {
        throw std::invalid_argument("trainer config: action-value critic must map R^(n+m) -> R");
    }
    RngStream root(config_.seed);
    RngStream rc = root.substream(6);
    RngStream ra = root.substream(7);
    critic_ = ParametricFn::initialized(config_.critic_arch, rc);
    actor_ = ParametricFn::initialized(config_.actor_arch, ra);
    critic_opt_ = Optimizer(config_.critic_opt);
    actor_opt_ = Optimizer(config_.actor_opt);
}

double DataDrivenTrainer::explore_fraction() const {
    const double progress =
        std::min(1.0, static_cast<double>(k_ - 1) / std::max(1, config_.iterations - 1));
    return config_.explore_start + (config_.explore_end - config_.explore_start) * progress;
}

void DataDrivenTrainer::apply_rates() {
    const double scale = rate_scale(config_, k_) * std::ldexp(1.0, -halvings_);
    critic_opt_.set_rate(config_.critic_opt.rate * scale);
    actor_opt_.set_rate(config_.actor_opt.rate * scale);
}

void DataDrivenTrainer::halve_rates() {
    ++halvings_;
    apply_rates();
}

IterationReport DataDrivenTrainer::iterate() {
    ++k_;
    apply_rates();
    IterationReport report;
    report.k = k_;

    const double frac = explore_fraction();
    for (int s = 0; s < config_.steps_per_iter; ++s) {
        if (auto t = explorer_.step(actor_, frac)) replay_.push(std::move(*t));
    }
    report.episodes_diverged = explorer_.diverged_episodes();
    if (replay_.size() == 0) return report;

    const int n = env_->state_dim();
    const int m = env_->action_dim();
    const auto idx = replay_.sample_indices(static_cast<std::size_t>(config_.batch_size), rng_replay_);
    Mat X(n, config_.batch_size), U(m, config_.batch_size), Xn(n, config_.batch_size);
    for (int i = 0; i < config_.batch_size; ++i) {
        const Transition& t = replay_[idx[static_cast<std::size_t>(i)]];
        X.col(i) = t.x;
        U.col(i) = t.u;
        Xn.col(i) = t.x_next;
    }

    for (int c = 0; c < config_.critic_steps; ++c) {
        const Vec saved = critic_.params();
        try {
            const auto g = q_critic_semi_gradient(*env_, critic_, actor_, X, U, Xn, config_.gamma);
            critic_opt_.step(critic_.mutable_params(), g.grad);
            if (!critic_.params().allFinite()) throw NumericError("critic parameters not finite");
            report.critic_loss = g.value;
        } catch (const NumericError&) {
            critic_.set_params(saved);
            ++report.rollbacks;
            halve_rates();
        }
    }

    const Vec saved = actor_.params();
    try {
        const auto g = q_actor_gradient(critic_, actor_, X);
        actor_opt_.step(actor_.mutable_params(), g.grad);
        if (!actor_.params().allFinite()) throw NumericError("actor parameters not finite");
        report.actor_obj = g.value;
    } catch (const NumericError&) {
        actor_.set_params(saved);
        ++report.rollbacks;
        halve_rates();
    }
    return report;
}

std::unique_ptr<Learner> make_learner(std::shared_ptr<const Environment> env, const TrainerConfig& config) {
    switch (config.algorithm) {
        case Algorithm::mixed:
        case Algorithm::model_driven:
            return std::make_unique<GpiTrainer>(std::move(env), config);
        case Algorithm::data_driven:
            return std::make_unique<DataDrivenTrainer>(std::move(env), config);
        case Algorithm::exact_pi:
            break;
    }
    throw std::invalid_argument("make_learner: exact_pi is not an iterative learner");
}

}  // namespace mixrl

#include "mixrl/mixedrl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mixrl {

QuadratureRule MixedModel::rule(const Quadrature& scheme, RngStream& rng) const {
    return merge_close_nodes(without_zero_weights(quadrature_rule(disturbance(), scheme, rng)), 1e-9);
}

Mat successor_nodes(const Environment& env, const Mat& X, const Mat& U, const QuadratureRule& rule) {
    const auto B = X.cols();
    const auto Q = static_cast<Eigen::Index>(rule.size());
    Mat out(X.rows(), B * Q);
    for (Eigen::Index b = 0; b < B; ++b) {
        const Vec fx = env.f(X.col(b), U.col(b));
        for (Eigen::Index q = 0; q < Q; ++q) out.col(b * Q + q) = fx + rule.nodes.col(q);
    }
    return out;
}

Vec h_values(const Environment& env, const Mat& X, const Mat& U, const QuadratureRule& rule,
             const ParametricFn& critic, double gamma) {
    const auto B = X.cols();
    const auto Q = static_cast<Eigen::Index>(rule.size());
    const Mat nodes = successor_nodes(env, X, U, rule);
    const Mat V = critic.forward_batch(nodes);
    Vec h = Vec::Zero(B);
    for (Eigen::Index b = 0; b < B; ++b) {
        for (Eigen::Index q = 0; q < Q; ++q) {
            const auto c = b * Q + q;
            const double value = env.utility(nodes.col(c), U.col(b)) + gamma * V(0, c);
            if (!std::isfinite(value)) {
                throw NumericError("non-finite integrand at quadrature node " + std::to_string(q));
            }
            h[b] += rule.weights[static_cast<std::size_t>(q)] * value;
        }
    }
    return h;
}

double h_value(const Vec& x, const Vec& u, const MixedModel& model, const ParametricFn& critic,
               double gamma, const Quadrature& scheme) {
    RngStream rng(0);
    return h_values(*model.env, x, u, model.rule(scheme, rng), critic, gamma)[0];
}

GradientResult critic_semi_gradient(const Environment& env, const ParametricFn& critic,
                                    const ParametricFn& actor, const Mat& X,
                                    const QuadratureRule& rule, double gamma) {
    if (X.cols() == 0) throw std::invalid_argument("critic_semi_gradient: empty batch");
    const double B = static_cast<double>(X.cols());
    const Mat U = actor.forward_batch(X);
    const Vec target = h_values(env, X, U, rule, critic, gamma);
    const Vec delta = critic.forward_batch(X).row(0).transpose() - target;
    GradientResult out;
    out.value = 0.5 * delta.squaredNorm() / B;
    if (!std::isfinite(out.value)) throw NumericError("critic loss is not finite");
    out.grad = critic.grad_params_batch(X, delta.transpose() / B);
    return out;
}

GradientResult actor_gradient(const Environment& env, const ParametricFn& actor,
                              const ParametricFn& critic, const Mat& X,
                              const QuadratureRule& rule, double gamma) {
    if (X.cols() == 0) throw std::invalid_argument("actor_gradient: empty batch");
    const auto B = X.cols();
    const auto Q = static_cast<Eigen::Index>(rule.size());
    const int m = env.action_dim();
    const Mat U = actor.forward_batch(X);
    const Mat nodes = successor_nodes(env, X, U, rule);
    Mat V;
    const Mat gV = critic.grad_input_batch(nodes, Mat::Ones(1, nodes.cols()), &V);

    Mat Gu = Mat::Zero(m, B);
    double J = 0.0;
    Vec gx, gu;
    for (Eigen::Index b = 0; b < B; ++b) {
        const Vec u = U.col(b);
        const Mat jac = env.df_du(X.col(b), u);
        Vec dx = Vec::Zero(X.rows());
        Vec du = Vec::Zero(m);
        for (Eigen::Index q = 0; q < Q; ++q) {
            const auto c = b * Q + q;
            const double w = rule.weights[static_cast<std::size_t>(q)];
            env.utility_grad(nodes.col(c), u, gx, gu);
            J += w * (env.utility(nodes.col(c), u) + gamma * V(0, c));
            dx += w * (gx + gamma * gV.col(c));
            du += w * gu;
        }
        Gu.col(b) = du + jac.transpose() * dx;
    }
    GradientResult out;
    out.value = J / static_cast<double>(B);
    if (!std::isfinite(out.value)) throw NumericError("actor objective is not finite");
    out.grad = actor.grad_params_batch(X, Gu / static_cast<double>(B));
    return out;
}

double pev_step(ParametricFn& critic, const ParametricFn& actor, const MixedModel& model,
                const Mat& X, double gamma, double rate, const Quadrature& scheme) {
    RngStream rng(0);
    const auto g = critic_semi_gradient(*model.env, critic, actor, X, model.rule(scheme, rng), gamma);
    critic.set_params(sgd_step(critic.params(), g.grad, rate));
    return g.value;
}

double pim_step(ParametricFn& actor, const ParametricFn& critic, const MixedModel& model,
                const Mat& X, double gamma, double rate, const Quadrature& scheme) {
    RngStream rng(0);
    const auto g = actor_gradient(*model.env, actor, critic, X, model.rule(scheme, rng), gamma);
    actor.set_params(sgd_step(actor.params(), g.grad, rate));
    return g.value;
}

bool mvc_passes(double lhs, double e_k) {
    return lhs <= std::max(e_k, 0.0) + 1e-6 * (1.0 + std::abs(e_k));
}

MvcResult mvc_check(const Environment& env, const Mat& probes, const ParametricFn& actor_old,
                    const ParametricFn& actor_new, const QuadratureRule& rule_old,
                    const QuadratureRule& rule_new, const ParametricFn& critic, double gamma,
                    MvcMode mode) {
    if (probes.cols() == 0) throw std::invalid_argument("mvc_check: empty probe set");
    const Mat U_old = actor_old.forward_batch(probes);
    const Mat U_new = actor_new.forward_batch(probes);
    const Vec h_new_new = h_values(env, probes, U_new, rule_new, critic, gamma);
    const Vec h_new_old = h_values(env, probes, U_new, rule_old, critic, gamma);
    const Vec h_old_old = h_values(env, probes, U_old, rule_old, critic, gamma);
    const Vec lhs = h_new_new - h_new_old;
    const Vec e = h_old_old - h_new_old;

    MvcResult r;
    r.lhs = lhs.mean();
    r.e_k = e.mean();
    if (mode == MvcMode::averaged) {
        r.satisfied = mvc_passes(r.lhs, r.e_k);
    } else {
        r.satisfied = true;
        for (Eigen::Index i = 0; i < lhs.size(); ++i) {
            if (!mvc_passes(lhs[i], e[i])) {
                r.satisfied = false;
                break;
            }
        }
    }
    return r;
}

MvcResult mvc_check(const Mat& probes, const ParametricFn& actor_old, const ParametricFn& actor_new,
                    const MixedModel& model_old, const MixedModel& model_new,
                    const ParametricFn& critic, double gamma, MvcMode mode) {
    RngStream rng(0);
    const auto scheme = Quadrature::sigma_point();
    return mvc_check(*model_old.env, probes, actor_old, actor_new, model_old.rule(scheme, rng),
                     model_new.rule(scheme, rng), critic, gamma, mode);
}

EvalStateSet EvalStateSet::draw(const Gaussian& dist, int count, RngStream& rng) {
    if (count < 1) throw std::invalid_argument("EvalStateSet: count must be >= 1");
    const GaussianSampler sampler(dist);
    EvalStateSet set;
    set.states.resize(dist.dim(), count);
    for (int i = 0; i < count; ++i) set.states.col(i) = sampler.sample(rng);
    return set;
}

// ---------------------------------------------------------------------------

const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::mixed: return "mixed";
        case Algorithm::model_driven: return "model_driven";
        case Algorithm::data_driven: return "data_driven";
        case Algorithm::exact_pi: return "exact_pi";
    }
    return "?";
}

Algorithm algorithm_from_string(const std::string& name) {
    if (name == "mixed") return Algorithm::mixed;
    if (name == "model_driven") return Algorithm::model_driven;
    if (name == "data_driven") return Algorithm::data_driven;
    if (name == "exact_pi") return Algorithm::exact_pi;
    throw std::invalid_argument("unknown algorithm '" + name + "'");
}

void TrainerConfig::validate(int n, int m) const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("trainer config: " + what); };
    if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma must be in (0,1)");
    if (algorithm != Algorithm::data_driven) {
        if (prior_mu.size() != n || prior_K.rows() != n || prior_K.cols() != n) {
            fail("prior dimension does not match the state dimension");
        }
        if (ibe_case == IbeCase::known_covariance && !known_K) fail("case1 needs a known covariance");
        if (known_K && (known_K->rows() != n || known_K->cols() != n)) fail("known covariance shape");
        if (critic_arch.input_dim != n || critic_arch.output_dim != 1) fail("critic must map R^n -> R");
    }
    if (actor_arch.input_dim != n || actor_arch.output_dim != m) fail("actor must map R^n -> R^m");
    critic_arch.validate();
    actor_arch.validate();
    if (batch_size < 1) fail("batch_size must be >= 1");
    if (steps_per_iter < 0) fail("steps_per_iter must be >= 0");
    if (episode_length < 1) fail("episode_length must be >= 1");
    if (replay_capacity < 1) fail("replay_capacity must be >= 1");
    if (explore_start < 0.0 || explore_end < 0.0) fail("exploration noise must be >= 0");
    if (critic_steps < 1) fail("critic_steps must be >= 1");
    if (warm_start_steps < 0) fail("warm_start_steps must be >= 0");
    if (probe_states < 1) fail("probe_states must be >= 1");
    if (j_max < 0) fail("j_max must be >= 0");
    if (iterations < 1) fail("iterations must be >= 1");
    if (!(rate_decay > 0.0 && rate_decay <= 1.0)) fail("rate_decay must be in (0,1]");
    if (quadrature.kind == QuadratureKind::monte_carlo && quadrature.samples < 1) {
        fail("monte_carlo quadrature needs samples >= 1");
    }
}

double rate_scale(const TrainerConfig& config, long k) {
    const double progress =
        std::clamp(static_cast<double>(k - 1) / std::max(1, config.iterations - 1), 0.0, 1.0);
    return 1.0 + (config.rate_decay - 1.0) * progress;
}

// ---------------------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
    } else {
        data_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count, RngStream& rng) const {
    if (data_.empty()) throw std::logic_error("ReplayBuffer: sampling from an empty buffer");
    std::vector<std::size_t> idx(count);
    for (auto& i : idx) i = rng.index(data_.size());
    return idx;
}

Explorer::Explorer(const Environment& env, int episode_length, double blow_up, RngStream rng)
    : env_(env), episode_length_(episode_length), blow_up_(blow_up), rng_(rng),
      init_(env.initial_distribution()), noise_(env.true_noise()) {
    reset();
}

void Explorer::reset() {
    x_ = init_.sample(rng_);
    t_ = 0;
}

std::optional<Transition> Explorer::step(const ParametricFn& actor, double noise_fraction) {
    if (t_ >= episode_length_) reset();
    const ActionBounds& bounds = env_.bounds();
    Vec u = actor.forward(x_);
    if (noise_fraction > 0.0) {
        const Vec z = rng_.normal_vec(env_.action_dim());
        u += noise_fraction * bounds.half_width().cwiseProduct(z);
    }
    u = bounds.clip(u);
    Vec next = env_.f(x_, u) + noise_.sample(rng_);
    ++t_;
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > blow_up_) {
        ++diverged_;
        reset();
        return std::nullopt;
    }
    Transition t{x_, std::move(u), next};
    x_ = std::move(next);
    return t;
}

// ---------------------------------------------------------------------------

GpiTrainer::GpiTrainer(std::shared_ptr<const Environment> env, TrainerConfig config)
    : env_(std::move(env)), config_(std::move(config)),
      update_belief_(config_.algorithm == Algorithm::mixed),
      rng_replay_(RngStream(config_.seed).substream(2)),
      rng_quad_(RngStream(config_.seed).substream(4)),
      rng_init_(RngStream(config_.seed).substream(3)),
      explorer_(*env_, config_.episode_length, config_.blow_up, RngStream(config_.seed).substream(1)),
      replay_(static_cast<std::size_t>(config_.replay_capacity)) {
    if (config_.algorithm != Algorithm::mixed && config_.algorithm != Algorithm::model_driven) {
        throw std::invalid_argument("GpiTrainer: algorithm must be mixed or model_driven");
    }
    config_.validate(env_->state_dim(), env_->action_dim());
    belief_ = make_belief(config_.prior_mu, config_.prior_K,
                          config_.ibe_case == IbeCase::known_covariance ? config_.known_K : std::nullopt);
    belief_.case2_precision = config_.case2_precision;
    RngStream root(config_.seed);
    RngStream rc = root.substream(6);
    RngStream ra = root.substream(7);
    critic_ = ParametricFn::initialized(config_.critic_arch, rc);
    actor_ = ParametricFn::initialized(config_.actor_arch, ra);
    critic_opt_ = Optimizer(config_.critic_opt);
    actor_opt_ = Optimizer(config_.actor_opt);
    RngStream rp = root.substream(5);
    probes_ = EvalStateSet::draw(env_->initial_distribution(), config_.probe_states, rp);
}

double GpiTrainer::explore_fraction() const {
    const double progress =
        std::min(1.0, static_cast<double>(k_ - 1) / std::max(1, config_.iterations - 1));
    return config_.explore_start + (config_.explore_end - config_.explore_start) * progress;
}

void GpiTrainer::apply_rate_schedule() {
    const double scale = rate_scale(config_, k_);
    critic_opt_.set_rate(config_.critic_opt.rate * scale);
    actor_opt_.set_rate(config_.actor_opt.rate * scale);
}

Mat GpiTrainer::sample_states(int count) {
    Mat X(env_->state_dim(), count);
    if (replay_.size() == 0) {
        const GaussianSampler init(env_->initial_distribution());
        for (int i = 0; i < count; ++i) X.col(i) = init.sample(rng_init_);
        return X;
    }
    const auto idx = replay_.sample_indices(static_cast<std::size_t>(count), rng_replay_);
    for (int i = 0; i < count; ++i) X.col(i) = replay_[idx[static_cast<std::size_t>(i)]].x;
    return X;
}

void GpiTrainer::warm_start() {
    if (config_.warm_start_steps == 0) return;
    const GaussianSampler init(env_->initial_distribution());
    const QuadratureRule rule = MixedModel{env_.get(), belief_}.rule(config_.quadrature, rng_quad_);
    Mat X(env_->state_dim(), config_.batch_size);
    for (int s = 0; s < config_.warm_start_steps; ++s) {
        for (int i = 0; i < config_.batch_size; ++i) X.col(i) = init.sample(rng_init_);
        const Vec saved = critic_.params();
        try {
            const auto g = critic_semi_gradient(*env_, critic_, actor_, X, rule, config_.gamma);
            critic_opt_.step(critic_.mutable_params(), g.grad);
        } catch (const NumericError&) {
            critic_.set_params(saved);
        }
    }
}

IterationReport GpiTrainer::iterate() {
    if (!warm_) {
        warm_start();
        warm_ = true;
    }
    ++k_;
    apply_rate_schedule();
    IterationReport report;
    report.k = k_;

    // Data collection and IBE.
    const double frac = explore_fraction();
    std::vector<Vec> residuals;
    residuals.reserve(static_cast<std::size_t>(config_.steps_per_iter));
    for (int s = 0; s < config_.steps_per_iter; ++s) {
        auto t = explorer_.step(actor_, frac);
        if (!t) continue;
        residuals.push_back(residual(*t, *env_));
        replay_.push(std::move(*t));
    }
    const GaussianBelief belief_old = belief_;
    if (update_belief_ && !residuals.empty()) {
        belief_ = ibe_fold(belief_, residuals, config_.ibe_case);
    }
    const QuadratureRule rule_old = MixedModel{env_.get(), belief_old}.rule(config_.quadrature, rng_quad_);
    const QuadratureRule rule_new =
        update_belief_ ? MixedModel{env_.get(), belief_}.rule(config_.quadrature, rng_quad_) : rule_old;

    const Mat X = sample_states(config_.batch_size);

    // PEV.
    for (int c = 0; c < config_.critic_steps; ++c) {
        const Vec saved = critic_.params();
        try {
            const auto g = critic_semi_gradient(*env_, critic_, actor_, X, rule_old, config_.gamma);
            critic_opt_.step(critic_.mutable_params(), g.grad);
            if (!critic_.params().allFinite()) throw NumericError("critic parameters not finite");
            report.critic_loss = g.value;
        } catch (const NumericError&) {
            critic_.set_params(saved);
            ++report.rollbacks;
        }
    }

    // PIM.
    const ParametricFn actor_old = actor_;
    auto pim = [&]() {
        const Vec saved = actor_.params();
        try {
            const auto g = actor_gradient(*env_, actor_, critic_, X, rule_old, config_.gamma);
            actor_opt_.step(actor_.mutable_params(), g.grad);
            if (!actor_.params().allFinite()) throw NumericError("actor parameters not finite");
            return g.value;
        } catch (const NumericError&) {
            actor_.set_params(saved);
            ++report.rollbacks;
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    report.actor_obj = pim();

    // MVC inner loop.
    if (update_belief_) {
        auto check = [&]() {
            try {
                return mvc_check(*env_, probes_.states, actor_old, actor_, rule_old, rule_new, critic_,
                                 config_.gamma, config_.mvc_mode);
            } catch (const NumericError&) {
                const double nan = std::numeric_limits<double>::quiet_NaN();
                return MvcResult{false, nan, nan};
            }
        };
        MvcResult mvc = check();
        int j = 0;
        while (!mvc.satisfied && j < config_.j_max) {
            pim();
            ++j;
            mvc = check();
        }
        report.mvc_lhs = mvc.lhs;
        report.e_k = mvc.e_k;
        report.mvc_satisfied = mvc.satisfied;
        report.inner_steps = j;
    }

    report.mu_hat = belief_.mu_hat;
    report.K_hat_diag = belief_.K_hat.diagonal();
    report.episodes_diverged = explorer_.diverged_episodes();
    return report;
}

}  // namespace mixrl

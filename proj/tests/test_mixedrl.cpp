#include <gtest/gtest.h>

#include <cmath>

#include "mixrl/baselines.hpp"
#include "mixrl/mixedrl.hpp"
#include "mixrl/oracles.hpp"

using namespace mixrl;

namespace {

struct LqFixture {
    LQProblem p;
    std::shared_ptr<LinearEnv> env;
    Architecture critic_arch;
    Architecture actor_arch;

    LqFixture() {
        p.A = (Mat(2, 2) << 0.9, 0.2, -0.1, 0.7).finished();
        p.B = (Mat(2, 1) << 0.5, 1.0).finished();
        p.Q = Mat::Identity(2, 2);
        p.R = Mat::Identity(1, 1) * 0.1;
        p.gamma = 0.9;
        p.noise = Gaussian((Vec(2) << 0.1, -0.05).finished(), Mat::Identity(2, 2) * 0.01);
        env = std::make_shared<LinearEnv>(p.A, p.B, p.Q, p.R, p.noise, ActionBounds::symmetric(1, 100.0),
                                          Vec::Ones(2));
        critic_arch.kind = FnKind::quadratic;
        critic_arch.input_dim = 2;
        actor_arch.kind = FnKind::linear;
        actor_arch.input_dim = 2;
        actor_arch.output_dim = 1;
    }

    ParametricFn critic_from(const QuadraticValue& v) const {
        Vec w(6);
        w << v.c, v.p[0], v.p[1], v.P(0, 0), 2 * v.P(0, 1), v.P(1, 1);
        return ParametricFn(critic_arch, w);
    }

    ParametricFn actor_from(const Mat& gain, const Vec& offset) const {
        Vec w(3);
        w << -gain(0, 0), -gain(0, 1), offset[0];
        return ParametricFn(actor_arch, w);
    }

    MixedModel true_model() const {
        return MixedModel{env.get(), make_belief(p.noise.mean, p.noise.cov, p.noise.cov)};
    }

    QuadratureRule rule() const {
        RngStream rng(0);
        return true_model().rule(Quadrature::sigma_point(), rng);
    }

    Mat batch(int n, std::uint64_t seed) const {
        RngStream rng(seed);
        Mat X(2, n);
        for (int b = 0; b < n; ++b) X.col(b) = rng.normal_vec(2);
        return X;
    }
};

}  // namespace

TEST(HValue, QuadraticGaussianClosedForm) {
    const LqFixture f;
    RngStream rng(1);
    QuadraticValue v{(Mat(2, 2) << 2, 0.3, 0.3, 1).finished(), (Vec(2) << 0.5, -1).finished(), 0.7};
    const ParametricFn critic = f.critic_from(v);
    const Mat X = f.batch(5, 2);
    const Mat U = Mat::Random(1, 5);
    const Vec h = h_values(*f.env, X, U, f.rule(), critic, f.p.gamma);
    const Mat M = f.p.Q + f.p.gamma * v.P;
    for (int b = 0; b < 5; ++b) {
        const Vec m = f.p.A * X.col(b) + f.p.B * U.col(b) + f.p.noise.mean;
        const double expect = m.dot(M * m) + (M * f.p.noise.cov).trace() + f.p.gamma * (v.p.dot(m) + v.c) +
                              U.col(b).dot(f.p.R * U.col(b));
        EXPECT_NEAR(h[b], expect, 1e-9);
    }
}

TEST(HValue, DegenerateBeliefNoDiscount) {
    const LqFixture f;
    MixedModel model{f.env.get(), make_belief((Vec(2) << 0.2, 0.1).finished(), Mat::Zero(2, 2))};
    RngStream rng(3);
    const ParametricFn critic = ParametricFn::initialized(f.critic_arch, rng);
    const Vec x = (Vec(2) << 1, -1).finished(), u = Vec::Constant(1, 0.5);
    const Vec xn = f.env->f(x, u) + model.belief.mu_hat;
    EXPECT_NEAR(h_value(x, u, model, critic, 0.0), f.env->utility(xn, u), 1e-12);
    EXPECT_NEAR(h_value(x, u, f.true_model(), ParametricFn::zeros(f.critic_arch), 0.5),
                f.p.noise.cov.trace() + (f.env->f(x, u) + f.p.noise.mean).squaredNorm() + 0.1 * 0.25, 1e-12);
}

TEST(CriticGradient, VanishesAtExactValue) {
    const LqFixture f;
    const AffinePolicy opt = optimal_affine_policy(f.p);
    const ParametricFn critic = f.critic_from(opt.value);
    const ParametricFn actor = f.actor_from(opt.gain, opt.offset);
    const GradientResult g = critic_semi_gradient(*f.env, critic, actor, f.batch(32, 4), f.rule(), f.p.gamma);
    EXPECT_LE(g.grad.norm(), 1e-8);
    EXPECT_LE(g.value, 1e-16);
}

TEST(ActorGradient, VanishesAtOptimum) {
    const LqFixture f;
    const AffinePolicy opt = optimal_affine_policy(f.p);
    const GradientResult g = actor_gradient(*f.env, f.actor_from(opt.gain, opt.offset), f.critic_from(opt.value),
                                            f.batch(32, 5), f.rule(), f.p.gamma);
    EXPECT_LE(g.grad.norm(), 1e-6);
}

TEST(Pev, ConvergesToPolicyValue) {
    const LqFixture f;
    const Mat gain = (Mat(1, 2) << 0.3, 0.2).finished();
    const Vec offset = Vec::Constant(1, 0.05);
    const ParametricFn actor = f.actor_from(gain, offset);
    const QuadraticValue exact = affine_policy_value(f.p, gain, offset);
    ParametricFn critic = ParametricFn::zeros(f.critic_arch);
    const Mat X = f.batch(64, 6);
    const MixedModel model = f.true_model();
    for (int t = 0; t < 20000; ++t) pev_step(critic, actor, model, X, f.p.gamma, 0.2);
    EXPECT_LE((critic.params() - f.critic_from(exact).params()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Pim, ShrinksActionWithoutStateCost) {
    LqFixture f;
    f.env = std::make_shared<LinearEnv>(f.p.A, f.p.B, Mat::Zero(2, 2), f.p.R, f.p.noise,
                                        ActionBounds::symmetric(1, 100.0), Vec::Ones(2));
    ParametricFn actor(f.actor_arch, (Vec(3) << 0.5, -0.4, 0.3).finished());
    const ParametricFn critic = ParametricFn::zeros(f.critic_arch);
    const Mat X = f.batch(32, 7);
    const double before = actor.forward_batch(X).squaredNorm();
    for (int t = 0; t < 200; ++t) pim_step(actor, critic, f.true_model(), X, 0.0, 0.5);
    EXPECT_LT(actor.forward_batch(X).squaredNorm(), 1e-6 * before);
}

TEST(Mvc, Comparisons) {
    EXPECT_FALSE(mvc_passes(0.5, 0.3));
    EXPECT_TRUE(mvc_passes(0.0, 0.0));
    EXPECT_TRUE(mvc_passes(0.2, 0.3));
    EXPECT_FALSE(mvc_passes(0.01, -0.5));
}

TEST(Mvc, IdenticalBeliefSatisfied) {
    const LqFixture f;
    RngStream rng(8);
    const ParametricFn critic = ParametricFn::initialized(f.critic_arch, rng);
    const ParametricFn actor(f.actor_arch, (Vec(3) << -0.2, 0.1, 0).finished());
    const MvcResult r = mvc_check(f.batch(16, 9), actor, actor, f.true_model(), f.true_model(), critic, 0.9);
    EXPECT_TRUE(r.satisfied);
    EXPECT_DOUBLE_EQ(r.lhs, 0.0);
}

TEST(RateSchedule, Linear) {
    TrainerConfig c;
    c.iterations = 101;
    c.rate_decay = 0.1;
    EXPECT_DOUBLE_EQ(rate_scale(c, 1), 1.0);
    EXPECT_NEAR(rate_scale(c, 51), 0.55, 1e-12);
    EXPECT_DOUBLE_EQ(rate_scale(c, 101), 0.1);
    EXPECT_DOUBLE_EQ(rate_scale(c, 500), 0.1);
}

namespace {

TrainerConfig small_config(const LqFixture& f, Algorithm a) {
    TrainerConfig c;
    c.algorithm = a;
    c.gamma = 0.9;
    c.ibe_case = IbeCase::known_covariance;
    c.prior_mu = Vec::Zero(2);
    c.prior_K = Mat::Identity(2, 2) * 0.01;
    c.known_K = f.p.noise.cov;
    c.critic_arch = f.critic_arch;
    c.actor_arch = f.actor_arch;
    if (a == Algorithm::data_driven) c.critic_arch.input_dim = 3;
    c.critic_opt.rate = 0.01;
    c.actor_opt.rate = 0.01;
    c.explore_start = 0.002;
    c.batch_size = 16;
    c.probe_states = 16;
    c.iterations = 30;
    c.seed = 3;
    return c;
}

}  // namespace

TEST(Trainer, DeterministicReports) {
    const LqFixture f;
    for (Algorithm a : {Algorithm::mixed, Algorithm::model_driven, Algorithm::data_driven}) {
        auto l1 = make_learner(f.env, small_config(f, a));
        auto l2 = make_learner(f.env, small_config(f, a));
        for (int k = 0; k < 30; ++k) {
            const IterationReport r1 = l1->iterate();
            const IterationReport r2 = l2->iterate();
            EXPECT_EQ(r1.critic_loss, r2.critic_loss) << to_string(a);
            EXPECT_EQ(r1.actor_obj, r2.actor_obj) << to_string(a) << " k=" << k;
        }
        EXPECT_EQ(l1->actor().params(), l2->actor().params());
        EXPECT_EQ(l1->iteration(), 30);
    }
}

TEST(Trainer, MixedLearnsNoiseMean) {
    const LqFixture f;
    GpiTrainer t(f.env, small_config(f, Algorithm::mixed));
    for (int k = 0; k < 30; ++k) t.iterate();
    EXPECT_LE((t.belief().mu_hat - f.p.noise.mean).norm(), 0.02);
}

TEST(Trainer, ModelDrivenKeepsPriorAndSkipsMvc) {
    const LqFixture f;
    GpiTrainer t(f.env, small_config(f, Algorithm::model_driven));
    for (int k = 0; k < 30; ++k) {
        const IterationReport r = t.iterate();
        EXPECT_TRUE(r.mvc_satisfied);
        EXPECT_EQ(r.inner_steps, 0);
    }
    EXPECT_EQ(t.belief().mu_hat, Vec::Zero(2));
}

TEST(Trainer, RejectsBadConfig) {
    const LqFixture f;
    TrainerConfig c = small_config(f, Algorithm::mixed);
    c.known_K.reset();
    EXPECT_THROW(GpiTrainer(f.env, c), std::invalid_argument);
    c = small_config(f, Algorithm::mixed);
    c.gamma = 1.5;
    EXPECT_THROW(GpiTrainer(f.env, c), std::invalid_argument);
}

TEST(Replay, CapacityAndSampling) {
    ReplayBuffer buf(3);
    for (int i = 0; i < 5; ++i) buf.push(Transition{Vec::Constant(1, i), Vec::Zero(1), Vec::Zero(1)});
    EXPECT_EQ(buf.size(), 3u);
    RngStream rng(1);
    for (std::size_t i : buf.sample_indices(10, rng)) EXPECT_LT(i, 3u);
}

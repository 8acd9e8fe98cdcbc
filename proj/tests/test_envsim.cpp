#include <gtest/gtest.h>

#include <cmath>

#include "mixrl/envsim.hpp"
#include "mixrl/oracles.hpp"
#include "mixrl/vehicle.hpp"

using namespace mixrl;

namespace {

LinearEnv identity_env(const Gaussian& noise) {
    return LinearEnv(Mat::Identity(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2), noise,
                     ActionBounds::symmetric(2, 10.0), Vec::Ones(2));
}

}  // namespace

TEST(LinearEnv, StepWithoutNoise) {
    const LinearEnv env = identity_env(Gaussian::degenerate(Vec::Zero(2)));
    RngStream rng(1);
    const StepResult r = env_step(env, (Vec(2) << 1, 0).finished(), (Vec(2) << 0, 1).finished(), rng);
    EXPECT_DOUBLE_EQ(r.x_next[0], 1.0);
    EXPECT_DOUBLE_EQ(r.x_next[1], 1.0);
    EXPECT_LE(r.xi.norm(), 1e-4);
}

TEST(ActionBounds, Clip) {
    const ActionBounds b = ActionBounds::symmetric(2, 1.0);
    const Vec c = b.clip((Vec(2) << 3, -0.5).finished());
    EXPECT_DOUBLE_EQ(c[0], 1.0);
    EXPECT_DOUBLE_EQ(c[1], -0.5);
}

TEST(Rollout, HorizonOneGivesOneTransition) {
    const LinearEnv env = identity_env(Gaussian::degenerate(Vec::Zero(2)));
    RngStream rng(1);
    const Trajectory t = rollout(env, [](const Vec&) { return Vec::Zero(2); }, Vec::Ones(2), 1, rng);
    EXPECT_EQ(t.transitions.size(), 1u);
    EXPECT_FALSE(t.diverged);
}

TEST(Rollout, StabilizedStateShrinks) {
    Mat A(2, 2);
    A << 1.1, 0.2, 0, 0.9;
    const LinearEnv env(A, Mat::Identity(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2),
                        Gaussian::degenerate(Vec::Zero(2)), ActionBounds::symmetric(2, 100.0), Vec::Ones(2));
    const Mat gain = A * 0.5;
    ASSERT_LT(spectral_radius(A - gain), 1.0);
    RngStream rng(2);
    const Trajectory t = rollout(env, [&](const Vec& x) { return Vec(-gain * x); }, (Vec(2) << 1, -1).finished(),
                                 30, rng);
    double prev = 2.0;
    for (const auto& tr : t.transitions) {
        EXPECT_LE(tr.x_next.norm(), prev + 1e-12);
        prev = tr.x_next.norm();
    }
}

TEST(Rollout, DetectsBlowUp) {
    const LinearEnv env(Mat::Identity(1, 1) * 3.0, Mat::Identity(1, 1), Mat::Identity(1, 1), Mat::Identity(1, 1),
                        Gaussian::degenerate(Vec::Zero(1)), ActionBounds::symmetric(1, 1.0), Vec::Ones(1));
    RngStream rng(3);
    const Trajectory t = rollout(env, [](const Vec&) { return Vec::Zero(1); }, Vec::Ones(1), 100, rng);
    EXPECT_TRUE(t.diverged);
    EXPECT_LT(t.transitions.size(), 100u);
}

TEST(Discretize, Euler) {
    const auto f0 = discretize_euler([](const Vec&, const Vec&) { return Vec::Zero(2); }, 0.005);
    const Vec x = (Vec(2) << 1, 2).finished();
    EXPECT_TRUE(f0(x, Vec::Zero(1)).isApprox(x));
    const Vec d = (Vec(2) << 3, -4).finished();
    const auto f1 = discretize_euler([&](const Vec&, const Vec&) { return d; }, 0.005);
    EXPECT_TRUE(f1(x, Vec::Zero(1)).isApprox(x + 0.005 * d));
}

TEST(TabularMdp, RandomIsValid) {
    RngStream rng(4);
    const TabularMDP m = random_mdp(7, 3, 0.9, rng);
    EXPECT_NO_THROW(m.validate());
    EXPECT_EQ(m.num_states(), 7);
    EXPECT_EQ(m.num_actions(), 3);
}

TEST(TabularMdp, AdditiveRowsAreDistributions) {
    const std::vector<std::vector<int>> next = {{0, 1}, {2, 0}, {1, 2}};
    const Mat util = Mat::Ones(3, 2);
    const TabularMDP m = additive_mdp(next, util, 0.9, 0.3, 0.5, 1);
    EXPECT_NO_THROW(m.validate());
}

TEST(TabularMdp, ValidateRejectsBadRows) {
    TabularMDP m;
    m.transition = {Mat::Constant(2, 2, 0.4)};
    m.utility = Mat::Zero(2, 1);
    EXPECT_THROW(m.validate(), std::invalid_argument);
}

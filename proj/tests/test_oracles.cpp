#include <gtest/gtest.h>

#include <cmath>

#include "mixrl/oracles.hpp"
#include "mixrl/tabular.hpp"

using namespace mixrl;

namespace {

LQProblem scalar(double a, double b, double q, double r, double g) {
    LQProblem p;
    p.A = Mat::Constant(1, 1, a);
    p.B = Mat::Constant(1, 1, b);
    p.Q = Mat::Constant(1, 1, q);
    p.R = Mat::Constant(1, 1, r);
    p.gamma = g;
    p.noise = Gaussian::degenerate(Vec::Zero(1));
    return p;
}

}  // namespace

TEST(Riccati, ZeroDynamics) {
    LQProblem p = scalar(0, 1, 2, 1, 0.9);
    const RiccatiSolution s = riccati_solve(p);
    EXPECT_NEAR(s.gain(0, 0), 0.0, 1e-12);
    EXPECT_NEAR(s.P(0, 0), 2.0, 1e-12);
}

TEST(Riccati, ScalarGoldenRatio) {
    const RiccatiSolution s = riccati_solve(scalar(1, 1, 1, 1, 1));
    EXPECT_NEAR(s.P(0, 0), (1 + std::sqrt(5.0)) / 2, 1e-9);
    EXPECT_NEAR(s.gain(0, 0), (std::sqrt(5.0) - 1) / 2, 1e-9);
}

TEST(Riccati, RandomResidual) {
    RngStream rng(3);
    LQProblem p;
    p.A = Mat(3, 3);
    p.B = Mat(3, 2);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) p.A(i, j) = rng.uniform(-1, 1);
        for (int j = 0; j < 2; ++j) p.B(i, j) = rng.uniform(-1, 1);
    }
    p.Q = Mat::Identity(3, 3);
    p.R = Mat::Identity(2, 2) * 0.1;
    p.gamma = 0.95;
    p.noise = Gaussian::degenerate(Vec::Zero(3));
    const RiccatiSolution s = riccati_solve(p);
    EXPECT_LE(riccati_residual(p, s), 1e-10);
    EXPECT_LT(spectral_radius(std::sqrt(p.gamma) * (p.A - p.B * s.gain)), 1.0);
}

TEST(AffinePolicy, MonteCarloAgreement) {
    LQProblem p = scalar(0.9, 1, 1, 0.5, 0.8);
    p.noise = Gaussian(Vec::Constant(1, 0.2), Mat::Constant(1, 1, 0.04));
    const AffinePolicy opt = optimal_affine_policy(p);
    const LinearEnv env(p.A, p.B, p.Q, p.R, p.noise, ActionBounds::symmetric(1, 100), Vec::Ones(1));
    const Policy pol = [&](const Vec& x) { return Vec(-opt.gain * x + opt.offset); };
    RngStream rng(5);
    const Vec x0 = Vec::Constant(1, 1.5);
    const McEstimate mc = mc_policy_value(env, pol, x0, p.gamma, 4000, 120, rng);
    EXPECT_NEAR(mc.mean, opt.value(x0), 3 * mc.std_error + 1e-6);
}

TEST(AffinePolicy, OffsetImprovesOnZeroOffset) {
    LQProblem p = scalar(0.9, 1, 1, 0.5, 0.8);
    p.noise = Gaussian(Vec::Constant(1, 0.3), Mat::Constant(1, 1, 0.01));
    const AffinePolicy opt = optimal_affine_policy(p);
    const QuadraticValue v0 = affine_policy_value(p, opt.gain, Vec::Zero(1));
    for (double x : {-1.0, 0.0, 2.0}) EXPECT_LT(opt.value(Vec::Constant(1, x)), v0(Vec::Constant(1, x)));
}

TEST(MonteCarlo, ConstantUtility) {
    struct ConstEnv final : Environment {
        Gaussian noise = Gaussian::degenerate(Vec::Zero(1));
        ActionBounds b = ActionBounds::symmetric(1, 1);
        int state_dim() const override { return 1; }
        int action_dim() const override { return 1; }
        Vec f(const Vec& x, const Vec&) const override { return x; }
        double utility(const Vec&, const Vec&) const override { return 2.0; }
        void utility_grad(const Vec&, const Vec&, Vec& gx, Vec& gu) const override {
            gx = Vec::Zero(1);
            gu = Vec::Zero(1);
        }
        const Gaussian& true_noise() const override { return noise; }
        const ActionBounds& bounds() const override { return b; }
    } env;
    RngStream rng(1);
    const McEstimate mc = mc_policy_value(env, [](const Vec&) { return Vec::Zero(1); }, Vec::Zero(1), 0.9, 3, 10, rng);
    EXPECT_NEAR(mc.mean, 2.0 * (1 - std::pow(0.9, 10)) / 0.1, 1e-12);
    EXPECT_NEAR(mc.std_error, 0.0, 1e-12);
}

TEST(GridSearch, PeakAndTies) {
    const auto peak = grid_map_search([](const Vec& x) { return -(x[0] - 0.3) * (x[0] - 0.3); }, Vec::Constant(1, -1),
                                      Vec::Constant(1, 1), 1e-3);
    EXPECT_NEAR(peak.argmax[0], 0.3, 1e-3);
    const auto flat =
        grid_map_search([](const Vec&) { return 1.0; }, Vec::Constant(1, -1), Vec::Constant(1, 1), 0.1);
    EXPECT_DOUBLE_EQ(flat.argmax[0], -1.0);
    EXPECT_TRUE(flat.on_boundary);
    EXPECT_FALSE(flat.warning.empty());
    const auto two = grid_map_search([](const Vec& x) { return -x.squaredNorm(); }, Vec::Constant(2, -1),
                                     Vec::Constant(2, 1), 0.01);
    EXPECT_LE(two.argmax.norm(), 0.01);
}

TEST(TabularOracle, ZeroCost) {
    RngStream rng(1);
    TabularMDP m = random_mdp(4, 2, 0.9, rng);
    m.utility.setZero();
    EXPECT_LE(tabular_brute_force(m).V.norm(), 0.0);
}

TEST(TabularOracle, AbsorbingChain) {
    // State 0 moves to absorbing state 1 at cost 1 (charged on the successor).
    TabularMDP m;
    m.gamma = 0.5;
    Mat P(2, 2);
    P << 0, 1, 0, 1;
    m.transition = {P};
    m.utility = Mat(2, 1);
    m.utility << 0, 1;
    // V(1) = 1 / (1 - 0.5) = 2; V(0) = 1 + 0.5 * 2 = 2.
    const TabularSolution s = tabular_brute_force(m);
    EXPECT_NEAR(s.V[1], 2.0, 1e-11);
    EXPECT_NEAR(s.V[0], 2.0, 1e-11);
    m.utility << 3, 0;
    const TabularSolution z = tabular_brute_force(m);
    EXPECT_NEAR(z.V[0], 0.0, 1e-11);
}

TEST(TabularOracle, EnumerationAgreesWithValueIteration) {
    RngStream rng(2);
    for (int t = 0; t < 5; ++t) {
        const TabularMDP m = random_mdp(5, 3, 0.9, rng);
        const TabularSolution a = tabular_brute_force(m);
        const TabularSolution b = tabular_enumerate(m);
        EXPECT_LE((a.V - b.V).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_EQ(a.policy, b.policy);
    }
}

#include <gtest/gtest.h>

#include "mixrl/oracles.hpp"
#include "mixrl/tabular.hpp"

using namespace mixrl;

TEST(ExactPi, SingleStateZeroCost) {
    TabularMDP m;
    m.transition = {Mat::Ones(1, 1), Mat::Ones(1, 1)};
    m.utility = Mat::Zero(1, 2);
    const auto it = exact_policy_iteration({m});
    EXPECT_DOUBLE_EQ(it.back().V[0], 0.0);
    EXPECT_LE(it.size(), 2u);
}

TEST(ExactPi, TwoStateMatchesEnumeration) {
    TabularMDP m;
    m.gamma = 0.9;
    Mat P0(2, 2), P1(2, 2);
    P0 << 0.9, 0.1, 0.2, 0.8;
    P1 << 0.1, 0.9, 0.7, 0.3;
    m.transition = {P0, P1};
    m.utility = Mat(2, 2);
    m.utility << 1.0, 0.6, 0.1, 0.5;
    const auto it = exact_policy_iteration({m});
    const TabularSolution best = tabular_enumerate(m);
    EXPECT_LE(it.size(), 6u);
    EXPECT_EQ(it.back().policy, best.policy);
    EXPECT_LE((it.back().V - best.V).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ExactPi, MonotoneAndOptimalOnRandomMdps) {
    RngStream rng(10);
    for (int t = 0; t < 10; ++t) {
        const TabularMDP m = random_mdp(10, 3, 0.9, rng);
        const auto it = exact_policy_iteration({m});
        for (std::size_t k = 1; k < it.size(); ++k) EXPECT_LE((it[k].V - it[k - 1].V).maxCoeff(), 1e-9);
        EXPECT_LE((it.back().V - tabular_brute_force(m).V).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(ExactPi, ScheduleUsesLastModel) {
    RngStream rng(11);
    const TabularMDP a = random_mdp(6, 2, 0.9, rng);
    const TabularMDP b = random_mdp(6, 2, 0.9, rng);
    const auto it = exact_policy_iteration({a, a, b});
    EXPECT_LE((it.back().V - tabular_brute_force(b).V).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(PolicyValue, SolvesLinearSystem) {
    RngStream rng(12);
    const TabularMDP m = random_mdp(4, 2, 0.8, rng);
    const std::vector<int> pi = {0, 1, 1, 0};
    const Vec V = tabular_policy_value(m, pi);
    for (int s = 0; s < 4; ++s) EXPECT_NEAR(V[s], m.q_value(s, pi[s], V), 1e-12);
}

TEST(Greedy, TieKeepsCurrent) {
    TabularMDP m;
    m.transition = {Mat::Identity(2, 2), Mat::Identity(2, 2)};
    m.utility = Mat::Ones(2, 2);
    const Vec V = Vec::Zero(2);
    EXPECT_EQ(greedy_policy(m, V), (std::vector<int>{0, 0}));
    const std::vector<int> cur = {1, 0};
    EXPECT_EQ(greedy_policy(m, V, &cur), cur);
}

#include <gtest/gtest.h>

#include <cmath>

#include "mixrl/ibe.hpp"
#include "mixrl/oracles.hpp"

using namespace mixrl;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }
Mat m1(double x) { return Mat::Constant(1, 1, x); }

}  // namespace

TEST(Residual, Examples) {
    const auto f = [](const Vec&, const Vec&) { return (Vec(2) << 1, 2).finished(); };
    const Vec r = residual(Transition{Vec::Zero(2), Vec::Zero(1), (Vec(2) << 1.5, 2.0).finished()}, f);
    EXPECT_DOUBLE_EQ(r[0], 0.5);
    EXPECT_DOUBLE_EQ(r[1], 0.0);
}

TEST(Case1, Examples) {
    GaussianBelief b = make_belief(v1(0), m1(1), m1(1));
    EXPECT_DOUBLE_EQ(b.mu_hat[0], 0.0);
    b = ibe_update_case1(b, v1(2));
    EXPECT_NEAR(b.mu_hat[0], 1.0, 1e-15);
    EXPECT_EQ(b.count, 1);

    GaussianBelief c = make_belief(v1(0), m1(4), m1(1));
    for (int i = 0; i < 3; ++i) c = ibe_update_case1(c, v1(2));
    EXPECT_NEAR(c.mu_hat[0], 6.0 / 3.25, 1e-12);
    EXPECT_NEAR(batch_map_case1(v1(0), m1(4), m1(1), std::vector<Vec>(3, v1(2)))[0], c.mu_hat[0], 1e-12);
    EXPECT_DOUBLE_EQ(c.K_hat(0, 0), 1.0);
}

TEST(Case1, RequiresKnownCovariance) {
    EXPECT_THROW(ibe_update_case1(make_belief(v1(0), m1(1)), v1(1)), std::logic_error);
}

TEST(Case1, MatchesGridSearch) {
    const std::vector<Vec> data(3, v1(2));
    const auto g = grid_map_search([&](const Vec& mu) { return log_posterior_case1(mu, v1(0), m1(4), m1(1), data); },
                                   v1(-5), v1(5), 1e-3);
    EXPECT_NEAR(g.argmax[0], 6.0 / 3.25, 1e-3);
    EXPECT_FALSE(g.on_boundary);
}

TEST(Case1, PrecisionIncreasesByKnownPrecision) {
    const Mat K = (Mat(2, 2) << 2, 0.5, 0.5, 1).finished();
    GaussianBelief b = make_belief(Vec::Zero(2), Mat::Identity(2, 2), K);
    RngStream rng(1);
    for (int i = 0; i < 5; ++i) {
        const Mat before = b.psi;
        b = ibe_update_case1(b, rng.normal_vec(2));
        EXPECT_LE((b.psi - before - regularized_inverse(K)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Case1, BatchLimits) {
    EXPECT_DOUBLE_EQ(batch_map_case1(v1(0.7), m1(1), m1(1), {})[0], 0.7);
    const std::vector<Vec> data = {v1(1), v1(2), v1(6)};
    EXPECT_NEAR(batch_map_case1(v1(0), m1(1e8), m1(1), data)[0], 3.0, 3e-6);
}

TEST(Case1, PriorPull) {
    RngStream rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Vec> data;
        double mean = 0;
        for (int i = 0; i < 5; ++i) {
            data.push_back(v1(10.0 + rng.normal()));
            mean += data.back()[0] / 5;
        }
        const double mu = batch_map_case1(v1(0), m1(2), m1(1), data)[0];
        EXPECT_LE(std::abs(mu), std::abs(mean));
    }
}

TEST(Case2, FirstUpdateIsOuterProduct) {
    const GaussianBelief b = ibe_update_case2(make_belief(v1(0), m1(1)), v1(3));
    EXPECT_DOUBLE_EQ(b.K_hat(0, 0), 9.0);
}

TEST(Case2, ZeroStreamStaysAtZero) {
    GaussianBelief b = make_belief(v1(0), m1(1));
    double K = 1.0;
    for (int k = 1; k <= 20; ++k) {
        b = ibe_update_case2(b, v1(0));
        K *= (k - 1.0) / k;
        EXPECT_DOUBLE_EQ(b.mu_hat[0], 0.0);
        EXPECT_DOUBLE_EQ(b.K_hat(0, 0), K);
    }
}

TEST(Case2, ScalarStreamConsistency) {
    RngStream rng(11);
    GaussianBelief b = make_belief(v1(0), m1(1));
    std::vector<Vec> data;
    for (int i = 0; i < 10000; ++i) {
        data.push_back(v1(1.0 + 0.5 * rng.normal()));
        b = ibe_update_case2(b, data.back());
        EXPECT_GE(b.K_hat(0, 0), 0.0);
    }
    EXPECT_NEAR(b.mu_hat[0], 1.0, 0.02);
    EXPECT_NEAR(b.K_hat(0, 0), 0.25, 0.03);
    const Case2Estimate est = batch_map_case2(v1(0), m1(1), data);
    EXPECT_NEAR(est.mu[0], b.mu_hat[0], 0.01);
    EXPECT_NEAR(est.K(0, 0), b.K_hat(0, 0), 0.01);
}

// Same stream with the accumulated precision: the early covariance estimates
// stay in psi with full weight and bias the mean.
TEST(Case2, AccumulatedScalarStreamIsBiased) {
    RngStream rng(11);
    GaussianBelief b = make_belief(v1(0), m1(1));
    b.case2_precision = Case2Precision::accumulated;
    for (int i = 0; i < 10000; ++i) b = ibe_update_case2(b, v1(1.0 + 0.5 * rng.normal()));
    EXPECT_GT(std::abs(b.mu_hat[0] - 1.0), 0.02);
    EXPECT_NEAR(b.K_hat(0, 0), 0.25, 0.03);
}

// The accumulated precision keeps the ~1/eps contribution of the rank-one
// K_1 forever, so the mean never leaves the prior in some directions.
TEST(Case2, AccumulatedPrecisionStallsInHigherDimension) {
    const Vec mu_star = (Vec(3) << 1.0, -0.5, 0.8).finished();
    const GaussianSampler s(Gaussian(mu_star, Mat::Identity(3, 3) * 0.2));
    double err[2];
    int i = 0;
    for (Case2Precision mode : {Case2Precision::reformed, Case2Precision::accumulated}) {
        RngStream rng(12);
        GaussianBelief b = make_belief(Vec::Zero(3), Mat::Identity(3, 3));
        b.case2_precision = mode;
        for (int t = 0; t < 5000; ++t) b = ibe_update_case2(b, s.sample(rng));
        err[i++] = (b.mu_hat - mu_star).norm();
    }
    EXPECT_LT(err[0], 0.05);
    EXPECT_GT(err[1], 0.1);
}

TEST(Case2, PsdAfterEveryUpdate) {
    RngStream rng(13);
    GaussianBelief b = make_belief(Vec::Zero(3), Mat::Identity(3, 3));
    for (int t = 0; t < 200; ++t) {
        b = ibe_update_case2(b, rng.normal_vec(3));
        EXPECT_LE((b.K_hat - b.K_hat.transpose()).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_GE(Eigen::SelfAdjointEigenSolver<Mat>(b.K_hat).eigenvalues().minCoeff(), -1e-12);
    }
}

TEST(Case2Batch, SingleSampleFixedPoint) {
    const Case2Estimate est = batch_map_case2(v1(0), m1(1), std::vector<Vec>{v1(3)});
    const double K = est.K(0, 0);
    const double Kr = K + regularization_epsilon(est.K);
    EXPECT_NEAR(est.mu[0], 3.0 / Kr / (1.0 + 1.0 / Kr), 1e-9);
    EXPECT_NEAR(K, (3.0 - est.mu[0]) * (3.0 - est.mu[0]), 1e-9);
}

TEST(Case2Batch, IdenticalData) {
    const Case2Estimate est = batch_map_case2(v1(0), m1(1), std::vector<Vec>(10, v1(2)));
    EXPECT_GT(est.mu[0], 0.0);
    EXPECT_LE(est.mu[0], 2.0);
    EXPECT_LT(est.K(0, 0), 1e-6);
}

TEST(Fold, EqualsSequentialUpdates) {
    RngStream rng(3);
    std::vector<Vec> xs;
    for (int i = 0; i < 20; ++i) xs.push_back(rng.normal_vec(2));
    GaussianBelief a = make_belief(Vec::Zero(2), Mat::Identity(2, 2));
    GaussianBelief b = a;
    for (const Vec& x : xs) a = ibe_update_case2(a, x);
    b = ibe_fold(b, xs, IbeCase::unknown_covariance);
    EXPECT_EQ(a.mu_hat, b.mu_hat);
    EXPECT_EQ(a.K_hat, b.K_hat);
}

#include <gtest/gtest.h>

#include <cmath>

#include "mixrl/numkit.hpp"

using namespace mixrl;

namespace {

Mat random_spd(int n, RngStream& rng) {
    Mat G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) G(i, j) = rng.normal();
    return G * G.transpose() + n * Mat::Identity(n, n);
}

}  // namespace

TEST(Cholesky, IdentityAndDiagonal) {
    EXPECT_TRUE(cholesky(Mat::Identity(3, 3)).isApprox(Mat::Identity(3, 3)));
    Mat d = Vec((Vec(2) << 4, 9).finished()).asDiagonal();
    Mat L = cholesky(d);
    EXPECT_DOUBLE_EQ(L(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(L(1, 1), 3.0);
}

TEST(Cholesky, Reconstructs) {
    RngStream rng(5);
    const Mat m = random_spd(5, rng);
    const Mat L = cholesky(m);
    EXPECT_LE((L * L.transpose() - m).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Cholesky, RejectsIndefinite) {
    Mat m(2, 2);
    m << 1, 2, 2, 1;
    EXPECT_THROW(cholesky(m), NumericError);
}

TEST(SolveSpd, Examples) {
    const Vec b = (Vec(3) << 1, -2, 3).finished();
    EXPECT_TRUE(solve_spd(Mat::Identity(3, 3), b).isApprox(b));
    Mat d = Vec((Vec(2) << 2, 4).finished()).asDiagonal();
    const Vec y = solve_spd(d, (Vec(2) << 2, 4).finished());
    EXPECT_NEAR(y[0], 1.0, 1e-15);
    EXPECT_NEAR(y[1], 1.0, 1e-15);
}

TEST(SolveSpd, SmallResidual) {
    RngStream rng(6);
    const Mat m = random_spd(6, rng);
    const Vec b = rng.normal_vec(6);
    EXPECT_LE((m * solve_spd(m, b) - b).norm(), 1e-9);
    const Mat B = m.leftCols(2);
    EXPECT_LE((m * solve_spd_multi(m, B) - B).norm(), 1e-9);
}

TEST(Regularization, EpsilonScalesWithTrace) {
    EXPECT_DOUBLE_EQ(regularization_epsilon(Mat::Identity(2, 2) * 0.1), 1e-10);
    EXPECT_DOUBLE_EQ(regularization_epsilon(Mat::Identity(2, 2) * 50.0), 50.0 * 1e-10);
    const Mat inv = regularized_inverse(Mat::Zero(2, 2));
    EXPECT_NEAR(inv(0, 0), 1e10, 1.0);
}

TEST(Gaussian, ValidatesShapeAndSymmetry) {
    EXPECT_THROW(Gaussian(Vec::Zero(2), Mat::Identity(3, 3)), std::invalid_argument);
    Mat asym(2, 2);
    asym << 1, 0.5, 0, 1;
    EXPECT_THROW(Gaussian(Vec::Zero(2), asym), NumericError);
}

TEST(Sampling, DegenerateCovarianceReturnsMean) {
    RngStream rng(1);
    const Gaussian g(Vec((Vec(2) << 3, -1).finished()), Mat::Zero(2, 2));
    for (int i = 0; i < 10; ++i) {
        const Vec s = sample_gaussian(g, rng);
        EXPECT_NEAR(s[0], 3.0, 1e-4);
        EXPECT_NEAR(s[1], -1.0, 1e-4);
    }
}

TEST(Sampling, StandardNormalMean) {
    RngStream rng(2);
    const GaussianSampler s(Gaussian(Vec::Zero(3), Mat::Identity(3, 3)));
    Vec sum = Vec::Zero(3);
    const int N = 100000;
    for (int i = 0; i < N; ++i) sum += s.sample(rng);
    EXPECT_LE((sum / N).cwiseAbs().maxCoeff(), 4.0 / std::sqrt(N));
}

TEST(Sampling, VehiclePriorScale) {
    const double T = 1.0 / 200.0, m = 1500.0;
    const double sd = 4.0 * T / m;
    Vec var = Vec::Constant(5, 1e-20);
    var[0] = sd * sd;
    const Vec mean = (Vec(5) << 0.00087, 0, 0, 0, 0).finished();
    const GaussianSampler s(Gaussian::diagonal(mean, var));
    RngStream rng(3);
    double s1 = 0, s2 = 0;
    const int N = 100000;
    for (int i = 0; i < N; ++i) {
        const double v = s.sample(rng)[0];
        s1 += v;
        s2 += v * v;
    }
    const double mu = s1 / N;
    EXPECT_NEAR(std::sqrt(s2 / N - mu * mu), sd, 0.05 * sd);
}

TEST(Rng, DeterministicAndSplittable) {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
    RngStream c(42);
    RngStream s0 = c.substream(0), s1 = c.substream(1);
    EXPECT_NE(s0.next_u64(), s1.next_u64());
    EXPECT_EQ(c.counter(), 0u);
    for (int i = 0; i < 1000; ++i) {
        const double u = c.uniform();
        EXPECT_GT(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Quadrature, SigmaPointExactForQuadratics) {
    RngStream rng(4);
    const Gaussian any(Vec((Vec(2) << 0.3, -2).finished()), (Mat(2, 2) << 2, 0.3, 0.3, 1).finished());
    const Vec m = expect_gaussian_vec([](const Vec& x) { return x; }, any, Quadrature::sigma_point(), rng);
    EXPECT_LE((m - any.mean).norm(), 1e-12);

    const auto sq = [](const Vec& x) { return x.squaredNorm(); };
    EXPECT_NEAR(expect_gaussian(sq, Gaussian(Vec::Zero(2), Mat::Identity(2, 2)), Quadrature::sigma_point(), rng),
                2.0, 1e-12);
    const Gaussian shifted(Vec((Vec(2) << 1, 0).finished()), Mat::Identity(2, 2) * 0.5);
    EXPECT_NEAR(expect_gaussian(sq, shifted, Quadrature::sigma_point(), rng), 2.0, 1e-12);
    EXPECT_NEAR(expect_gaussian(sq, shifted, Quadrature::monte_carlo(1000000), rng), 2.0, 1e-2);
}

TEST(Quadrature, MergeCollapsesDegenerateNodes) {
    const Gaussian g(Vec::Zero(3), Vec((Vec(3) << 1, 0, 0).finished()).asDiagonal());
    const QuadratureRule raw = without_zero_weights(unscented_rule(g));
    EXPECT_EQ(raw.size(), 6);
    const QuadratureRule merged = merge_close_nodes(raw, 1e-9);
    // +/- sqrt(3) e_0 and the four coincident nodes at the mean.
    EXPECT_EQ(merged.size(), 3);
    double w = 0;
    for (double x : merged.weights) w += x;
    EXPECT_NEAR(w, 1.0, 1e-15);
}

TEST(CovarianceFactor, HandlesSingular) {
    Mat c(2, 2);
    c << 1, 1, 1, 1;
    const Mat S = covariance_factor(c);
    EXPECT_LE((S * S.transpose() - c).cwiseAbs().maxCoeff(), 1e-8);
    Mat bad(2, 2);
    bad << 1, 0, 0, -1;
    EXPECT_THROW(covariance_factor(bad), NumericError);
}

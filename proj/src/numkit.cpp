#include "mixrl/numkit.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace mixrl {

bool all_finite(const Vec& v) { return v.allFinite(); }
bool all_finite(const Mat& m) { return m.allFinite(); }

Gaussian::Gaussian(Vec mean_, Mat cov_) : mean(std::move(mean_)), cov(std::move(cov_)) {
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
        throw std::invalid_argument("Gaussian: covariance shape does not match mean");
    }
    if (!mean.allFinite() || !cov.allFinite()) {
        throw NumericError("Gaussian: non-finite parameters");
    }
    const double scale = cov.cwiseAbs().maxCoeff();
    if (cov.size() > 0 && (cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw NumericError("Gaussian: covariance is not symmetric");
    }
    cov = 0.5 * (cov + cov.transpose());
}

Gaussian Gaussian::degenerate(const Vec& mean) {
    return Gaussian(mean, Mat::Zero(mean.size(), mean.size()));
}

Gaussian Gaussian::diagonal(const Vec& mean, const Vec& variances) {
    return Gaussian(mean, variances.asDiagonal().toDenseMatrix());
}

double regularization_epsilon(const Mat& cov) {
    const double n = static_cast<double>(cov.rows());
    if (n == 0) return 0.0;
    return 1e-10 * std::max(1.0, cov.trace() / n);
}

Mat regularized(const Mat& cov) {
    Mat out = 0.5 * (cov + cov.transpose());
    out.diagonal().array() += regularization_epsilon(cov);
    return out;
}

Mat cholesky(const Mat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("cholesky: matrix is not square");
    if (!m.allFinite()) throw NumericError("cholesky: non-finite entries");
    Eigen::LLT<Mat> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NumericError("cholesky: matrix is not positive definite");
    }
    return llt.matrixL();
}

namespace {

Eigen::LLT<Mat> checked_llt(const Mat& m, const char* who) {
    if (m.rows() != m.cols()) throw std::invalid_argument(std::string(who) + ": matrix is not square");
    if (!m.allFinite()) throw NumericError(std::string(who) + ": non-finite entries");
    Eigen::LLT<Mat> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NumericError(std::string(who) + ": matrix is not positive definite");
    }
    return llt;
}

}  // namespace

Vec solve_spd(const Mat& m, const Vec& b) {
    if (b.size() != m.rows()) throw std::invalid_argument("solve_spd: dimension mismatch");
    return checked_llt(m, "solve_spd").solve(b);
}

Mat solve_spd_multi(const Mat& m, const Mat& b) {
    if (b.rows() != m.rows()) throw std::invalid_argument("solve_spd: dimension mismatch");
    return checked_llt(m, "solve_spd").solve(b);
}

Mat regularized_inverse(const Mat& cov) {
    const Mat reg = regularized(cov);
    Mat inv = solve_spd_multi(reg, Mat::Identity(reg.rows(), reg.cols()));
    return 0.5 * (inv + inv.transpose());
}

Mat covariance_factor(const Mat& cov) {
    const auto n = cov.rows();
    if (n == 0) return Mat(0, 0);
    if (!cov.allFinite()) throw NumericError("covariance_factor: non-finite covariance");
    if (cov.isZero(0.0)) return Mat::Zero(n, n);

    Eigen::LLT<Mat> llt(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL();

    // Singular but PSD covariances (e.g. noise acting on a single coordinate).
    Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
    if (eig.info() == Eigen::Success) {
        const Vec& lambda = eig.eigenvalues();
        const double tol = 1e-12 * std::max(1e-300, lambda.cwiseAbs().maxCoeff());
        if (lambda.minCoeff() >= -tol) {
            const Vec root = lambda.cwiseMax(0.0).cwiseSqrt();
            return eig.eigenvectors() * root.asDiagonal();
        }
    }

    Eigen::LLT<Mat> reg(regularized(cov));
    if (reg.info() == Eigen::Success) return reg.matrixL();
    throw NumericError("invalid covariance: matrix is not positive semi-definite");
}

// ---------------------------------------------------------------------------
// RngStream

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed), key_(mix64(seed + kGolden)) {}

RngStream::RngStream(std::uint64_t seed, std::uint64_t key, int) : seed_(seed), key_(key) {}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t ctr = counter_++;
    return mix64(key_ + (ctr + 1) * kGolden);
}

double RngStream::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

Vec RngStream::normal_vec(int n) {
    Vec z(n);
    for (int i = 0; i < n; ++i) z[i] = normal();
    return z;
}

std::size_t RngStream::index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("RngStream::index: empty range");
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

RngStream RngStream::substream(std::uint64_t index) const {
    return RngStream(seed_, mix64(key_ ^ mix64(index * kGolden + 0xD1B54A32D192ED03ULL)), 0);
}

// ---------------------------------------------------------------------------
// Sampling and quadrature

Vec sample_gaussian(const Gaussian& dist, RngStream& rng) {
    const Mat factor = covariance_factor(dist.cov);
    return dist.mean + factor * rng.normal_vec(dist.dim());
}

GaussianSampler::GaussianSampler(const Gaussian& dist)
    : dist_(dist), factor_(covariance_factor(dist.cov)), zero_(factor_.isZero(0.0)) {}

Vec GaussianSampler::sample(RngStream& rng) const {
    // Draws are consumed even for a degenerate distribution so the stream
    // position does not depend on the noise level.
    const Vec z = rng.normal_vec(dist_.dim());
    if (zero_) return dist_.mean;
    return dist_.mean + factor_ * z;
}

QuadratureRule unscented_rule(const Gaussian& dist) {
    const int n = dist.dim();
    const Mat root = std::sqrt(static_cast<double>(n)) * covariance_factor(dist.cov);
    QuadratureRule rule;
    rule.nodes.resize(n, 2 * n + 1);
    rule.weights.assign(2 * n + 1, 1.0 / (2.0 * n));
    rule.nodes.col(0) = dist.mean;
    rule.weights[0] = 0.0;
    for (int i = 0; i < n; ++i) {
        rule.nodes.col(1 + i) = dist.mean + root.col(i);
        rule.nodes.col(1 + n + i) = dist.mean - root.col(i);
    }
    return rule;
}

QuadratureRule quadrature_rule(const Gaussian& dist, const Quadrature& scheme, RngStream& rng) {
    if (scheme.kind == QuadratureKind::sigma_point) return unscented_rule(dist);
    if (scheme.samples < 1) throw std::invalid_argument("monte_carlo quadrature needs M >= 1");
    GaussianSampler sampler(dist);
    QuadratureRule rule;
    rule.nodes.resize(dist.dim(), scheme.samples);
    rule.weights.assign(scheme.samples, 1.0 / scheme.samples);
    for (int i = 0; i < scheme.samples; ++i) rule.nodes.col(i) = sampler.sample(rng);
    return rule;
}

QuadratureRule without_zero_weights(const QuadratureRule& rule) {
    std::vector<int> keep;
    for (int i = 0; i < rule.size(); ++i) {
        if (rule.weights[i] != 0.0) keep.push_back(i);
    }
    QuadratureRule out;
    out.nodes.resize(rule.nodes.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
        out.nodes.col(static_cast<Eigen::Index>(j)) = rule.nodes.col(keep[j]);
        out.weights.push_back(rule.weights[keep[j]]);
    }
    return out;
}

QuadratureRule merge_close_nodes(const QuadratureRule& rule, double tol) {
    QuadratureRule out;
    out.nodes.resize(rule.nodes.rows(), rule.nodes.cols());
    int count = 0;
    for (int i = 0; i < rule.size(); ++i) {
        const auto node = rule.nodes.col(i);
        const double scale = tol * (1.0 + node.cwiseAbs().maxCoeff());
        int match = -1;
        for (int j = 0; j < count; ++j) {
            if ((out.nodes.col(j) - node).cwiseAbs().maxCoeff() <= scale) {
                match = j;
                break;
            }
        }
        if (match < 0) {
            out.nodes.col(count++) = node;
            out.weights.push_back(rule.weights[static_cast<std::size_t>(i)]);
        } else {
            // Keep the weighted centroid so the first moment is preserved.
            const double w0 = out.weights[static_cast<std::size_t>(match)];
            const double w1 = rule.weights[static_cast<std::size_t>(i)];
            if (w0 + w1 != 0.0) out.nodes.col(match) = (w0 * out.nodes.col(match) + w1 * node) / (w0 + w1);
            out.weights[static_cast<std::size_t>(match)] = w0 + w1;
        }
    }
    out.nodes.conservativeResize(Eigen::NoChange, count);
    return out;
}

namespace {

[[noreturn]] void non_finite_node(int i) {
    std::ostringstream msg;
    msg << "expect_gaussian: non-finite integrand at quadrature node " << i;
    throw NumericError(msg.str());
}

}  // namespace

double expect_gaussian(const std::function<double(const Vec&)>& g, const Gaussian& dist,
                       const Quadrature& scheme, RngStream& rng) {
    const QuadratureRule rule = quadrature_rule(dist, scheme, rng);
    double acc = 0.0;
    for (int i = 0; i < rule.size(); ++i) {
        const double value = g(rule.nodes.col(i));
        if (!std::isfinite(value)) non_finite_node(i);
        acc += rule.weights[i] * value;
    }
    return acc;
}

Vec expect_gaussian_vec(const std::function<Vec(const Vec&)>& g, const Gaussian& dist,
                        const Quadrature& scheme, RngStream& rng) {
    const QuadratureRule rule = quadrature_rule(dist, scheme, rng);
    Vec acc;
    for (int i = 0; i < rule.size(); ++i) {
        const Vec value = g(rule.nodes.col(i));
        if (!value.allFinite()) non_finite_node(i);
        if (i == 0) acc = Vec::Zero(value.size());
        acc += rule.weights[i] * value;
    }
    return acc;
}

}  // namespace mixrl

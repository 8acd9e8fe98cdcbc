#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mixrl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised when a matrix that must be positive (semi-)definite is not, or a
/// numerical routine produces a non-finite value.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

bool all_finite(const Vec& v);
bool all_finite(const Mat& m);

/// Multivariate normal N(mean, cov). The constructor validates shape,
/// finiteness and symmetry; positive semi-definiteness is checked lazily by
/// the routines that factor the covariance.
struct Gaussian {
    Vec mean;
    Mat cov;

    Gaussian() = default;
    Gaussian(Vec mean_, Mat cov_);

    int dim() const { return static_cast<int>(mean.size()); }

    static Gaussian degenerate(const Vec& mean);
    static Gaussian diagonal(const Vec& mean, const Vec& variances);
};

/// Diagonal jitter added to every covariance before it is inverted:
/// 1e-10 * max(1, trace / n).
double regularization_epsilon(const Mat& cov);
Mat regularized(const Mat& cov);

/// Lower-triangular L with L * L^T = m. Throws NumericError if m is not
/// symmetric positive definite. No regularization is applied.
Mat cholesky(const Mat& m);

/// Solves m * y = b for SPD m without forming the inverse (one or many right-hand sides).
Vec solve_spd(const Mat& m, const Vec& b);
Mat solve_spd_multi(const Mat& m, const Mat& b);

/// Inverse of regularized(cov), the precision used by the Bayesian updates.
Mat regularized_inverse(const Mat& cov);

/// Square-root factor S with S * S^T = cov for a covariance that may be
/// singular. Tries Cholesky, then a symmetric eigendecomposition with
/// round-off-sized negative eigenvalues clamped, then Cholesky of the
/// regularized matrix. Throws NumericError for indefinite input.
Mat covariance_factor(const Mat& cov);

/// Counter-based 64-bit generator. The output at position i is a pure
/// function of (key, i), so streams are reproducible across platforms and can
/// be split into independent substreams by index.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0);

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1).
    double uniform();
    double uniform(double lo, double hi);
    double normal();
    Vec normal_vec(int n);
    std::size_t index(std::size_t n);

    /// Independent stream derived from this stream's key and `index`. Does not
    /// advance this stream.
    RngStream substream(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

private:
    RngStream(std::uint64_t seed, std::uint64_t key, int);

    std::uint64_t seed_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// mean + L z, z ~ N(0, I).
Vec sample_gaussian(const Gaussian& dist, RngStream& rng);

/// Sampler with the covariance factor computed once.
class GaussianSampler {
public:
    GaussianSampler() = default;
    explicit GaussianSampler(const Gaussian& dist);

    Vec sample(RngStream& rng) const;
    const Gaussian& distribution() const { return dist_; }

private:
    Gaussian dist_;
    Mat factor_;
    bool zero_ = true;
};

enum class QuadratureKind { sigma_point, monte_carlo };

struct Quadrature {
    QuadratureKind kind = QuadratureKind::sigma_point;
    int samples = 0;

    static Quadrature sigma_point() { return {QuadratureKind::sigma_point, 0}; }
    static Quadrature monte_carlo(int m) { return {QuadratureKind::monte_carlo, m}; }
};

/// Weighted nodes approximating E over a Gaussian. Column i of `nodes` is
/// the i-th node; weights sum to one.
struct QuadratureRule {
    Mat nodes;
    std::vector<double> weights;

    int size() const { return static_cast<int>(weights.size()); }
};

/// Unscented set with kappa = 0: the mean (weight 0) and mean +/- sqrt(n)
/// times each column of the covariance factor (weight 1/2n each). Exact for
/// polynomials of degree <= 2.
QuadratureRule unscented_rule(const Gaussian& dist);
QuadratureRule quadrature_rule(const Gaussian& dist, const Quadrature& scheme, RngStream& rng);

/// The same rule with zero-weight nodes dropped.
QuadratureRule without_zero_weights(const QuadratureRule& rule);

/// Merges nodes closer than tol * (1 + |node|_inf) into their weighted
/// centroid. Collapses the coincident sigma points of a degenerate covariance.
QuadratureRule merge_close_nodes(const QuadratureRule& rule, double tol);

double expect_gaussian(const std::function<double(const Vec&)>& g, const Gaussian& dist,
                       const Quadrature& scheme, RngStream& rng);
Vec expect_gaussian_vec(const std::function<Vec(const Vec&)>& g, const Gaussian& dist,
                        const Quadrature& scheme, RngStream& rng);

}  // namespace mixrl

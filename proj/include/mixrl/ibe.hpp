#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mixrl/envsim.hpp"
#include "mixrl/numkit.hpp"

namespace mixrl {

enum class IbeCase {
    known_covariance,   // Case 1: K fixed, only the mean is estimated
    unknown_covariance  // Case 2: mean (MAP) and covariance (ML) estimated
};

/// How Case 2 forms psi_k. accumulated sums K_{j-1}^{-1} over the stream,
/// so the rank-deficient K_1..K_{n-1} leave a permanent ~1/eps precision
/// when n > 1. reformed uses K_M^{-1} + k K_{k-1}^{-1}, the batch MAP
/// precision at the current covariance estimate.
enum class Case2Precision { accumulated, reformed };

const char* to_string(Case2Precision p);
Case2Precision case2_precision_from_string(const std::string& name);

/// Running MAP state of the additive disturbance N(mu, K).
///
/// Covariances are stored unregularized; every inversion uses
/// regularized_inverse(), so psi at count 0 is the regularized prior
/// precision.
struct GaussianBelief {
    Vec mu_hat;
    Mat K_hat;
    Mat psi;
    Vec m_sum;
    long count = 0;
    Case2Precision case2_precision = Case2Precision::reformed;
    Vec prior_mu;
    Mat prior_K;
    std::optional<Mat> known_K;

    // Cached K_M^{-1}, K_M^{-1} mu_M and (Case 1) K^{-1}.
    Mat prior_precision;
    Vec prior_information;
    std::optional<Mat> known_precision;

    int dim() const { return static_cast<int>(mu_hat.size()); }
    Gaussian distribution() const { return Gaussian(mu_hat, K_hat); }
};

/// Belief at count 0: mu_hat = mu_M, K_hat = K_M (or the known K for
/// Case 1), psi = K_M^{-1}, m = 0.
GaussianBelief make_belief(const Vec& prior_mu, const Mat& prior_K,
                           std::optional<Mat> known_K = std::nullopt);

/// xi = x' - f(x, u).
Vec residual(const Transition& t, const Environment& env);
Vec residual(const Transition& t, const std::function<Vec(const Vec&, const Vec&)>& f);

/// psi_k = psi_{k-1} + K^{-1}; m_k = m_{k-1} + xi;
/// mu_k = psi_k^{-1} (K_M^{-1} mu_M + K^{-1} m_k).
GaussianBelief ibe_update_case1(GaussianBelief belief, const Vec& xi);

/// psi_k = psi_{k-1} + K_{k-1}^{-1} (accumulated) or
/// K_M^{-1} + k K_{k-1}^{-1} (reformed); m_k = m_{k-1} + xi;
/// mu_k = psi_k^{-1} (K_M^{-1} mu_M + K_{k-1}^{-1} m_k);
/// K_k = ((k-1) K_{k-1} + (xi - mu_{k-1})(xi - mu_{k-1})^T) / k.
GaussianBelief ibe_update_case2(GaussianBelief belief, const Vec& xi);

GaussianBelief ibe_update(GaussianBelief belief, const Vec& xi, IbeCase which);

/// Folds a buffer of residuals one at a time in order.
GaussianBelief ibe_fold(GaussianBelief belief, std::span<const Vec> residuals, IbeCase which);

/// Closed-form Case 1 MAP: (K_M^{-1} + N K^{-1})^{-1} (K_M^{-1} mu_M + K^{-1} sum xi).
Vec batch_map_case1(const Vec& prior_mu, const Mat& prior_K, const Mat& K, std::span<const Vec> data);

struct Case2Estimate {
    Vec mu;
    Mat K;
    int iterations = 0;
};

/// Coupled Case 2 MAP/ML estimate solved by alternating the mean and
/// covariance equations to a 1e-12 fixed point. Throws NumericError after
/// 10^4 alternations without convergence.
Case2Estimate batch_map_case2(const Vec& prior_mu, const Mat& prior_K, std::span<const Vec> data);

/// Case 1 log posterior (up to a constant) at mu.
double log_posterior_case1(const Vec& mu, const Vec& prior_mu, const Mat& prior_K, const Mat& K,
                           std::span<const Vec> data);

}  // namespace mixrl

#include "mixrl/ibe.hpp"

#include <cmath>
#include <stdexcept>

namespace mixrl {

namespace {

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

void check_dim(const GaussianBelief& belief, const Vec& xi) {
    if (xi.size() != belief.mu_hat.size()) throw std::invalid_argument("IBE: residual dimension mismatch");
    if (!xi.allFinite()) throw NumericError("IBE: non-finite residual");
}

}  // namespace

const char* to_string(Case2Precision p) { return p == Case2Precision::accumulated ? "accumulated" : "reformed"; }

Case2Precision case2_precision_from_string(const std::string& name) {
    if (name == "accumulated") return Case2Precision::accumulated;
    if (name == "reformed") return Case2Precision::reformed;
    throw std::invalid_argument("case2 precision must be accumulated or reformed");
}

GaussianBelief make_belief(const Vec& prior_mu, const Mat& prior_K, std::optional<Mat> known_K) {
    const auto n = prior_mu.size();
    if (prior_K.rows() != n || prior_K.cols() != n) {
        throw std::invalid_argument("make_belief: prior covariance shape mismatch");
    }
    GaussianBelief b;
    b.prior_mu = prior_mu;
    b.prior_K = symmetrized(prior_K);
    b.prior_precision = regularized_inverse(b.prior_K);
    b.prior_information = b.prior_precision * prior_mu;
    b.mu_hat = prior_mu;
    b.psi = b.prior_precision;
    b.m_sum = Vec::Zero(n);
    b.count = 0;
    if (known_K) {
        if (known_K->rows() != n || known_K->cols() != n) {
            throw std::invalid_argument("make_belief: known covariance shape mismatch");
        }
        b.known_K = symmetrized(*known_K);
        b.known_precision = regularized_inverse(*b.known_K);
        b.K_hat = *b.known_K;
    } else {
        b.K_hat = b.prior_K;
    }
    return b;
}

Vec residual(const Transition& t, const Environment& env) { return t.x_next - env.f(t.x, t.u); }

Vec residual(const Transition& t, const std::function<Vec(const Vec&, const Vec&)>& f) {
    return t.x_next - f(t.x, t.u);
}

GaussianBelief ibe_update_case1(GaussianBelief belief, const Vec& xi) {
    if (!belief.known_K || !belief.known_precision) {
        throw std::logic_error("ibe_update_case1: belief has no known covariance (Case 2 belief)");
    }
    check_dim(belief, xi);
    const Mat& k_inv = *belief.known_precision;
    belief.psi += k_inv;
    belief.m_sum += xi;
    belief.count += 1;
    belief.mu_hat = solve_spd(belief.psi, belief.prior_information + k_inv * belief.m_sum);
    belief.K_hat = *belief.known_K;
    return belief;
}

GaussianBelief ibe_update_case2(GaussianBelief belief, const Vec& xi) {
    check_dim(belief, xi);
    const Mat k_prev_inv = regularized_inverse(belief.K_hat);
    const Vec mu_prev = belief.mu_hat;
    belief.count += 1;
    const double k = static_cast<double>(belief.count);

    belief.psi = belief.case2_precision == Case2Precision::accumulated
                     ? symmetrized(belief.psi + k_prev_inv)
                     : symmetrized(belief.prior_precision + k * k_prev_inv);
    belief.m_sum += xi;
    belief.mu_hat = solve_spd(belief.psi, belief.prior_information + k_prev_inv * belief.m_sum);
    const Vec dev = xi - mu_prev;
    belief.K_hat = symmetrized(((k - 1.0) * belief.K_hat + dev * dev.transpose()) / k);
    return belief;
}

GaussianBelief ibe_update(GaussianBelief belief, const Vec& xi, IbeCase which) {
    return which == IbeCase::known_covariance ? ibe_update_case1(std::move(belief), xi)
                                              : ibe_update_case2(std::move(belief), xi);
}

GaussianBelief ibe_fold(GaussianBelief belief, std::span<const Vec> residuals, IbeCase which) {
    for (const Vec& xi : residuals) belief = ibe_update(std::move(belief), xi, which);
    return belief;
}

Vec batch_map_case1(const Vec& prior_mu, const Mat& prior_K, const Mat& K, std::span<const Vec> data) {
    const Mat prior_precision = regularized_inverse(prior_K);
    const Mat k_inv = regularized_inverse(K);
    Vec sum = Vec::Zero(prior_mu.size());
    for (const Vec& xi : data) sum += xi;
    const double N = static_cast<double>(data.size());
    const Mat lhs = symmetrized(prior_precision + N * k_inv);
    return solve_spd(lhs, prior_precision * prior_mu + k_inv * sum);
}

Case2Estimate batch_map_case2(const Vec& prior_mu, const Mat& prior_K, std::span<const Vec> data) {
    if (data.empty()) throw std::invalid_argument("batch_map_case2: needs at least one residual");
    const auto n = prior_mu.size();
    const double N = static_cast<double>(data.size());
    const Mat prior_precision = regularized_inverse(prior_K);
    Vec sum = Vec::Zero(n);
    for (const Vec& xi : data) sum += xi;

    Case2Estimate est{prior_mu, symmetrized(prior_K), 0};
    constexpr int kMaxAlternations = 10000;
    for (int it = 1; it <= kMaxAlternations; ++it) {
        const Mat k_inv = regularized_inverse(est.K);
        const Vec mu = solve_spd(symmetrized(prior_precision + N * k_inv),
                                 prior_precision * prior_mu + k_inv * sum);
        Mat K = Mat::Zero(n, n);
        for (const Vec& xi : data) K += (xi - mu) * (xi - mu).transpose();
        K = symmetrized(K / N);

        const double dmu = (mu - est.mu).cwiseAbs().maxCoeff();
        const double dK = (K - est.K).cwiseAbs().maxCoeff();
        const double mu_scale = 1.0 + mu.cwiseAbs().maxCoeff();
        const double K_scale = 1.0 + K.cwiseAbs().maxCoeff();
        est.mu = mu;
        est.K = K;
        est.iterations = it;
        if (dmu <= 1e-12 * mu_scale && dK <= 1e-12 * K_scale) return est;
    }
    throw NumericError("batch_map_case2: no fixed point after 10^4 alternations");
}

double log_posterior_case1(const Vec& mu, const Vec& prior_mu, const Mat& prior_K, const Mat& K,
                           std::span<const Vec> data) {
    const Vec d0 = mu - prior_mu;
    double value = -0.5 * d0.dot(solve_spd(regularized(prior_K), d0));
    const Mat K_reg = regularized(K);
    for (const Vec& xi : data) {
        const Vec d = xi - mu;
        value -= 0.5 * d.dot(solve_spd(K_reg, d));
    }
    return value;
}

}  // namespace mixrl

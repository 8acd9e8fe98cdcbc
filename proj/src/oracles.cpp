#include "mixrl/oracles.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace mixrl {

void LQProblem::validate() const {
    const auto n = A.rows();
    const auto m = B.cols();
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m ||
        R.cols() != m) {
        throw std::invalid_argument("LQProblem: inconsistent dimensions");
    }
    if (noise.dim() != n) throw std::invalid_argument("LQProblem: noise dimension mismatch");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("LQProblem: gamma must be in (0,1]");
    Eigen::LLT<Mat> q(Q), r(R);
    if (q.info() != Eigen::Success || r.info() != Eigen::Success) {
        throw std::invalid_argument("LQProblem: Q and R must be positive definite");
    }
}

RiccatiSolution riccati_solve(const LQProblem& p) {
    p.validate();
    const double sg = std::sqrt(p.gamma);
    const Mat A = sg * p.A;
    const Mat B = sg * p.B;
    Mat P = p.Q;
    for (int it = 1; it <= 100000; ++it) {
        const Mat BtP = B.transpose() * P;
        const Mat G = (p.R + BtP * B).ldlt().solve(BtP * A);
        Mat next = p.Q + A.transpose() * P * A - A.transpose() * P * B * G;
        next = 0.5 * (next + next.transpose());
        if (!next.allFinite()) throw NumericError("riccati_solve: iteration diverged");
        const double change = (next - P).cwiseAbs().maxCoeff();
        P = std::move(next);
        if (change <= 1e-12 * std::max(1.0, P.cwiseAbs().maxCoeff())) {
            RiccatiSolution s;
            const Mat BtPn = p.B.transpose() * P;
            s.gain = (p.R + p.gamma * BtPn * p.B).ldlt().solve(p.gamma * BtPn * p.A);
            s.P = P;
            s.iterations = it;
            return s;
        }
    }
    throw NumericError("riccati_solve: no convergence in 1e5 iterations");
}

double riccati_residual(const LQProblem& p, const RiccatiSolution& s) {
    const Mat& P = s.P;
    const double g = p.gamma;
    const Mat M = p.R + g * p.B.transpose() * P * p.B;
    const Mat gain_eq = M * s.gain - g * p.B.transpose() * P * p.A;
    const Mat ric = p.Q + g * p.A.transpose() * P * p.A -
                    g * p.A.transpose() * P * p.B * s.gain - P;
    return std::max(gain_eq.cwiseAbs().maxCoeff(), ric.cwiseAbs().maxCoeff());
}

RiccatiSolution successor_cost_solution(const LQProblem& p) {
    LQProblem scaled = p;
    scaled.Q = p.Q / p.gamma;
    RiccatiSolution s = riccati_solve(scaled);
    s.P = s.P - p.Q / p.gamma;
    return s;
}

QuadraticValue affine_policy_value(const LQProblem& p, const Mat& gain, const Vec& offset) {
    p.validate();
    const int n = p.state_dim();
    const double g = p.gamma;
    const Mat Ac = p.A - p.B * gain;
    if (std::sqrt(g) * spectral_radius(Ac) >= 1.0) {
        throw NumericError("affine_policy_value: discounted closed loop is unstable");
    }
    // vec(P) = (I - g Ac^T (x) Ac^T)^{-1} vec(Ac^T Q Ac + K^T R K)
    const Mat rhs = Ac.transpose() * p.Q * Ac + gain.transpose() * p.R * gain;
    Mat kron(n * n, n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) kron.block(i * n, j * n, n, n) = Ac(j, i) * Ac.transpose();
    }
    const Mat system = Mat::Identity(n * n, n * n) - g * kron;
    const Vec vecP = system.partialPivLu().solve(Eigen::Map<const Vec>(rhs.data(), n * n));
    QuadraticValue v;
    v.P = Eigen::Map<const Mat>(vecP.data(), n, n);
    v.P = 0.5 * (v.P + v.P.transpose());

    const Mat S = p.Q + g * v.P;
    const Vec d = p.B * offset + p.noise.mean;
    const Vec lin = 2.0 * Ac.transpose() * S * d - 2.0 * gain.transpose() * p.R * offset;
    v.p = (Mat::Identity(n, n) - g * Ac.transpose()).partialPivLu().solve(lin);
    const double tr = (S * p.noise.cov).trace();
    v.c = (d.dot(S * d) + tr + offset.dot(p.R * offset) + g * v.p.dot(d)) / (1.0 - g);
    return v;
}

AffinePolicy optimal_affine_policy(const LQProblem& p) {
    const RiccatiSolution s = successor_cost_solution(p);
    const int n = p.state_dim();
    const int m = p.action_dim();
    const double g = p.gamma;
    const Mat S = p.Q + g * s.P;
    const Mat Ac = p.A - p.B * s.gain;
    const Mat G = (p.R + p.B.transpose() * S * p.B).inverse();
    // [k; p_lin] from k = -G(B^T S mu + g/2 B^T p_lin) and the linear value equation.
    Mat M = Mat::Zero(m + n, m + n);
    Vec rhs(m + n);
    M.topLeftCorner(m, m) = Mat::Identity(m, m);
    M.topRightCorner(m, n) = 0.5 * g * G * p.B.transpose();
    M.bottomLeftCorner(n, m) = -2.0 * Ac.transpose() * S * p.B + 2.0 * s.gain.transpose() * p.R;
    M.bottomRightCorner(n, n) = Mat::Identity(n, n) - g * Ac.transpose();
    rhs.head(m) = -G * p.B.transpose() * S * p.noise.mean;
    rhs.tail(n) = 2.0 * Ac.transpose() * S * p.noise.mean;
    const Vec z = M.partialPivLu().solve(rhs);
    AffinePolicy out;
    out.gain = s.gain;
    out.offset = z.head(m);
    out.value = affine_policy_value(p, out.gain, out.offset);
    return out;
}

double spectral_radius(const Mat& m) {
    Eigen::EigenSolver<Mat> es(m, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

McEstimate mc_policy_value(const Environment& env, const Policy& policy, const Vec& x0, double gamma,
                           int episodes, int horizon, RngStream& rng) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("mc_policy_value: gamma must be in (0,1)");
    if (episodes < 1 || horizon < 1) throw std::invalid_argument("mc_policy_value: bad sizes");
    const GaussianSampler noise(env.true_noise());
    std::vector<double> returns(static_cast<std::size_t>(episodes));
    for (int e = 0; e < episodes; ++e) {
        RngStream r = rng.substream(static_cast<std::uint64_t>(e));
        Vec x = x0;
        double total = 0.0;
        double disc = 1.0;
        for (int t = 0; t < horizon; ++t) {
            const Vec u = env.bounds().clip(policy(x));
            Vec next = env.f(x, u) + noise.sample(r);
            total += disc * env.utility(next, u);
            disc *= gamma;
            x = std::move(next);
        }
        returns[static_cast<std::size_t>(e)] = total;
    }
    McEstimate est;
    for (double v : returns) est.mean += v;
    est.mean /= episodes;
    if (episodes > 1) {
        double ss = 0.0;
        for (double v : returns) ss += (v - est.mean) * (v - est.mean);
        est.std_error = std::sqrt(ss / (episodes - 1) / episodes);
    }
    return est;
}

GridSearchResult grid_map_search(const std::function<double(const Vec&)>& objective, const Vec& lo,
                                 const Vec& hi, double resolution) {
    const auto d = lo.size();
    if (d < 1 || d > 2 || hi.size() != d) throw std::invalid_argument("grid_map_search: 1-D or 2-D only");
    if (!(resolution > 0.0)) throw std::invalid_argument("grid_map_search: resolution must be positive");
    if ((hi.array() <= lo.array()).any()) throw std::invalid_argument("grid_map_search: empty box");

    std::vector<long> cells(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) {
        cells[static_cast<std::size_t>(i)] = static_cast<long>(std::floor((hi[i] - lo[i]) / resolution + 1e-9)) + 1;
    }
    GridSearchResult best;
    best.value = -std::numeric_limits<double>::infinity();
    std::vector<long> best_idx(static_cast<std::size_t>(d), 0);
    Vec x(d);
    const long n0 = cells[0];
    const long n1 = d == 2 ? cells[1] : 1;
    for (long i = 0; i < n0; ++i) {
        for (long j = 0; j < n1; ++j) {
            x[0] = lo[0] + static_cast<double>(i) * resolution;
            if (d == 2) x[1] = lo[1] + static_cast<double>(j) * resolution;
            const double v = objective(x);
            if (v > best.value) {
                best.value = v;
                best.argmax = x;
                best_idx[0] = i;
                if (d == 2) best_idx[1] = j;
            }
        }
    }
    if (best.argmax.size() == 0) throw NumericError("grid_map_search: objective never finite");
    for (Eigen::Index i = 0; i < d; ++i) {
        const long idx = best_idx[static_cast<std::size_t>(i)];
        if (idx == 0 || idx == cells[static_cast<std::size_t>(i)] - 1) best.on_boundary = true;
    }
    if (best.on_boundary) {
        std::ostringstream msg;
        msg << "grid_map_search: argmax on the search boundary (bounds too tight?)";
        best.warning = msg.str();
    }
    return best;
}

TabularSolution tabular_brute_force(const TabularMDP& mdp) {
    mdp.validate();
    const int S = mdp.num_states();
    Vec V = Vec::Zero(S);
    TabularSolution sol;
    for (int it = 1; it <= 1000000; ++it) {
        Vec next(S);
        for (int s = 0; s < S; ++s) {
            double best = mdp.q_value(s, 0, V);
            for (int a = 1; a < mdp.num_actions(); ++a) best = std::min(best, mdp.q_value(s, a, V));
            next[s] = best;
        }
        const double change = (next - V).cwiseAbs().maxCoeff();
        V = std::move(next);
        sol.iterations = it;
        if (change <= 1e-12) break;
    }
    sol.V = V;
    sol.policy = greedy_policy(mdp, V);
    return sol;
}

TabularSolution tabular_enumerate(const TabularMDP& mdp) {
    mdp.validate();
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    double count = std::pow(static_cast<double>(A), S);
    if (count > 1e6) throw std::invalid_argument("tabular_enumerate: too many policies");
    std::vector<int> policy(static_cast<std::size_t>(S), 0);
    TabularSolution best;
    double best_sum = std::numeric_limits<double>::infinity();
    for (long i = 0; i < static_cast<long>(count); ++i) {
        long code = i;
        for (int s = 0; s < S; ++s) {
            policy[static_cast<std::size_t>(s)] = static_cast<int>(code % A);
            code /= A;
        }
        const Vec V = tabular_policy_value(mdp, policy);
        if (V.sum() < best_sum - 1e-12) {
            best_sum = V.sum();
            best.V = V;
            best.policy = policy;
        }
        ++best.iterations;
    }
    return best;
}

}  // namespace mixrl

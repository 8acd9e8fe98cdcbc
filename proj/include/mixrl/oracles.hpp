#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mixrl/envsim.hpp"
#include "mixrl/tabular.hpp"

namespace mixrl {

/// x' = A x + B u + xi, xi ~ noise, with quadratic costs Q and R.
struct LQProblem {
    Mat A;
    Mat B;
    Mat Q;
    Mat R;
    double gamma = 1.0;
    Gaussian noise;

    int state_dim() const { return static_cast<int>(A.rows()); }
    int action_dim() const { return static_cast<int>(B.cols()); }
    void validate() const;
};

struct RiccatiSolution {
    Mat P;     // value matrix
    Mat gain;  // u = -gain * x
    int iterations = 0;
};

/// Discounted discrete Riccati equation with the cost charged on the current
/// state, sum gamma^t (x_t' Q x_t + u_t' R u_t), iterated to a 1e-12 fixed
/// point on the sqrt(gamma)-scaled system. Throws NumericError after 1e5
/// iterations.
RiccatiSolution riccati_solve(const LQProblem& p);

/// max |residual| of the Riccati and gain equations at (P, gain).
double riccati_residual(const LQProblem& p, const RiccatiSolution& s);

/// Optimal quadratic part when the cost is charged on the successor state,
/// l(x', u) = x'^T Q x' + u^T R u. Equals riccati_solve with Q / gamma for the
/// gain; P is the successor-convention value matrix.
RiccatiSolution successor_cost_solution(const LQProblem& p);

/// V(x) = x^T P x + p^T x + c.
struct QuadraticValue {
    Mat P;
    Vec p;
    double c = 0.0;

    double operator()(const Vec& x) const { return x.dot(P * x) + p.dot(x) + c; }
};

/// Exact value of u = -gain x + offset under the successor-cost convention
/// with noise N(mu, K). Requires a stable discounted closed loop.
QuadraticValue affine_policy_value(const LQProblem& p, const Mat& gain, const Vec& offset);

struct AffinePolicy {
    Mat gain;
    Vec offset;
    QuadraticValue value;
};

/// Optimal affine policy under the successor-cost convention. The gain does
/// not depend on the noise; the offset compensates the noise mean.
AffinePolicy optimal_affine_policy(const LQProblem& p);

/// Spectral radius of a square matrix.
double spectral_radius(const Mat& m);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Truncated discounted return from x0, averaged over independent episodes
/// (episode i uses substream i of rng).
McEstimate mc_policy_value(const Environment& env, const Policy& policy, const Vec& x0, double gamma,
                           int episodes, int horizon, RngStream& rng);

struct GridSearchResult {
    Vec argmax;
    double value = 0.0;
    bool on_boundary = false;
    std::string warning;
};

/// Exhaustive maximization over a 1-D or 2-D box with the given cell size.
/// Ties keep the first cell in lexicographic order. An argmax on the box
/// boundary sets on_boundary and a warning.
GridSearchResult grid_map_search(const std::function<double(const Vec&)>& objective, const Vec& lo,
                                 const Vec& hi, double resolution);

struct TabularSolution {
    Vec V;
    std::vector<int> policy;
    int iterations = 0;
};

/// Value iteration until the sup-norm change is at most 1e-12.
TabularSolution tabular_brute_force(const TabularMDP& mdp);

/// Optimal deterministic policy by enumerating all |A|^|S| policies with
/// exact evaluation. Small MDPs only.
TabularSolution tabular_enumerate(const TabularMDP& mdp);

}  // namespace mixrl

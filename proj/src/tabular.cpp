#include "mixrl/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mixrl {

Vec tabular_policy_value(const TabularMDP& mdp, const std::vector<int>& policy) {
    const int S = mdp.num_states();
    if (static_cast<int>(policy.size()) != S) throw std::invalid_argument("policy size mismatch");
    Mat P(S, S);
    Vec l(S);
    for (int s = 0; s < S; ++s) {
        const int a = policy[static_cast<std::size_t>(s)];
        if (a < 0 || a >= mdp.num_actions()) throw std::invalid_argument("policy action out of range");
        const auto row = mdp.transition[static_cast<std::size_t>(a)].row(s);
        P.row(s) = row;
        l[s] = row.dot(mdp.utility.col(a));
    }
    const Mat system = Mat::Identity(S, S) - mdp.gamma * P;
    Eigen::PartialPivLU<Mat> lu(system);
    if (!(std::abs(lu.determinant()) > 0.0)) throw NumericError("singular policy-evaluation system");
    return lu.solve(l);
}

std::vector<int> greedy_policy(const TabularMDP& mdp, const Vec& V, const std::vector<int>* current) {
    const int S = mdp.num_states();
    std::vector<int> policy(static_cast<std::size_t>(S), 0);
    for (int s = 0; s < S; ++s) {
        int best = 0;
        double best_q = mdp.q_value(s, 0, V);
        for (int a = 1; a < mdp.num_actions(); ++a) {
            const double q = mdp.q_value(s, a, V);
            if (q < best_q) {
                best_q = q;
                best = a;
            }
        }
        if (current) {
            const int keep = (*current)[static_cast<std::size_t>(s)];
            if (mdp.q_value(s, keep, V) <= best_q + 1e-12 * (1.0 + std::abs(best_q))) best = keep;
        }
        policy[static_cast<std::size_t>(s)] = best;
    }
    return policy;
}

std::vector<TabularIterate> exact_policy_iteration(const std::vector<TabularMDP>& schedule,
                                                   const ExactPiConfig& config,
                                                   std::vector<int> initial_policy) {
    if (schedule.empty()) throw std::invalid_argument("exact_policy_iteration: empty schedule");
    for (const auto& mdp : schedule) {
        mdp.validate();
        if (mdp.num_states() != schedule.front().num_states() ||
            mdp.num_actions() != schedule.front().num_actions()) {
            throw std::invalid_argument("exact_policy_iteration: schedule shape mismatch");
        }
    }
    const int S = schedule.front().num_states();
    if (initial_policy.empty()) initial_policy.assign(static_cast<std::size_t>(S), 0);

    auto model = [&](std::size_t k) -> const TabularMDP& {
        return schedule[std::min(k, schedule.size() - 1)];
    };

    std::vector<TabularIterate> out;
    out.push_back({tabular_policy_value(model(0), initial_policy), initial_policy});
    for (int k = 1; k <= config.max_iterations; ++k) {
        const TabularMDP& mdp = model(static_cast<std::size_t>(k));
        const TabularIterate& prev = out.back();
        std::vector<int> policy = greedy_policy(mdp, prev.V, &prev.policy);
        Vec V = tabular_policy_value(mdp, policy);
        const bool same_policy = policy == prev.policy;
        const double change = (V - prev.V).cwiseAbs().maxCoeff();
        out.push_back({std::move(V), std::move(policy)});
        if (same_policy && change <= config.tolerance &&
            static_cast<std::size_t>(k) >= schedule.size() - 1) {
            return out;
        }
    }
    throw NumericError("exact_policy_iteration: no convergence within the iteration cap");
}

}  // namespace mixrl

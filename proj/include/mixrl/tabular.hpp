#pragma once

#include <vector>

#include "mixrl/envsim.hpp"

namespace mixrl {

struct TabularIterate {
    Vec V;
    std::vector<int> policy;
};

struct ExactPiConfig {
    double tolerance = 1e-10;
    int max_iterations = 1000;
};

/// Exact value of a deterministic policy: solves (I - gamma P_pi) V = l_pi.
Vec tabular_policy_value(const TabularMDP& mdp, const std::vector<int>& policy);

/// Greedy policy w.r.t. V. Ties keep `current` when given, otherwise the
/// lowest action index wins.
std::vector<int> greedy_policy(const TabularMDP& mdp, const Vec& V,
                               const std::vector<int>* current = nullptr);

/// Policy iteration with exact evaluation where iteration k uses the mixed
/// model schedule[min(k, size - 1)]. The result starts with the evaluation of
/// the initial policy (all zeros when empty) and ends at the first iterate
/// whose value moved by at most `tolerance` with an unchanged policy once the
/// schedule is exhausted.
std::vector<TabularIterate> exact_policy_iteration(const std::vector<TabularMDP>& schedule,
                                                   const ExactPiConfig& config = {},
                                                   std::vector<int> initial_policy = {});

}  // namespace mixrl

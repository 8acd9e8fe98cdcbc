#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mixrl/ibe.hpp"

namespace mixrl {

enum class Suite { fast, full };

const char* to_string(Suite s);
Suite suite_from_string(const std::string& name);

enum class Verdict { pass, fail, skip };

struct CriterionResult {
    int id = 0;
    std::string name;
    Verdict verdict = Verdict::fail;
    std::string detail;
    double seconds = 0.0;
};

using Case1Updater = std::function<GaussianBelief(GaussianBelief, const Vec&)>;

struct AcceptanceOptions {
    Suite suite = Suite::fast;
    std::filesystem::path out_dir = "acceptance_out";
    /// Iterative Case 1 update under test; replaceable for fault injection.
    Case1Updater case1_update = ibe_update_case1;
    /// Criteria to run; empty means all of 1..8.
    std::vector<int> only;
    std::function<void(const std::string&)> log;
};

/// One line: "criterion <id> <PASS|FAIL|SKIP> <name>: <detail> (<seconds> s)".
std::string format_result(const CriterionResult& r);

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

// Individual criteria.
CriterionResult check_ibe_equivalence(const AcceptanceOptions& options);
CriterionResult check_ibe_consistency(const AcceptanceOptions& options);
CriterionResult check_tabular_monotonicity(const AcceptanceOptions& options);
CriterionResult check_gradient_fidelity(const AcceptanceOptions& options);

}  // namespace mixrl

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mixrl/config.hpp"
#include "mixrl/oracles.hpp"
#include "mixrl/vehicle.hpp"

namespace mixrl {

/// The seeded LQ instance described by config.lq with gamma from the trainer.
LQProblem make_lq_problem(const ExperimentConfig& config);

/// LQ or vehicle plant. Throws std::invalid_argument for the tabular case.
std::shared_ptr<const Environment> make_environment(const ExperimentConfig& config);

/// Trainer settings with both architectures sized for the environment.
TrainerConfig build_trainer_config(const ExperimentConfig& config, const Environment& env);

/// Fixed start states of the periodic evaluation.
Mat eval_start_states(const ExperimentConfig& config, const Environment& env);

/// Discounted cost of the actor on the true plant averaged over the columns
/// of `starts`. Returns +inf when any rollout leaves the blow-up bound.
double policy_return(const Environment& env, const ParametricFn& actor, const Mat& starts, int horizon,
                     double gamma, std::uint64_t seed, double blow_up = kBlowUpBound);

struct EvalPoint {
    long k = 0;
    double value = 0.0;
};

/// First evaluation whose cost is within 10% of `best`, i.e. value <= best + 0.1 |best|.
std::optional<long> iterations_to_threshold(const std::vector<EvalPoint>& curve, double best);

/// Smallest finite evaluation cost, or nothing.
std::optional<double> best_return(const std::vector<EvalPoint>& curve);

struct RunSummary {
    std::string id;
    Algorithm algorithm = Algorithm::mixed;
    EnvKind env = EnvKind::lq;
    long iterations = 0;
    std::optional<double> final_eval_return;
    std::optional<double> best_eval_return;
    std::optional<long> iterations_to_threshold;  // against the run's own best
    int mvc_violations = 0;
    int rollbacks = 0;
    // Vehicle: final lane-change drive.
    std::optional<double> mean_abs_position_error;
    std::optional<double> mean_abs_speed_error;
    std::optional<double> dlc_total_cost;
    bool dlc_diverged = false;
    // LQ: element-wise max relative gain error against the optimal gain.
    std::optional<double> gain_error;
    // Tabular: sup-norm distance to the brute-force optimum.
    std::optional<double> value_error;
    std::optional<bool> policy_matches_oracle;
};

struct RunArtifacts {
    std::filesystem::path iteration_csv;
    std::filesystem::path trajectory_csv;
    std::filesystem::path summary_csv;
    std::vector<std::filesystem::path> plots;
};

struct RunResult {
    RunSummary summary;
    RunArtifacts artifacts;
    std::vector<IterationReport> reports;
    std::vector<EvalPoint> curve;
    std::optional<DlcResult> dlc;
    ParametricFn actor;
    ParametricFn critic;
};

using IterationObserver = std::function<void(const Learner&, const IterationReport&)>;

struct RunOptions {
    std::filesystem::path out_dir;  // empty: config.output_dir / config.id
    bool write_files = true;
    bool plots = true;
    IterationObserver observer;
    std::function<void(const std::string&)> log;
};

/// Trains to the iteration cap, evaluates and writes the iteration CSV, the
/// trajectory CSV, the summary and the plots.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

struct ComparisonRow {
    RunSummary summary;
    std::optional<long> iterations_to_threshold;  // against the best of all members
};

struct Comparison {
    double best_return = 0.0;
    std::vector<ComparisonRow> rows;
    std::filesystem::path csv;
    std::vector<std::filesystem::path> plots;
};

/// Runs the members (or takes finished results), aligns the learning curves
/// and writes comparison.csv plus overlay plots. Members must share an
/// environment kind.
Comparison compare_runs(const std::vector<RunResult>& runs, const std::filesystem::path& out_dir,
                        bool write_files = true);
Comparison compare_experiments(const std::vector<ExperimentConfig>& configs,
                               const std::filesystem::path& out_dir, const RunOptions& options = {});

}  // namespace mixrl

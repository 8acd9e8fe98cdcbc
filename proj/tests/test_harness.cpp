#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mixrl/acceptance.hpp"
#include "mixrl/artifacts.hpp"
#include "mixrl/config.hpp"
#include "mixrl/experiment.hpp"

using namespace mixrl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "mixrl_tests" / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Config, PresetsRoundTrip) {
    for (const auto& name : preset_names()) {
        const ExperimentConfig c = preset(name);
        EXPECT_NO_THROW(c.validate()) << name;
        const std::string text = serialize_config(c);
        EXPECT_EQ(serialize_config(parse_config(text)), text) << name;
    }
}

TEST(Config, ShippedFilesMatchPresets) {
    for (const auto& name : preset_names()) {
        const fs::path file = fs::path(MIXRL_SOURCE_DIR) / "configs" / (name + ".cfg");
        ASSERT_TRUE(fs::exists(file)) << file;
        EXPECT_EQ(serialize_config(load_config(file.string())), serialize_config(preset(name))) << name;
    }
}

TEST(Config, RejectsUnknownAndDuplicateKeys) {
    const std::string base = "[experiment]\nid = x\nenv = lq\n";
    try {
        parse_config(base + "bogus = 1\n");
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_config(base + "id = y\n"), std::invalid_argument);
    EXPECT_THROW(parse_config("[nowhere]\nx = 1\n"), std::invalid_argument);
    EXPECT_THROW(parse_config("[trainer]\ngamma = abc\n"), std::invalid_argument);
}

TEST(Config, PartialFileKeepsDefaults) {
    const ExperimentConfig c = parse_config("# comment\n[trainer]\ngamma = 0.5\nseed = 9\n");
    EXPECT_DOUBLE_EQ(c.trainer.gamma, 0.5);
    EXPECT_EQ(c.trainer.seed, 9u);
}

TEST(Config, ValidateCatchesMismatch) {
    ExperimentConfig c = preset("tabular");
    c.trainer.algorithm = Algorithm::mixed;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Config, ActorAverageRange) {
    ExperimentConfig c = preset("lq");
    c.eval.actor_average = 1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.eval.actor_average = 0.05;
    EXPECT_NO_THROW(c.validate());
}

TEST(Csv, NumberFormatting) {
    EXPECT_EQ(csv_number(0.1), "0.10000000000000001");
    EXPECT_EQ(csv_number(NAN), "");
    EXPECT_EQ(csv_number(INFINITY), "");
    EXPECT_EQ(std::stod(csv_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Threshold, FirstWithinTenPercent) {
    const std::vector<EvalPoint> curve = {{0, 50}, {100, 12}, {200, 10.5}, {300, 10}};
    EXPECT_EQ(best_return(curve), 10.0);
    EXPECT_EQ(iterations_to_threshold(curve, 10.0), 200);
    EXPECT_FALSE(iterations_to_threshold(curve, 5.0).has_value());
    EXPECT_FALSE(best_return({}).has_value());
}

TEST(Svg, RendersSeries) {
    Chart c;
    c.title = "t";
    c.log_y = true;
    c.series.push_back({"a", {0, 1, 2}, {1, 10, NAN}});
    const std::string svg = render_svg(c);
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Runs, LqArtifactsAndDeterminism) {
    ExperimentConfig c = preset("lq");
    c.trainer.iterations = 200;
    RunOptions o;
    o.out_dir = scratch("lq_a");
    const RunResult a = run_experiment(c, o);
    o.out_dir = scratch("lq_b");
    const RunResult b = run_experiment(c, o);
    EXPECT_EQ(slurp(a.artifacts.iteration_csv), slurp(b.artifacts.iteration_csv));
    ASSERT_TRUE(a.summary.gain_error.has_value());
    EXPECT_EQ(a.reports.size(), 200u);
    EXPECT_TRUE(fs::exists(a.artifacts.summary_csv));

    const auto curve = read_eval_curve(a.artifacts.iteration_csv);
    ASSERT_FALSE(curve.empty());
    EXPECT_EQ(curve.back().k, 200);
    EXPECT_DOUBLE_EQ(curve.back().value, *a.summary.final_eval_return);

    std::ifstream in(a.artifacts.iteration_csv);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, iteration_csv_header(3));
    EXPECT_EQ(load_config((o.out_dir / "config.cfg").string()).trainer.iterations, 200);
}

TEST(Runs, AveragedActorFollowsPolyakRecursion) {
    ExperimentConfig c = preset("lq");
    c.eval.actor_average = 0.1;
    c.trainer.rate_decay = 1.0;
    c.trainer.explore_end = c.trainer.explore_start;
    c.trainer.iterations = 30;
    RunOptions o;
    o.plots = false;
    o.out_dir = scratch("avg_a");
    const RunResult shorter = run_experiment(c, o);

    c.trainer.iterations = 31;
    Vec raw_last;
    o.out_dir = scratch("avg_b");
    o.observer = [&raw_last](const Learner& l, const IterationReport&) { raw_last = l.actor().params(); };
    const RunResult longer = run_experiment(c, o);

    const Vec expected = shorter.actor.params() + 0.1 * (raw_last - shorter.actor.params());
    EXPECT_LT((longer.actor.params() - expected).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GT((longer.actor.params() - raw_last).norm(), 0.0);
}

TEST(Runs, VehicleSummaryRecomputesFromTrajectory) {
    ExperimentConfig c = preset("vehicle_mixed");
    c.trainer.iterations = 100;
    c.eval.every = 50;
    c.eval.states = 4;
    RunOptions o;
    o.out_dir = scratch("veh");
    const RunResult r = run_experiment(c, o);
    ASSERT_TRUE(fs::exists(r.artifacts.trajectory_csv));
    const auto samples = read_trajectory_csv(r.artifacts.trajectory_csv);
    const auto [lat, spd] = tracking_errors(samples);
    ASSERT_TRUE(r.summary.mean_abs_position_error.has_value());
    EXPECT_DOUBLE_EQ(lat, *r.summary.mean_abs_position_error);
    EXPECT_DOUBLE_EQ(spd, *r.summary.mean_abs_speed_error);
    EXPECT_TRUE(fs::exists(o.out_dir / "fig7_lateral_error.svg"));
}

TEST(Runs, TabularMatchesOracle) {
    RunOptions o;
    o.write_files = false;
    const RunResult r = run_experiment(preset("tabular"), o);
    ASSERT_TRUE(r.summary.value_error.has_value());
    EXPECT_LE(*r.summary.value_error, 1e-8);
    EXPECT_TRUE(r.summary.policy_matches_oracle.value_or(false));
    EXPECT_LE(r.summary.iterations, 5);
}

TEST(Runs, CompareWritesCsv) {
    std::vector<ExperimentConfig> cs;
    for (const char* n : {"vehicle_mixed", "vehicle_model_driven"}) {
        cs.push_back(preset(n));
        cs.back().trainer.iterations = 40;
        cs.back().eval.every = 20;
        cs.back().eval.states = 2;
    }
    const fs::path dir = scratch("cmp");
    const Comparison c = compare_experiments(cs, dir);
    EXPECT_EQ(c.rows.size(), 2u);
    EXPECT_TRUE(fs::exists(c.csv));
}

TEST(Acceptance, FastCriteriaPass) {
    AcceptanceOptions o;
    o.out_dir = scratch("acc");
    o.only = {1, 2, 3, 6};
    for (const auto& r : run_acceptance(o)) EXPECT_EQ(r.verdict, Verdict::pass) << format_result(r);
}

TEST(Acceptance, CorruptedUpdateIsDetected) {
    AcceptanceOptions o;
    o.case1_update = [](GaussianBelief b, const Vec& xi) { return ibe_update_case1(std::move(b), 1.001 * xi); };
    const CriterionResult r = check_ibe_equivalence(o);
    EXPECT_EQ(r.verdict, Verdict::fail);
    EXPECT_EQ(format_result(r).rfind("criterion 1 FAIL", 0), 0u);
}

TEST(Acceptance, VehicleSkippedInFastSuite) {
    AcceptanceOptions o;
    o.out_dir = scratch("acc7");
    o.only = {7};
    const auto rs = run_acceptance(o);
    ASSERT_EQ(rs.size(), 1u);
    EXPECT_EQ(rs[0].verdict, Verdict::skip);
}

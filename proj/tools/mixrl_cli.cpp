#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mixrl/acceptance.hpp"
#include "mixrl/config.hpp"
#include "mixrl/experiment.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

// A name without a path separator or ".cfg" suffix is taken as a preset.
mixrl::ExperimentConfig resolve(const std::string& ref) {
    const bool is_file = ref.find('/') != std::string::npos ||
                         (ref.size() > 4 && ref.compare(ref.size() - 4, 4, ".cfg") == 0);
    return is_file ? mixrl::load_config(ref) : mixrl::preset(ref);
}

std::string out_override(const std::string& flag) {
    if (!flag.empty()) return flag;
    const char* env = std::getenv("MIXRL_OUT");
    return env ? env : "";
}

void log_line(const std::string& m) { std::cerr << m << '\n'; }

void print_summary(const mixrl::RunSummary& s) {
    std::cout << s.id << " (" << mixrl::to_string(s.algorithm) << ", " << s.iterations << " iterations)";
    if (s.final_eval_return) std::cout << " final return " << *s.final_eval_return;
    if (s.mean_abs_position_error) std::cout << ", lateral error " << *s.mean_abs_position_error << " m";
    if (s.mean_abs_speed_error) std::cout << ", speed error " << *s.mean_abs_speed_error << " m/s";
    if (s.gain_error) std::cout << ", gain error " << *s.gain_error;
    if (s.value_error) std::cout << ", value error " << *s.value_error;
    std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed-model reinforcement learning experiments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "train one configuration");
    std::string config_ref;
    std::optional<unsigned long long> seed;
    std::optional<int> iterations;
    std::string out;
    bool no_plots = false;
    run->add_option("-c,--config", config_ref, "config file or preset name")->required();
    run->add_option("--seed", seed, "override trainer.seed");
    run->add_option("--iterations", iterations, "override trainer.iterations");
    run->add_option("-o,--out", out, "output directory (default MIXRL_OUT or the config's)");
    run->add_flag("--no-plots", no_plots, "skip SVG figures");

    auto* cmp = app.add_subcommand("compare", "train several configurations and compare them");
    std::vector<std::string> refs;
    std::string cmp_out;
    cmp->add_option("--configs", refs, "config files or preset names")->delimiter(',')->required();
    cmp->add_option("--seed", seed, "override trainer.seed for every member");
    cmp->add_option("--iterations", iterations, "override trainer.iterations for every member");
    cmp->add_option("-o,--out", cmp_out, "output directory")->required();

    auto* check = app.add_subcommand("check", "run the acceptance criteria");
    std::string suite = "fast";
    std::string check_out = "acceptance_out";
    std::vector<int> only;
    check->add_option("--suite", suite, "fast or full")->check(CLI::IsMember({"fast", "full"}));
    check->add_option("-o,--out", check_out, "artifact directory");
    check->add_option("--only", only, "criterion ids");

    auto* presets = app.add_subcommand("preset", "print a preset configuration");
    std::string preset_name;
    presets->add_option("name", preset_name, "preset name (omit to list)");

    app.add_subcommand("version", "print the version");

    CLI11_PARSE(app, argc, argv);

    try {
        auto apply = [&](mixrl::ExperimentConfig& cfg) {
            if (seed) cfg.trainer.seed = *seed;
            if (iterations) cfg.trainer.iterations = *iterations;
        };
        if (*run) {
            mixrl::ExperimentConfig cfg = resolve(config_ref);
            apply(cfg);
            mixrl::RunOptions ro;
            const std::string dir = out_override(out);
            if (!dir.empty()) ro.out_dir = dir;
            ro.plots = !no_plots;
            ro.log = log_line;
            const mixrl::RunResult r = mixrl::run_experiment(cfg, ro);
            print_summary(r.summary);
            return 0;
        }
        if (*cmp) {
            std::vector<mixrl::ExperimentConfig> cfgs;
            for (const auto& r : refs) {
                cfgs.push_back(resolve(r));
                apply(cfgs.back());
            }
            mixrl::RunOptions ro;
            ro.log = log_line;
            const auto c = mixrl::compare_experiments(cfgs, out_override(cmp_out), ro);
            for (const auto& row : c.rows) {
                print_summary(row.summary);
                std::cout << "  iterations to threshold: ";
                if (row.iterations_to_threshold) {
                    std::cout << *row.iterations_to_threshold << '\n';
                } else {
                    std::cout << "not reached\n";
                }
            }
            std::cout << "comparison written to " << c.csv.string() << '\n';
            return 0;
        }
        if (*check) {
            mixrl::AcceptanceOptions opts;
            opts.suite = mixrl::suite_from_string(suite);
            opts.out_dir = check_out;
            opts.only = only;
            opts.log = log_line;
            int failures = 0;
            for (const auto& r : mixrl::run_acceptance(opts)) {
                std::cout << mixrl::format_result(r) << std::endl;
                failures += r.verdict == mixrl::Verdict::fail;
            }
            return failures == 0 ? 0 : 1;
        }
        if (*presets) {
            if (preset_name.empty()) {
                for (const auto& n : mixrl::preset_names()) std::cout << n << '\n';
            } else {
                std::cout << mixrl::serialize_config(mixrl::preset(preset_name));
            }
            return 0;
        }
        std::cout << "mixrl " << kVersion << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

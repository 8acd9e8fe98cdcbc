#include "mixrl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SVD>

#include "mixrl/artifacts.hpp"
#include "mixrl/tabular.hpp"

namespace mixrl {

LQProblem make_lq_problem(const ExperimentConfig& config) {
    const LqSpec& s = config.lq;
    RngStream rng(s.generator_seed);
    const int n = s.state_dim;
    const int m = s.action_dim;
    Mat A(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) A(i, j) = rng.uniform(-1.0, 1.0);
    }
    A *= s.a_norm / Eigen::JacobiSVD<Mat>(A).singularValues()(0);
    Mat B(n, m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) B(i, j) = rng.uniform(-1.0, 1.0);
    }
    LQProblem p;
    p.A = A;
    p.B = B;
    p.Q = s.q_weight * Mat::Identity(n, n);
    p.R = s.r_weight * Mat::Identity(m, m);
    p.gamma = config.trainer.gamma;
    p.noise = Gaussian(s.noise_mean, s.noise_std * s.noise_std * Mat::Identity(n, n));
    return p;
}

std::shared_ptr<const Environment> make_environment(const ExperimentConfig& config) {
    switch (config.env) {
        case EnvKind::lq: {
            const LQProblem p = make_lq_problem(config);
            return std::make_shared<LinearEnv>(p.A, p.B, p.Q, p.R, p.noise,
                                               ActionBounds::symmetric(p.action_dim(), config.lq.action_limit),
                                               Vec::Constant(p.state_dim(), config.lq.init_std));
        }
        case EnvKind::vehicle:
            return std::make_shared<VehicleEnv>(config.vehicle);
        case EnvKind::tabular:
            break;
    }
    throw std::invalid_argument("make_environment: the tabular experiment has no continuous plant");
}

namespace {

Architecture architecture(const NetSpec& spec, int input_dim, int output_dim, const Environment& env) {
    Architecture a;
    a.kind = spec.kind;
    a.input_dim = input_dim;
    a.hidden = spec.hidden;
    a.output_dim = output_dim;
    a.input_scale = spec.input_scale;
    a.output_scale = spec.output_scale;
    if (spec.squash) a.squash = env.bounds();
    return a;
}

}  // namespace

TrainerConfig build_trainer_config(const ExperimentConfig& config, const Environment& env) {
    TrainerConfig t = config.trainer;
    const int n = env.state_dim();
    const int m = env.action_dim();
    const int critic_in = t.algorithm == Algorithm::data_driven ? n + m : n;
    t.critic_arch = architecture(config.critic, critic_in, 1, env);
    t.actor_arch = architecture(config.actor, n, m, env);
    t.critic_arch.squash.reset();
    return t;
}

Mat eval_start_states(const ExperimentConfig& config, const Environment& env) {
    RngStream rng(config.eval.seed);
    const GaussianSampler init(env.initial_distribution());
    Mat S(env.state_dim(), config.eval.states);
    for (int i = 0; i < config.eval.states; ++i) S.col(i) = init.sample(rng);
    return S;
}

double policy_return(const Environment& env, const ParametricFn& actor, const Mat& starts, int horizon,
                     double gamma, std::uint64_t seed, double blow_up) {
    RngStream rng(seed);
    const GaussianSampler noise(env.true_noise());
    Mat X = starts;
    const auto count = X.cols();
    double total = 0.0;
    double discount = 1.0;
    for (int t = 0; t < horizon; ++t) {
        const Mat U = actor.forward_batch(X);
        double step = 0.0;
        for (Eigen::Index i = 0; i < count; ++i) {
            const Vec u = env.bounds().clip(U.col(i));
            Vec next = env.f(X.col(i), u) + noise.sample(rng);
            if (!next.allFinite() || next.cwiseAbs().maxCoeff() > blow_up) {
                return std::numeric_limits<double>::infinity();
            }
            step += env.utility(next, u);
            X.col(i) = next;
        }
        total += discount * step / static_cast<double>(count);
        discount *= gamma;
    }
    return total;
}

std::optional<double> best_return(const std::vector<EvalPoint>& curve) {
    std::optional<double> best;
    for (const auto& p : curve) {
        if (std::isfinite(p.value) && (!best || p.value < *best)) best = p.value;
    }
    return best;
}

std::optional<long> iterations_to_threshold(const std::vector<EvalPoint>& curve, double best) {
    const double threshold = best + 0.1 * std::abs(best);
    for (const auto& p : curve) {
        if (std::isfinite(p.value) && p.value <= threshold) return p.k;
    }
    return std::nullopt;
}

namespace {

double gain_error(const Mat& learned, const Mat& reference) {
    return ((learned - reference).array().abs() / reference.array().abs()).maxCoeff();
}

// Linear actor u = W x + b with W stored row-major first.
Mat linear_actor_gain(const ParametricFn& actor, int n, int m) {
    Mat W(m, n);
    const Vec& p = actor.params();
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) W(i, j) = p[i * n + j];
    }
    return -W;
}

RunResult run_tabular(const ExperimentConfig& config) {
    RngStream rng(config.tabular.generator_seed);
    const TabularMDP mdp = random_mdp(config.tabular.states, config.tabular.actions, config.trainer.gamma, rng);
    ExactPiConfig pc;
    pc.tolerance = config.tabular.tolerance;
    pc.max_iterations = config.tabular.max_iterations;
    const auto iterates = exact_policy_iteration({mdp}, pc);
    const TabularSolution oracle = tabular_brute_force(mdp);

    RunResult out;
    for (std::size_t k = 1; k < iterates.size(); ++k) {
        IterationReport r;
        r.k = static_cast<long>(k);
        r.critic_loss = (iterates[k].V - iterates[k - 1].V).cwiseAbs().maxCoeff();
        r.actor_obj = iterates[k].V.mean();
        r.eval_return = iterates[k].V.mean();
        out.reports.push_back(r);
        out.curve.push_back({r.k, *r.eval_return});
    }
    RunSummary& s = out.summary;
    s.iterations = static_cast<long>(out.reports.size());
    s.value_error = (iterates.back().V - oracle.V).cwiseAbs().maxCoeff();
    s.policy_matches_oracle = iterates.back().policy == oracle.policy;
    if (!out.curve.empty()) s.final_eval_return = out.curve.back().value;
    return out;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    auto log = [&](const std::string& msg) {
        if (options.log) options.log(msg);
    };
    RunResult out;
    int state_dim = 0;
    std::shared_ptr<const Environment> env;

    if (config.env == EnvKind::tabular) {
        out = run_tabular(config);
        state_dim = 0;
    } else {
        env = make_environment(config);
        state_dim = env->state_dim();
        const TrainerConfig tc = build_trainer_config(config, *env);
        std::unique_ptr<Learner> learner = make_learner(env, tc);
        const Mat starts = eval_start_states(config, *env);
        out.reports.reserve(static_cast<std::size_t>(tc.iterations));
        const double w = config.eval.actor_average;
        std::optional<ParametricFn> averaged;
        if (w > 0.0) averaged = learner->actor();
        for (long k = 1; k <= tc.iterations; ++k) {
            IterationReport r = learner->iterate();
            if (averaged) averaged->mutable_params() += w * (learner->actor().params() - averaged->params());
            const ParametricFn& evaluated = averaged ? *averaged : learner->actor();
            if (config.eval.every > 0 && (k % config.eval.every == 0 || k == tc.iterations)) {
                const double v = policy_return(*env, evaluated, starts, config.eval.horizon, tc.gamma,
                                               config.eval.seed + 1, tc.blow_up);
                r.eval_return = v;
                out.curve.push_back({k, v});
                log(config.id + " k=" + std::to_string(k) + " eval=" + csv_number(v));
            }
            if (options.observer) options.observer(*learner, r);
            out.summary.mvc_violations += r.mvc_satisfied ? 0 : 1;
            out.summary.rollbacks += r.rollbacks;
            out.reports.push_back(std::move(r));
        }
        out.actor = averaged ? *averaged : learner->actor();
        out.critic = learner->critic();
        out.summary.iterations = tc.iterations;
        if (!out.curve.empty()) out.summary.final_eval_return = out.curve.back().value;

        if (config.env == EnvKind::vehicle) {
            RngStream rng(config.eval.dlc_seed);
            const ParametricFn& actor = out.actor;
            DlcResult dlc = simulate_dlc(config.vehicle, reference_path_dlc(config.path),
                                         [&actor](const Vec& x) { return actor.forward(x); }, rng);
            const auto [lat, spd] = tracking_errors(dlc.samples);
            out.summary.mean_abs_position_error = lat;
            out.summary.mean_abs_speed_error = spd;
            out.summary.dlc_total_cost = dlc.total_cost;
            out.summary.dlc_diverged = dlc.diverged;
            out.dlc = std::move(dlc);
        } else if (config.trainer.algorithm != Algorithm::data_driven && config.actor.kind == FnKind::linear) {
            const LQProblem p = make_lq_problem(config);
            const AffinePolicy opt = optimal_affine_policy(p);
            out.summary.gain_error =
                gain_error(linear_actor_gain(out.actor, p.state_dim(), p.action_dim()), opt.gain);
        }
    }

    RunSummary& s = out.summary;
    s.id = config.id;
    s.algorithm = config.trainer.algorithm;
    s.env = config.env;
    s.best_eval_return = best_return(out.curve);
    if (s.best_eval_return) s.iterations_to_threshold = iterations_to_threshold(out.curve, *s.best_eval_return);

    if (options.write_files) {
        const std::filesystem::path dir =
            options.out_dir.empty() ? std::filesystem::path(config.output_dir) / config.id : options.out_dir;
        std::filesystem::create_directories(dir);
        out.artifacts.iteration_csv = dir / "iterations.csv";
        write_iteration_csv(out.artifacts.iteration_csv, out.reports, state_dim);
        if (out.dlc) {
            out.artifacts.trajectory_csv = dir / "trajectory.csv";
            write_trajectory_csv(out.artifacts.trajectory_csv, out.dlc->samples);
        }
        out.artifacts.summary_csv = dir / "summary.csv";
        write_summary_csv(out.artifacts.summary_csv, s);
        write_text(dir / "config.cfg", serialize_config(config));
        if (options.plots) out.artifacts.plots = write_figures(dir, {&out});
    }
    if (config.strict && (s.dlc_diverged || (s.final_eval_return && !std::isfinite(*s.final_eval_return)))) {
        throw NumericError("run '" + config.id + "' diverged (strict mode)");
    }
    return out;
}

Comparison compare_runs(const std::vector<RunResult>& runs, const std::filesystem::path& out_dir,
                        bool write_files) {
    if (runs.size() < 2) throw std::invalid_argument("compare: need at least two runs");
    for (const auto& r : runs) {
        if (r.summary.env != runs.front().summary.env) {
            throw std::invalid_argument("compare: members use different environments");
        }
    }
    Comparison c;
    std::optional<double> best;
    for (const auto& r : runs) {
        const auto b = best_return(r.curve);
        if (b && (!best || *b < *best)) best = b;
    }
    c.best_return = best.value_or(std::numeric_limits<double>::quiet_NaN());
    for (const auto& r : runs) {
        ComparisonRow row{r.summary, std::nullopt};
        if (best) row.iterations_to_threshold = iterations_to_threshold(r.curve, *best);
        c.rows.push_back(std::move(row));
    }
    if (write_files) {
        std::filesystem::create_directories(out_dir);
        std::string t =
            "id,algorithm,iterations,final_eval_return,best_eval_return,iterations_to_threshold,"
            "mean_abs_position_error,mean_abs_speed_error,dlc_diverged\n";
        auto opt = [](const std::optional<double>& v) { return v ? csv_number(*v) : std::string(); };
        for (const auto& row : c.rows) {
            const RunSummary& s = row.summary;
            t += s.id + "," + to_string(s.algorithm) + "," + std::to_string(s.iterations) + "," +
                 opt(s.final_eval_return) + "," + opt(s.best_eval_return) + "," +
                 (row.iterations_to_threshold ? std::to_string(*row.iterations_to_threshold) : "") + "," +
                 opt(s.mean_abs_position_error) + "," + opt(s.mean_abs_speed_error) + "," +
                 (s.dlc_diverged ? "1" : "0") + "\n";
        }
        c.csv = out_dir / "comparison.csv";
        write_text(c.csv, t);
        std::vector<const RunResult*> ptrs;
        for (const auto& r : runs) ptrs.push_back(&r);
        c.plots = write_figures(out_dir, ptrs);
    }
    return c;
}

Comparison compare_experiments(const std::vector<ExperimentConfig>& configs, const std::filesystem::path& out_dir,
                               const RunOptions& options) {
    std::vector<RunResult> runs;
    for (const auto& cfg : configs) {
        RunOptions o = options;
        o.out_dir = out_dir / cfg.id;
        runs.push_back(run_experiment(cfg, o));
    }
    return compare_runs(runs, out_dir, options.write_files);
}

}  // namespace mixrl

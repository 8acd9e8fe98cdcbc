#include "mixrl/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mixrl/artifacts.hpp"
#include "mixrl/baselines.hpp"
#include "mixrl/config.hpp"
#include "mixrl/experiment.hpp"
#include "mixrl/oracles.hpp"
#include "mixrl/tabular.hpp"

namespace mixrl {

const char* to_string(Suite s) { return s == Suite::fast ? "fast" : "full"; }

Suite suite_from_string(const std::string& name) {
    if (name == "fast") return Suite::fast;
    if (name == "full") return Suite::full;
    throw std::invalid_argument("suite must be fast or full");
}

std::string format_result(const CriterionResult& r) {
    const char* v = r.verdict == Verdict::pass ? "PASS" : r.verdict == Verdict::fail ? "FAIL" : "SKIP";
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.1f", r.seconds);
    return "criterion " + std::to_string(r.id) + " " + v + " " + r.name + ": " + r.detail + " (" + secs + " s)";
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

Mat random_spd(int n, double scale, RngStream& rng) {
    Mat G(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) G(i, j) = rng.normal();
    }
    return scale * (G * G.transpose() / n + 0.5 * Mat::Identity(n, n));
}

Vec random_vec(int n, double scale, RngStream& rng) { return scale * rng.normal_vec(n); }

void note(const AcceptanceOptions& o, const std::string& msg) {
    if (o.log) o.log(msg);
}

}  // namespace

// ---------------------------------------------------------------------------
// 1. Iterative vs batch Case 1, closed form vs grid search.

CriterionResult check_ibe_equivalence(const AcceptanceOptions& options) {
    CriterionResult res{1, "ibe_equivalence", Verdict::pass, "", 0.0};
    double worst = 0.0;
    const int dims[] = {1, 3, 5};
    for (int stream = 0; stream < 20; ++stream) {
        RngStream rng = RngStream(1001).substream(static_cast<std::uint64_t>(stream));
        const int n = dims[stream % 3];
        const Vec prior_mu = random_vec(n, 1.0, rng);
        const Mat prior_K = random_spd(n, 0.5, rng);
        const Mat K = random_spd(n, 0.2, rng);
        const Gaussian truth(random_vec(n, 1.0, rng), K);
        const GaussianSampler sampler(truth);
        std::vector<Vec> data;
        data.reserve(1000);
        GaussianBelief belief = make_belief(prior_mu, prior_K, K);
        for (int t = 0; t < 1000; ++t) {
            data.push_back(sampler.sample(rng));
            belief = options.case1_update(std::move(belief), data.back());
            const Vec batch = batch_map_case1(prior_mu, prior_K, K, std::span<const Vec>(data));
            worst = std::max(worst, (belief.mu_hat - batch).cwiseAbs().maxCoeff());
        }
    }
    const bool prefix_ok = worst <= 1e-10;

    double grid_worst = 0.0;
    bool boundary = false;
    for (int inst = 0; inst < 5; ++inst) {
        RngStream rng = RngStream(2002).substream(static_cast<std::uint64_t>(inst));
        const Vec prior_mu = Vec::Constant(1, rng.uniform(-1.0, 1.0));
        const Mat prior_K = Mat::Constant(1, 1, rng.uniform(0.2, 2.0));
        const Mat K = Mat::Constant(1, 1, rng.uniform(0.1, 1.0));
        const double true_mu = rng.uniform(-1.0, 1.0);
        std::vector<Vec> data;
        for (int t = 0; t < 20; ++t) data.push_back(Vec::Constant(1, true_mu + std::sqrt(K(0, 0)) * rng.normal()));
        const Vec closed = batch_map_case1(prior_mu, prior_K, K, data);
        const auto grid = grid_map_search(
            [&](const Vec& mu) { return log_posterior_case1(mu, prior_mu, prior_K, K, data); },
            Vec::Constant(1, -3.0), Vec::Constant(1, 3.0), 1e-3);
        boundary = boundary || grid.on_boundary;
        grid_worst = std::max(grid_worst, std::abs(grid.argmax[0] - closed[0]));
    }
    const bool grid_ok = grid_worst <= 1e-3 && !boundary;
    res.verdict = prefix_ok && grid_ok ? Verdict::pass : Verdict::fail;
    res.detail = "max prefix gap " + fmt(worst) + " (tol 1e-10), grid gap " + fmt(grid_worst) + " (tol 1e-3)";
    return res;
}

// ---------------------------------------------------------------------------
// 2. Case 2 streaming consistency.

CriterionResult check_ibe_consistency(const AcceptanceOptions&) {
    CriterionResult res{2, "ibe_consistency", Verdict::pass, "", 0.0};
    const int n = 3;
    const int N = 10000;
    int ok = 0;
    double worst_mu = 0.0;
    double worst_K = 0.0;
    for (int seed = 0; seed < 10; ++seed) {
        RngStream rng = RngStream(3003).substream(static_cast<std::uint64_t>(seed));
        const Vec mu_star = random_vec(n, 1.0, rng);
        const Mat K_star = random_spd(n, 0.3, rng);
        const GaussianSampler sampler(Gaussian(mu_star, K_star));
        GaussianBelief b = make_belief(Vec::Zero(n), Mat::Identity(n, n));
        for (int t = 0; t < N; ++t) b = ibe_update_case2(std::move(b), sampler.sample(rng));
        const double mu_err = (b.mu_hat - mu_star).norm();
        const double mu_tol = 4.0 * std::sqrt(K_star.trace() / N);
        const double K_err = (b.K_hat - K_star).norm() / K_star.norm();
        worst_mu = std::max(worst_mu, mu_err / mu_tol);
        worst_K = std::max(worst_K, K_err);
        if (mu_err <= mu_tol && K_err <= 0.10) ++ok;
    }
    res.verdict = ok == 10 ? Verdict::pass : Verdict::fail;
    res.detail = std::to_string(ok) + "/10 seeds; worst mean error " + fmt(worst_mu) +
                 " x bound, worst covariance error " + fmt(worst_K) + " (tol 0.1)";
    return res;
}

// ---------------------------------------------------------------------------
// 3. Tabular monotone improvement and fixed point.

CriterionResult check_tabular_monotonicity(const AcceptanceOptions&) {
    CriterionResult res{3, "tabular_monotone_pi", Verdict::pass, "", 0.0};
    double worst_increase = -1e300;
    double worst_gap = 0.0;
    int bad = 0;
    for (int i = 0; i < 50; ++i) {
        RngStream rng = RngStream(4004).substream(static_cast<std::uint64_t>(i));
        const int S = 2 + static_cast<int>(rng.index(11));
        const int A = 2 + static_cast<int>(rng.index(3));
        const TabularMDP mdp = random_mdp(S, A, 0.9, rng);
        const auto it = exact_policy_iteration({mdp});
        bool mono = true;
        for (std::size_t k = 1; k < it.size(); ++k) {
            const double inc = (it[k].V - it[k - 1].V).maxCoeff();
            worst_increase = std::max(worst_increase, inc);
            if (inc > 1e-9) mono = false;
        }
        const TabularSolution oracle = tabular_brute_force(mdp);
        const double gap = (it.back().V - oracle.V).cwiseAbs().maxCoeff();
        worst_gap = std::max(worst_gap, gap);
        if (!mono || gap > 1e-8) ++bad;
    }
    res.verdict = bad == 0 ? Verdict::pass : Verdict::fail;
    res.detail = std::to_string(50 - bad) + "/50 MDPs; largest V increase " + fmt(worst_increase) +
                 ", largest gap to brute force " + fmt(worst_gap);
    return res;
}

// ---------------------------------------------------------------------------
// 6. Analytic gradients vs central differences.

namespace {

double rel_gap(const Vec& analytic, const Vec& numeric) {
    return (analytic - numeric).norm() / std::max(numeric.norm(), 1e-8);
}

template <class F>
Vec central_diff(const Vec& p, F&& f, double h) {
    Vec g(p.size());
    Vec q = p;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double orig = q[i];
        const double step = h * std::max(1.0, std::abs(orig));
        q[i] = orig + step;
        const double fp = f(q);
        q[i] = orig - step;
        const double fm = f(q);
        q[i] = orig;
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

struct GradCase {
    std::shared_ptr<const Environment> env;
    ParametricFn critic;
    ParametricFn actor;
    Mat X;
    QuadratureRule rule;
    double gamma;
};

GradCase make_grad_case(int i) {
    RngStream rng = RngStream(6006).substream(static_cast<std::uint64_t>(i));
    GradCase c;
    c.gamma = 0.95;
    ExperimentConfig cfg = preset(i % 2 == 0 ? "lq" : "vehicle_mixed");
    c.env = make_environment(cfg);
    TrainerConfig tc = build_trainer_config(cfg, *c.env);
    if (i % 2 == 1) {
        tc.critic_arch.hidden = {8, 8};
        tc.actor_arch.hidden = {8, 8};
        tc.critic_arch.output_scale = 1.0;
    }
    c.critic = ParametricFn::initialized(tc.critic_arch, rng);
    c.actor = ParametricFn::initialized(tc.actor_arch, rng);
    if (i % 2 == 0) {
        c.critic.mutable_params() = 0.3 * rng.normal_vec(c.critic.param_count());
        c.actor.mutable_params() = 0.3 * rng.normal_vec(c.actor.param_count());
    }
    const GaussianSampler init(c.env->initial_distribution());
    c.X.resize(c.env->state_dim(), 6);
    for (int b = 0; b < 6; ++b) c.X.col(b) = init.sample(rng);
    const Gaussian noise = c.env->true_noise();
    const Gaussian wide(noise.mean, noise.cov + 1e-6 * Mat::Identity(noise.dim(), noise.dim()));
    c.rule = without_zero_weights(quadrature_rule(wide, Quadrature::sigma_point(), rng));
    return c;
}

}  // namespace

CriterionResult check_gradient_fidelity(const AcceptanceOptions&) {
    CriterionResult res{6, "gradient_fidelity", Verdict::pass, "", 0.0};
    const double tol = 1e-4;
    double worst_critic = 0.0, worst_actor = 0.0, worst_params = 0.0, worst_input = 0.0;

    for (int i = 0; i < 20; ++i) {
        GradCase c = make_grad_case(i);
        const Environment& env = *c.env;
        // Critic semi-gradient with the target frozen at the current weights.
        const GradientResult g = critic_semi_gradient(env, c.critic, c.actor, c.X, c.rule, c.gamma);
        const Mat U = c.actor.forward_batch(c.X);
        const Vec target = h_values(env, c.X, U, c.rule, c.critic, c.gamma);
        ParametricFn probe = c.critic;
        const Vec num_c = central_diff(
            c.critic.params(),
            [&](const Vec& w) {
                probe.set_params(w);
                const Vec d = probe.forward_batch(c.X).row(0).transpose() - target;
                return 0.5 * d.squaredNorm() / static_cast<double>(d.size());
            },
            1e-6);
        worst_critic = std::max(worst_critic, rel_gap(g.grad, num_c));

        // Actor gradient of the mixed-model objective.
        const GradientResult ga = actor_gradient(env, c.actor, c.critic, c.X, c.rule, c.gamma);
        ParametricFn pa = c.actor;
        const Vec num_a = central_diff(
            c.actor.params(),
            [&](const Vec& th) {
                pa.set_params(th);
                return h_values(env, c.X, pa.forward_batch(c.X), c.rule, c.critic, c.gamma).mean();
            },
            1e-6);
        worst_actor = std::max(worst_actor, rel_gap(ga.grad, num_a));
    }

    // Network gradients across all approximator kinds.
    for (int i = 0; i < 20; ++i) {
        RngStream rng = RngStream(6007).substream(static_cast<std::uint64_t>(i));
        Architecture a;
        a.input_dim = 2 + i % 4;
        switch (i % 4) {
            case 0:
                a.kind = FnKind::mlp;
                a.hidden = {7, 5};
                a.output_dim = 2;
                a.squash = ActionBounds{Vec::Constant(2, -0.5), Vec::Constant(2, 2.0)};
                break;
            case 1:
                a.kind = FnKind::mlp;
                a.hidden = {6};
                a.output_dim = 1;
                a.output_scale = 3.0;
                break;
            case 2:
                a.kind = FnKind::quadratic;
                a.output_dim = 1;
                break;
            default:
                a.kind = FnKind::linear;
                a.output_dim = 3;
                break;
        }
        a.input_scale = (rng.normal_vec(a.input_dim).array().abs() + 0.5).matrix();
        ParametricFn fn = ParametricFn::initialized(a, rng);
        fn.mutable_params() += 0.2 * rng.normal_vec(fn.param_count());
        Mat X(a.input_dim, 4);
        for (int b = 0; b < 4; ++b) X.col(b) = rng.normal_vec(a.input_dim);
        Mat up(a.output_dim, 4);
        for (int b = 0; b < 4; ++b) up.col(b) = rng.normal_vec(a.output_dim);

        const Vec gp = fn.grad_params_batch(X, up);
        ParametricFn probe = fn;
        const Vec num_p = central_diff(
            fn.params(),
            [&](const Vec& w) {
                probe.set_params(w);
                return (probe.forward_batch(X).array() * up.array()).sum();
            },
            1e-6);
        worst_params = std::max(worst_params, rel_gap(gp, num_p));

        const Mat gi = fn.grad_input_batch(X, up);
        for (int b = 0; b < 4; ++b) {
            const Vec num_i = central_diff(
                X.col(b), [&](const Vec& x) { return fn.forward(x).dot(up.col(b)); }, 1e-6);
            worst_input = std::max(worst_input, rel_gap(gi.col(b), num_i));
        }
    }
    const double worst = std::max({worst_critic, worst_actor, worst_params, worst_input});
    res.verdict = worst <= tol ? Verdict::pass : Verdict::fail;
    res.detail = "relative gaps: critic " + fmt(worst_critic) + ", actor " + fmt(worst_actor) + ", params " +
                 fmt(worst_params) + ", inputs " + fmt(worst_input) + " (tol 1e-4)";
    return res;
}

// ---------------------------------------------------------------------------
// Training-based criteria share runs through this cache.

namespace {

std::string file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct LqRun {
    RunResult result;
    double monotone_fraction = 0.0;
};

LqRun run_lq(const AcceptanceOptions& options, const std::string& tag) {
    ExperimentConfig cfg = preset("lq");
    cfg.id = "lq_" + tag;
    RunOptions ro;
    ro.out_dir = options.out_dir / cfg.id;
    ro.log = options.log;
    long ok = 0, total = 0;
    Vec prev;
    ro.observer = [&](const Learner& learner, const IterationReport& r) {
        const auto* gpi = dynamic_cast<const GpiTrainer*>(&learner);
        if (!gpi) return;
        const Vec V = learner.critic().forward_batch(gpi->probes().states).row(0).transpose();
        if (r.k > 20 && prev.size() == V.size()) {
            for (Eigen::Index i = 0; i < V.size(); ++i) {
                ++total;
                if (V[i] <= prev[i] + 1e-3 * prev[i] + 1e-6) ++ok;
            }
        }
        prev = V;
    };
    LqRun out;
    out.result = run_experiment(cfg, ro);
    out.monotone_fraction = total ? static_cast<double>(ok) / static_cast<double>(total) : 0.0;
    return out;
}

std::vector<double> window_frequencies(const std::vector<IterationReport>& reports, std::size_t w) {
    std::vector<double> out;
    for (std::size_t s = 0; s + w <= reports.size(); s += w) {
        int sat = 0;
        for (std::size_t i = s; i < s + w; ++i) sat += reports[i].mvc_satisfied ? 1 : 0;
        out.push_back(static_cast<double>(sat) / static_cast<double>(w));
    }
    return out;
}

ExperimentConfig vehicle_config(Algorithm a, int seed, long iterations) {
    ExperimentConfig cfg = preset(std::string("vehicle_") + to_string(a));
    cfg.trainer.seed = static_cast<std::uint64_t>(seed);
    if (iterations > 0) cfg.trainer.iterations = static_cast<int>(iterations);
    cfg.id = std::string("vehicle_") + to_string(a) + "_s" + std::to_string(seed);
    return cfg;
}

const Algorithm kVehicleMethods[] = {Algorithm::mixed, Algorithm::model_driven, Algorithm::data_driven};

struct Cache {
    std::optional<LqRun> lq;
    // seed -> method index -> run
    std::map<int, std::vector<RunResult>> vehicle;
};

std::vector<RunResult>& vehicle_seed(Cache& cache, const AcceptanceOptions& options, int seed) {
    auto it = cache.vehicle.find(seed);
    if (it != cache.vehicle.end()) return it->second;
    std::vector<RunResult> runs;
    for (Algorithm a : kVehicleMethods) {
        const ExperimentConfig cfg = vehicle_config(a, seed, 0);
        RunOptions ro;
        ro.out_dir = options.out_dir / "vehicle" / cfg.id;
        note(options, "training " + cfg.id);
        runs.push_back(run_experiment(cfg, ro));
        const RunSummary& s = runs.back().summary;
        note(options, cfg.id + ": position error " + fmt(s.mean_abs_position_error.value_or(NAN)) +
                          " m, speed error " + fmt(s.mean_abs_speed_error.value_or(NAN)) + " m/s");
    }
    compare_runs(runs, options.out_dir / "vehicle" / ("compare_s" + std::to_string(seed)));
    return cache.vehicle.emplace(seed, std::move(runs)).first->second;
}

CriterionResult check_lq(const AcceptanceOptions& options, Cache& cache) {
    CriterionResult res{4, "lq_oracle_convergence", Verdict::pass, "", 0.0};
    if (!cache.lq) cache.lq = run_lq(options, "a");
    const LqRun& r = *cache.lq;
    const double err = r.result.summary.gain_error.value_or(INFINITY);
    const bool ok = err <= 0.05 && r.monotone_fraction >= 0.95;
    res.verdict = ok ? Verdict::pass : Verdict::fail;
    res.detail = "gain error " + fmt(err) + " (tol 0.05), nonincreasing fraction " + fmt(r.monotone_fraction) +
                 " (min 0.95)";
    return res;
}

CriterionResult check_mvc(const AcceptanceOptions& options, Cache& cache) {
    CriterionResult res{5, "mvc_satisfaction", Verdict::pass, "", 0.0};
    if (!cache.lq) cache.lq = run_lq(options, "a");
    const auto freq = window_frequencies(cache.lq->result.reports, 50);
    bool nondecreasing = true;
    for (std::size_t i = 1; i < freq.size(); ++i) nondecreasing = nondecreasing && freq[i] >= freq[i - 1];
    const bool final_one = !freq.empty() && freq.back() == 1.0;
    double lowest = 1.0;
    for (double f : freq) lowest = std::min(lowest, f);
    res.verdict = nondecreasing && final_one ? Verdict::pass : Verdict::fail;
    res.detail = std::to_string(freq.size()) + " windows of 50, nondecreasing " +
                 (nondecreasing ? "yes" : "no") + ", lowest " + fmt(lowest) + ", final " +
                 fmt(freq.empty() ? 0.0 : freq.back());
    return res;
}

CriterionResult check_vehicle(const AcceptanceOptions& options, Cache& cache) {
    CriterionResult res{7, "vehicle_benchmark", Verdict::pass, "", 0.0};
    if (options.suite == Suite::fast) {
        res.verdict = Verdict::skip;
        res.detail = "full suite only (5 seeds x 3 methods x 2e4 iterations)";
        return res;
    }
    int a_ok = 0, b_ok = 0, c_ok = 0, d_ok = 0;
    std::string per_seed;
    for (int seed = 1; seed <= 5; ++seed) {
        const auto& runs = vehicle_seed(cache, options, seed);
        const RunSummary& mx = runs[0].summary;
        const RunSummary& md = runs[1].summary;
        const RunSummary& dd = runs[2].summary;
        auto err = [](const std::optional<double>& v, bool diverged) {
            return diverged || !v ? INFINITY : *v;
        };
        const double p0 = err(mx.mean_abs_position_error, mx.dlc_diverged);
        const double p1 = err(md.mean_abs_position_error, md.dlc_diverged);
        const double p2 = err(dd.mean_abs_position_error, dd.dlc_diverged);
        const double s0 = err(mx.mean_abs_speed_error, mx.dlc_diverged);
        const double s1 = err(md.mean_abs_speed_error, md.dlc_diverged);
        const double s2 = err(dd.mean_abs_speed_error, dd.dlc_diverged);
        const bool a = p0 < p1 && p1 < p2;
        const bool b = s0 < s1 && s1 < s2;
        const bool c = p0 >= 0.05 && p0 <= 0.30 && s0 >= 0.005 && s0 <= 0.06;

        const Comparison cmp = compare_runs(runs, {}, false);
        const auto& t_mixed = cmp.rows[0].iterations_to_threshold;
        const auto& t_data = cmp.rows[2].iterations_to_threshold;
        const double budget = static_cast<double>(dd.iterations);
        double ratio = 0.0;
        std::string ratio_note;
        if (t_mixed) {
            ratio = (t_data ? static_cast<double>(*t_data) : budget) / static_cast<double>(*t_mixed);
            ratio_note = t_data ? fmt(ratio) : ">=" + fmt(ratio);
        } else {
            ratio_note = "mixed never reached";
        }
        const bool d = t_mixed && ratio >= 3.0;
        a_ok += a;
        b_ok += b;
        c_ok += c;
        d_ok += d;
        per_seed += "; s" + std::to_string(seed) + " pos " + fmt(p0) + "/" + fmt(p1) + "/" + fmt(p2) + " spd " +
                    fmt(s0) + "/" + fmt(s1) + "/" + fmt(s2) + " ratio " + ratio_note;
    }
    const bool ok = a_ok >= 4 && b_ok >= 4 && c_ok >= 4 && d_ok >= 4;
    res.verdict = ok ? Verdict::pass : Verdict::fail;
    res.detail = "seeds passing (a) " + std::to_string(a_ok) + "/5, (b) " + std::to_string(b_ok) + "/5, (c) " +
                 std::to_string(c_ok) + "/5, (d) " + std::to_string(d_ok) + "/5" + per_seed;
    return res;
}

CriterionResult check_determinism(const AcceptanceOptions& options, Cache& cache) {
    CriterionResult res{8, "determinism", Verdict::pass, "", 0.0};
    if (!cache.lq) cache.lq = run_lq(options, "a");
    const LqRun rerun = run_lq(options, "b");
    int same = 0, total = 1;
    same += file_bytes(cache.lq->result.artifacts.iteration_csv) == file_bytes(rerun.result.artifacts.iteration_csv);

    if (options.suite == Suite::full) {
        const auto& first = vehicle_seed(cache, options, 1);
        for (std::size_t m = 0; m < first.size(); ++m) {
            ExperimentConfig cfg = vehicle_config(kVehicleMethods[m], 1, 0);
            RunOptions ro;
            ro.out_dir = options.out_dir / "vehicle_rerun" / cfg.id;
            ro.plots = false;
            note(options, "re-training " + cfg.id);
            const RunResult again = run_experiment(cfg, ro);
            ++total;
            same += file_bytes(first[m].artifacts.iteration_csv) == file_bytes(again.artifacts.iteration_csv);
        }
        res.detail = std::to_string(same) + "/" + std::to_string(total) +
                     " iteration CSVs byte-identical (LQ run, vehicle seed 1 for all three methods)";
    } else {
        for (Algorithm a : kVehicleMethods) {
            std::string bytes[2];
            for (int rep = 0; rep < 2; ++rep) {
                ExperimentConfig cfg = vehicle_config(a, 1, 400);
                cfg.eval.every = 100;
                RunOptions ro;
                ro.out_dir = options.out_dir / ("vehicle_short_" + std::to_string(rep)) / cfg.id;
                ro.plots = false;
                bytes[rep] = file_bytes(run_experiment(cfg, ro).artifacts.iteration_csv);
            }
            ++total;
            same += !bytes[0].empty() && bytes[0] == bytes[1];
        }
        res.detail = std::to_string(same) + "/" + std::to_string(total) +
                     " iteration CSVs byte-identical (LQ run, 400-iteration vehicle runs for all three methods)";
    }
    res.verdict = same == total ? Verdict::pass : Verdict::fail;
    return res;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
    std::filesystem::create_directories(options.out_dir);
    Cache cache;
    std::vector<CriterionResult> out;
    auto wanted = [&](int id) {
        return options.only.empty() || std::find(options.only.begin(), options.only.end(), id) != options.only.end();
    };
    using Fn = std::function<CriterionResult()>;
    const std::pair<int, Fn> table[] = {
        {1, [&] { return check_ibe_equivalence(options); }},
        {2, [&] { return check_ibe_consistency(options); }},
        {3, [&] { return check_tabular_monotonicity(options); }},
        {4, [&] { return check_lq(options, cache); }},
        {5, [&] { return check_mvc(options, cache); }},
        {6, [&] { return check_gradient_fidelity(options); }},
        {7, [&] { return check_vehicle(options, cache); }},
        {8, [&] { return check_determinism(options, cache); }},
    };
    for (const auto& [id, fn] : table) {
        if (!wanted(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = fn();
        } catch (const std::exception& e) {
            r.id = id;
            r.name = "criterion_" + std::to_string(id);
            r.verdict = Verdict::fail;
            r.detail = std::string("exception: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        note(options, format_result(r));
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace mixrl

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mixrl/envsim.hpp"
#include "mixrl/funcapprox.hpp"
#include "mixrl/ibe.hpp"
#include "mixrl/numkit.hpp"

namespace mixrl {

/// Deterministic dynamics of an environment paired with the current belief
/// about the additive disturbance: x' = f(x, u) + xi, xi ~ N(mu_hat, K_hat).
struct MixedModel {
    const Environment* env = nullptr;
    GaussianBelief belief;

    Gaussian disturbance() const { return belief.distribution(); }
    /// Quadrature nodes of the disturbance. Zero-weight nodes are dropped and
    /// nodes that coincide to 1e-9 are merged.
    QuadratureRule rule(const Quadrature& scheme, RngStream& rng) const;
};

/// Successor nodes for a batch: column b * Q + q is f(x_b, u_b) + xi_q.
Mat successor_nodes(const Environment& env, const Mat& X, const Mat& U, const QuadratureRule& rule);

/// h(x, u) = E_xi{ l(x', u) + gamma V(x') } for every column of (X, U).
Vec h_values(const Environment& env, const Mat& X, const Mat& U, const QuadratureRule& rule,
             const ParametricFn& critic, double gamma);

double h_value(const Vec& x, const Vec& u, const MixedModel& model, const ParametricFn& critic,
               double gamma, const Quadrature& scheme = Quadrature::sigma_point());

struct GradientResult {
    double value = 0.0;  // critic loss or actor objective
    Vec grad;
};

/// Semi-gradient of J = mean_b 1/2 (V(x_b) - target_b)^2 with the target
/// E_xi{ l(x', pi(x_b)) + gamma V(x') } held fixed.
GradientResult critic_semi_gradient(const Environment& env, const ParametricFn& critic,
                                    const ParametricFn& actor, const Mat& X,
                                    const QuadratureRule& rule, double gamma);

/// Pathwise gradient of J = mean_b E_xi{ l(x', pi(x_b)) + gamma V(x') } with
/// x' = f(x_b, pi(x_b)) + xi.
GradientResult actor_gradient(const Environment& env, const ParametricFn& actor,
                              const ParametricFn& critic, const Mat& X,
                              const QuadratureRule& rule, double gamma);

/// One plain gradient step on the critic. Returns the loss before the step.
/// Throws NumericError (critic unchanged) on a non-finite loss or gradient.
double pev_step(ParametricFn& critic, const ParametricFn& actor, const MixedModel& model,
                const Mat& X, double gamma, double rate,
                const Quadrature& scheme = Quadrature::sigma_point());

/// One plain gradient step on the actor. Returns J_Actor before the step.
double pim_step(ParametricFn& actor, const ParametricFn& critic, const MixedModel& model,
                const Mat& X, double gamma, double rate,
                const Quadrature& scheme = Quadrature::sigma_point());

enum class MvcMode { averaged, per_state };

struct MvcResult {
    bool satisfied = false;
    double lhs = 0.0;
    double e_k = 0.0;
};

/// lhs = h(x, u_new, xi_new) - h(x, u_new, xi_old);
/// e_k = h(x, u_old, xi_old) - h(x, u_new, xi_old).
/// Averaged mode compares probe-set means; per-state mode requires every
/// probe state to pass. A side passes when lhs <= max(e_k, 0) + 1e-6 (1 + |e_k|).
MvcResult mvc_check(const Environment& env, const Mat& probes, const ParametricFn& actor_old,
                    const ParametricFn& actor_new, const QuadratureRule& rule_old,
                    const QuadratureRule& rule_new, const ParametricFn& critic, double gamma,
                    MvcMode mode = MvcMode::averaged);

MvcResult mvc_check(const Mat& probes, const ParametricFn& actor_old, const ParametricFn& actor_new,
                    const MixedModel& model_old, const MixedModel& model_new,
                    const ParametricFn& critic, double gamma, MvcMode mode = MvcMode::averaged);

bool mvc_passes(double lhs, double e_k);

/// Fixed probe states drawn once from a distribution.
struct EvalStateSet {
    Mat states;  // n x count

    static EvalStateSet draw(const Gaussian& dist, int count, RngStream& rng);
    int size() const { return static_cast<int>(states.cols()); }
};

// ---------------------------------------------------------------------------
// Training loop

enum class Algorithm { mixed, model_driven, data_driven, exact_pi };

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

struct TrainerConfig {
    Algorithm algorithm = Algorithm::mixed;
    double gamma = 0.99;
    IbeCase ibe_case = IbeCase::unknown_covariance;
    Vec prior_mu;
    Mat prior_K;
    std::optional<Mat> known_K;  // Case 1
    Case2Precision case2_precision = Case2Precision::reformed;

    Architecture critic_arch;
    Architecture actor_arch;
    OptimizerConfig critic_opt;
    OptimizerConfig actor_opt;
    Quadrature quadrature = Quadrature::sigma_point();

    int batch_size = 64;
    int steps_per_iter = 10;      // environment steps collected per iteration
    int episode_length = 200;
    int replay_capacity = 100000;
    double explore_start = 0.2;   // action noise std as a fraction of the half width
    double explore_end = 0.0;
    int critic_steps = 1;
    int warm_start_steps = 0;     // critic-only steps under the initial actor
    int probe_states = 256;
    int j_max = 10;
    MvcMode mvc_mode = MvcMode::averaged;
    int iterations = 1000;
    double rate_decay = 1.0;      // learning-rate fraction reached linearly at the last iteration
    double blow_up = kBlowUpBound;
    std::uint64_t seed = 1;

    void validate(int state_dim, int action_dim) const;
};

/// Linear learning-rate multiplier at iteration k: 1 at k = 1 and
/// rate_decay at k = iterations, constant afterwards.
double rate_scale(const TrainerConfig& config, long k);

struct IterationReport {
    long k = 0;
    double critic_loss = 0.0;
    double actor_obj = 0.0;
    double mvc_lhs = 0.0;
    std::optional<double> e_k;
    bool mvc_satisfied = true;
    int inner_steps = 0;
    std::optional<double> eval_return;
    Vec mu_hat;       // empty when the method keeps no belief
    Vec K_hat_diag;
    int rollbacks = 0;
    int episodes_diverged = 0;
};

/// Uniform replay of transitions with a fixed capacity.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& operator[](std::size_t i) const { return data_[i]; }
    std::vector<std::size_t> sample_indices(std::size_t count, RngStream& rng) const;

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> data_;
};

/// Exploration episodes on the real plant. Each call advances the ongoing
/// episode by one step and restarts from the initial distribution after
/// `episode_length` steps or on divergence.
class Explorer {
public:
    Explorer(const Environment& env, int episode_length, double blow_up, RngStream rng);

    /// Returns the transition taken, or nothing when the step diverged.
    std::optional<Transition> step(const ParametricFn& actor, double noise_fraction);
    int diverged_episodes() const { return diverged_; }

private:
    void reset();

    const Environment& env_;
    int episode_length_;
    double blow_up_;
    RngStream rng_;
    GaussianSampler init_;
    GaussianSampler noise_;
    Vec x_;
    int t_ = 0;
    int diverged_ = 0;
};

/// Common interface of the trainers driven by the harness.
class Learner {
public:
    virtual ~Learner() = default;
    virtual IterationReport iterate() = 0;
    virtual const ParametricFn& actor() const = 0;
    virtual const ParametricFn& critic() const = 0;
    virtual long iteration() const = 0;
};

/// Adaptive GPI: IBE fold, PEV step, PIM step and the MVC inner loop. With
/// update_belief = false the belief stays at the prior and the MVC is skipped
/// (model-driven baseline).
class GpiTrainer final : public Learner {
public:
    GpiTrainer(std::shared_ptr<const Environment> env, TrainerConfig config);

    IterationReport iterate() override;
    const ParametricFn& actor() const override { return actor_; }
    const ParametricFn& critic() const override { return critic_; }
    long iteration() const override { return k_; }

    const GaussianBelief& belief() const { return belief_; }
    const EvalStateSet& probes() const { return probes_; }
    const TrainerConfig& config() const { return config_; }

    void set_actor(ParametricFn actor) { actor_ = std::move(actor); }
    void set_critic(ParametricFn critic) { critic_ = std::move(critic); }

private:
    double explore_fraction() const;
    void apply_rate_schedule();
    Mat sample_states(int count);
    void warm_start();

    std::shared_ptr<const Environment> env_;
    TrainerConfig config_;
    bool update_belief_;
    RngStream rng_replay_;
    RngStream rng_quad_;
    RngStream rng_init_;
    Explorer explorer_;
    ReplayBuffer replay_;
    GaussianBelief belief_;
    ParametricFn critic_;
    ParametricFn actor_;
    Optimizer critic_opt_;
    Optimizer actor_opt_;
    EvalStateSet probes_;
    long k_ = 0;
    bool warm_ = false;
};

std::unique_ptr<Learner> make_learner(std::shared_ptr<const Environment> env, const TrainerConfig& config);

}  // namespace mixrl

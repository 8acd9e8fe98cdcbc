#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixrl/funcapprox.hpp"
#include "mixrl/mixedrl.hpp"
#include "mixrl/vehicle.hpp"

namespace mixrl {

enum class EnvKind { lq, vehicle, tabular };

const char* to_string(EnvKind kind);
EnvKind env_kind_from_string(const std::string& name);

/// Seeded linear-quadratic instance. A has entries U(-1, 1) rescaled so its
/// largest singular value is a_norm; B has entries U(-1, 1).
struct LqSpec {
    int state_dim = 3;
    int action_dim = 2;
    std::uint64_t generator_seed = 58;
    double a_norm = 0.8;
    double q_weight = 1.0;
    double r_weight = 0.1;
    Vec noise_mean = (Vec(3) << 0.1, -0.05, 0.08).finished();
    double noise_std = 0.01;
    double action_limit = 100.0;
    double init_std = 1.0;
};

/// Random finite MDP for exact policy iteration.
struct TabularSpec {
    int states = 2;
    int actions = 2;
    std::uint64_t generator_seed = 1;
    double tolerance = 1e-10;
    int max_iterations = 1000;
};

/// Approximator layout. Input and output sizes follow from the environment.
struct NetSpec {
    FnKind kind = FnKind::mlp;
    std::vector<int> hidden;
    Vec input_scale;  // empty means all ones
    double output_scale = 1.0;
    bool squash = false;  // tanh squash onto the action bounds (actor only)
};

/// Periodic policy evaluation: discounted cost over `horizon` steps on the
/// true plant from `states` fixed start states.
struct EvalSpec {
    int every = 500;
    int states = 32;
    int horizon = 400;
    std::uint64_t seed = 777;
    std::uint64_t dlc_seed = 99;  // disturbance stream of the final lane-change drive
    /// Polyak weight of the evaluated actor copy, updated after every
    /// iteration as avg += w (actor - avg). 0 evaluates the raw actor.
    double actor_average = 0.0;
};

struct ExperimentConfig {
    std::string id = "experiment";
    EnvKind env = EnvKind::lq;
    std::string output_dir = "out";
    bool strict = false;

    LqSpec lq;
    VehicleParams vehicle;
    DlcGeometry path;
    TabularSpec tabular;

    TrainerConfig trainer;  // critic_arch / actor_arch are filled by build_trainer_config
    NetSpec critic;
    NetSpec actor;
    EvalSpec eval;

    /// Throws std::invalid_argument naming the first bad field.
    void validate() const;
};

/// Parses the sectioned key = value format. Unknown sections or keys,
/// duplicates and malformed values throw std::invalid_argument with the line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text form: every key of the active sections, fixed order,
/// shortest round-trip number formatting.
std::string serialize_config(const ExperimentConfig& config);

/// Built-in presets: lq, tabular, vehicle_mixed, vehicle_model_driven,
/// vehicle_data_driven.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace mixrl

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mixrl/envsim.hpp"
#include "mixrl/numkit.hpp"

namespace mixrl {

enum class FnKind {
    mlp,        // tanh hidden layers, linear output
    quadratic,  // linear in the monomials {1, x_i, x_i x_j (i <= j)}
    linear      // W x + b
};

const char* to_string(FnKind kind);
FnKind fn_kind_from_string(const std::string& name);

/// Describes a parametric map x -> y. The input is scaled elementwise by
/// input_scale before the core map, the core output is multiplied by
/// output_scale, and an optional squash maps it into an action box with
/// center + half_width * tanh(.).
struct Architecture {
    FnKind kind = FnKind::mlp;
    int input_dim = 1;
    std::vector<int> hidden;
    int output_dim = 1;
    Vec input_scale;  // empty means all ones
    double output_scale = 1.0;
    std::optional<ActionBounds> squash;

    int param_count() const;
    void validate() const;
};

/// A differentiable function with a flat parameter vector. Values are
/// immutable except through set_params/mutable_params.
class ParametricFn {
public:
    ParametricFn() = default;
    ParametricFn(Architecture arch, Vec params);

    static ParametricFn zeros(const Architecture& arch);
    /// Weights uniform in +/- 1/sqrt(fan_in), biases zero (mlp); zeros for the
    /// quadratic and linear kinds.
    static ParametricFn initialized(const Architecture& arch, RngStream& rng);

    const Architecture& arch() const { return arch_; }
    const Vec& params() const { return params_; }
    Vec& mutable_params() { return params_; }
    void set_params(Vec params);
    int param_count() const { return static_cast<int>(params_.size()); }
    int input_dim() const { return arch_.input_dim; }
    int output_dim() const { return arch_.output_dim; }

    Vec forward(const Vec& x) const;
    /// Columns of X are inputs; returns output_dim x B.
    Mat forward_batch(const Mat& X) const;

    /// Gradient of upstream^T forward(x) with respect to the parameters.
    Vec grad_params(const Vec& x, const Vec& upstream) const;
    /// Sum over columns b of the gradient of upstream_b^T forward(x_b).
    Vec grad_params_batch(const Mat& X, const Mat& upstream) const;

    /// Gradient of upstream^T forward(x) with respect to x.
    Vec grad_input(const Vec& x, const Vec& upstream) const;
    /// Column b is the input gradient for (x_b, upstream_b). The forward
    /// values are stored in `values` when given.
    Mat grad_input_batch(const Mat& X, const Mat& upstream, Mat* values = nullptr) const;

private:
    struct Cache;
    Mat scaled_input(const Mat& X) const;
    Mat core_forward(const Mat& Xs, Cache* cache) const;
    Mat output_from_core(const Mat& Z, Mat* raw) const;
    Mat core_upstream(const Mat& raw, const Mat& upstream) const;
    void core_backward(const Cache& cache, const Mat& Gz, Vec* grad_params, Mat* grad_in) const;

    Architecture arch_;
    Vec params_;
};

/// params - rate * gradient.
Vec sgd_step(const Vec& params, const Vec& gradient, double rate);

enum class OptimizerKind { sgd, momentum, adam };

const char* to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& name);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::sgd;
    double rate = 1e-3;
    double momentum = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Stateful first-order update. A non-finite gradient throws NumericError
/// and leaves the parameters and optimizer state untouched.
class Optimizer {
public:
    Optimizer() = default;
    explicit Optimizer(OptimizerConfig config);

    void step(Vec& params, const Vec& gradient);
    void set_rate(double rate) { config_.rate = rate; }
    double rate() const { return config_.rate; }
    const OptimizerConfig& config() const { return config_; }

private:
    OptimizerConfig config_;
    Vec first_;
    Vec second_;
    std::int64_t steps_ = 0;
};

/// Flat checkpoint: "MXRL", u32 version, u64 count, count little-endian f64.
void save_checkpoint(const std::filesystem::path& path, const Vec& params);
Vec load_checkpoint(const std::filesystem::path& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace mixrl

#include "mixrl/funcapprox.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace mixrl {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeights = Eigen::Map<const RowMat>;
using Weights = Eigen::Map<RowMat>;

int quadratic_features(int n) { return 1 + n + n * (n + 1) / 2; }

std::vector<int> layer_dims(const Architecture& a) {
    std::vector<int> dims{a.input_dim};
    dims.insert(dims.end(), a.hidden.begin(), a.hidden.end());
    dims.push_back(a.output_dim);
    return dims;
}

Mat quadratic_basis(const Mat& X) {
    const auto n = X.rows();
    Mat phi(quadratic_features(static_cast<int>(n)), X.cols());
    phi.row(0).setOnes();
    phi.middleRows(1, n) = X;
    Eigen::Index row = 1 + n;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            phi.row(row++) = X.row(i).cwiseProduct(X.row(j));
        }
    }
    return phi;
}

}  // namespace

const char* to_string(FnKind kind) {
    switch (kind) {
        case FnKind::mlp: return "mlp";
        case FnKind::quadratic: return "quadratic";
        case FnKind::linear: return "linear";
    }
    return "?";
}

FnKind fn_kind_from_string(const std::string& name) {
    if (name == "mlp") return FnKind::mlp;
    if (name == "quadratic") return FnKind::quadratic;
    if (name == "linear") return FnKind::linear;
    throw std::invalid_argument("unknown function kind '" + name + "'");
}

int Architecture::param_count() const {
    switch (kind) {
        case FnKind::mlp: {
            const auto dims = layer_dims(*this);
            int count = 0;
            for (std::size_t l = 0; l + 1 < dims.size(); ++l) count += dims[l + 1] * (dims[l] + 1);
            return count;
        }
        case FnKind::quadratic: return output_dim * quadratic_features(input_dim);
        case FnKind::linear: return output_dim * (input_dim + 1);
    }
    return 0;
}

void Architecture::validate() const {
    if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("Architecture: dims must be >= 1");
    for (int h : hidden) {
        if (h < 1) throw std::invalid_argument("Architecture: hidden widths must be >= 1");
    }
    if (kind != FnKind::mlp && !hidden.empty()) {
        throw std::invalid_argument("Architecture: hidden layers only apply to mlp");
    }
    if (input_scale.size() != 0 && input_scale.size() != input_dim) {
        throw std::invalid_argument("Architecture: input_scale length mismatch");
    }
    if (!std::isfinite(output_scale) || output_scale == 0.0) {
        throw std::invalid_argument("Architecture: output_scale must be finite and nonzero");
    }
    if (squash && squash->dim() != output_dim) {
        throw std::invalid_argument("Architecture: squash bounds dimension mismatch");
    }
    if (squash && (!squash->lo.allFinite() || !squash->hi.allFinite())) {
        throw std::invalid_argument("Architecture: squash bounds must be finite");
    }
}

struct ParametricFn::Cache {
    std::vector<Mat> acts;  // mlp: input of every layer; quadratic: basis; linear: input
};

ParametricFn::ParametricFn(Architecture arch, Vec params) : arch_(std::move(arch)), params_(std::move(params)) {
    arch_.validate();
    if (params_.size() != arch_.param_count()) {
        throw std::invalid_argument("ParametricFn: parameter count does not match architecture");
    }
}

ParametricFn ParametricFn::zeros(const Architecture& arch) {
    return ParametricFn(arch, Vec::Zero(arch.param_count()));
}

ParametricFn ParametricFn::initialized(const Architecture& arch, RngStream& rng) {
    ParametricFn fn = zeros(arch);
    if (arch.kind != FnKind::mlp) return fn;
    const auto dims = layer_dims(arch);
    Eigen::Index offset = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int in = dims[l];
        const int out = dims[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        for (int i = 0; i < out * in; ++i) fn.params_[offset + i] = rng.uniform(-bound, bound);
        offset += out * in + out;
    }
    return fn;
}

void ParametricFn::set_params(Vec params) {
    if (params.size() != params_.size()) throw std::invalid_argument("set_params: size mismatch");
    params_ = std::move(params);
}

Mat ParametricFn::scaled_input(const Mat& X) const {
    if (X.rows() != arch_.input_dim) {
        throw std::invalid_argument("ParametricFn: input dimension mismatch (got " +
                                    std::to_string(X.rows()) + ", expected " +
                                    std::to_string(arch_.input_dim) + ")");
    }
    if (arch_.input_scale.size() == 0) return X;
    return arch_.input_scale.asDiagonal() * X;
}

Mat ParametricFn::core_forward(const Mat& Xs, Cache* cache) const {
    const double* p = params_.data();
    switch (arch_.kind) {
        case FnKind::mlp: {
            const auto dims = layer_dims(arch_);
            const std::size_t L = dims.size() - 1;
            Mat A = Xs;
            Eigen::Index offset = 0;
            for (std::size_t l = 0; l < L; ++l) {
                const int in = dims[l];
                const int out = dims[l + 1];
                ConstWeights W(p + offset, out, in);
                offset += out * in;
                Eigen::Map<const Vec> b(p + offset, out);
                offset += out;
                Mat Z = W * A;
                Z.colwise() += b;
                if (l + 1 < L) Z = Z.array().tanh().matrix();
                if (cache) cache->acts.push_back(std::move(A));
                A = std::move(Z);
            }
            return A;
        }
        case FnKind::quadratic: {
            Mat phi = quadratic_basis(Xs);
            ConstWeights W(p, arch_.output_dim, phi.rows());
            Mat Z = W * phi;
            if (cache) cache->acts.push_back(std::move(phi));
            return Z;
        }
        case FnKind::linear: {
            ConstWeights W(p, arch_.output_dim, arch_.input_dim);
            Eigen::Map<const Vec> b(p + arch_.output_dim * arch_.input_dim, arch_.output_dim);
            Mat Z = W * Xs;
            Z.colwise() += b;
            if (cache) cache->acts.push_back(Xs);
            return Z;
        }
    }
    return {};
}

Mat ParametricFn::output_from_core(const Mat& Z, Mat* raw) const {
    Mat scaled = arch_.output_scale * Z;
    if (!arch_.squash) {
        if (raw) *raw = scaled;
        return scaled;
    }
    const Vec center = arch_.squash->center();
    const Vec half = arch_.squash->half_width();
    Mat y = half.asDiagonal() * scaled.array().tanh().matrix();
    y.colwise() += center;
    if (raw) *raw = std::move(scaled);
    return y;
}

Mat ParametricFn::core_upstream(const Mat& raw, const Mat& upstream) const {
    if (upstream.rows() != arch_.output_dim || upstream.cols() != raw.cols()) {
        throw std::invalid_argument("ParametricFn: upstream shape mismatch");
    }
    if (!arch_.squash) return arch_.output_scale * upstream;
    const Vec half = arch_.squash->half_width();
    const Mat t = raw.array().tanh().matrix();
    const Mat dsquash = (1.0 - t.array().square()).matrix();
    return arch_.output_scale *
           (half.asDiagonal() * upstream.cwiseProduct(dsquash));
}

void ParametricFn::core_backward(const Cache& cache, const Mat& Gz, Vec* grad_params,
                                 Mat* grad_in) const {
    const double* p = params_.data();
    switch (arch_.kind) {
        case FnKind::mlp: {
            const auto dims = layer_dims(arch_);
            const std::size_t L = dims.size() - 1;
            std::vector<Eigen::Index> offsets(L);
            Eigen::Index offset = 0;
            for (std::size_t l = 0; l < L; ++l) {
                offsets[l] = offset;
                offset += dims[l + 1] * (dims[l] + 1);
            }
            Mat G = Gz;
            for (std::size_t l = L; l-- > 0;) {
                const int in = dims[l];
                const int out = dims[l + 1];
                ConstWeights W(p + offsets[l], out, in);
                const Mat& A = cache.acts[l];
                if (grad_params) {
                    Weights gW(grad_params->data() + offsets[l], out, in);
                    gW.noalias() += G * A.transpose();
                    grad_params->segment(offsets[l] + out * in, out) += G.rowwise().sum();
                }
                if (l > 0) {
                    Mat back = W.transpose() * G;
                    G = back.cwiseProduct((1.0 - A.array().square()).matrix());
                } else if (grad_in) {
                    *grad_in = W.transpose() * G;
                }
            }
            return;
        }
        case FnKind::quadratic: {
            const Mat& phi = cache.acts[0];
            const auto F = phi.rows();
            ConstWeights W(p, arch_.output_dim, F);
            if (grad_params) {
                Weights gW(grad_params->data(), arch_.output_dim, F);
                gW.noalias() += Gz * phi.transpose();
            }
            if (grad_in) {
                const Mat C = W.transpose() * Gz;  // F x B
                const int n = arch_.input_dim;
                const auto& X = phi.middleRows(1, n);
                Mat dX = C.middleRows(1, n);
                Eigen::Index row = 1 + n;
                for (int i = 0; i < n; ++i) {
                    for (int j = i; j < n; ++j) {
                        const auto c = C.row(row++);
                        if (i == j) {
                            dX.row(i) += 2.0 * c.cwiseProduct(X.row(i));
                        } else {
                            dX.row(i) += c.cwiseProduct(X.row(j));
                            dX.row(j) += c.cwiseProduct(X.row(i));
                        }
                    }
                }
                *grad_in = std::move(dX);
            }
            return;
        }
        case FnKind::linear: {
            const int in = arch_.input_dim;
            const int out = arch_.output_dim;
            ConstWeights W(p, out, in);
            if (grad_params) {
                Weights gW(grad_params->data(), out, in);
                gW.noalias() += Gz * cache.acts[0].transpose();
                grad_params->segment(out * in, out) += Gz.rowwise().sum();
            }
            if (grad_in) *grad_in = W.transpose() * Gz;
            return;
        }
    }
}

Vec ParametricFn::forward(const Vec& x) const { return forward_batch(x).col(0); }

Mat ParametricFn::forward_batch(const Mat& X) const {
    return output_from_core(core_forward(scaled_input(X), nullptr), nullptr);
}

Vec ParametricFn::grad_params(const Vec& x, const Vec& upstream) const {
    return grad_params_batch(x, upstream);
}

Vec ParametricFn::grad_params_batch(const Mat& X, const Mat& upstream) const {
    Cache cache;
    Mat raw;
    output_from_core(core_forward(scaled_input(X), &cache), &raw);
    const Mat Gz = core_upstream(raw, upstream);
    Vec grad = Vec::Zero(params_.size());
    core_backward(cache, Gz, &grad, nullptr);
    return grad;
}

Vec ParametricFn::grad_input(const Vec& x, const Vec& upstream) const {
    return grad_input_batch(x, upstream).col(0);
}

Mat ParametricFn::grad_input_batch(const Mat& X, const Mat& upstream, Mat* values) const {
    Cache cache;
    Mat raw;
    Mat y = output_from_core(core_forward(scaled_input(X), &cache), &raw);
    if (values) *values = std::move(y);
    const Mat Gz = core_upstream(raw, upstream);
    Mat grad_in;
    core_backward(cache, Gz, nullptr, &grad_in);
    if (arch_.input_scale.size() != 0) grad_in = arch_.input_scale.asDiagonal() * grad_in;
    return grad_in;
}

// ---------------------------------------------------------------------------

Vec sgd_step(const Vec& params, const Vec& gradient, double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("sgd_step: rate must be positive");
    if (gradient.size() != params.size()) throw std::invalid_argument("sgd_step: size mismatch");
    if (!gradient.allFinite()) throw NumericError("sgd_step: non-finite gradient");
    return params - rate * gradient;
}

const char* to_string(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::sgd: return "sgd";
        case OptimizerKind::momentum: return "momentum";
        case OptimizerKind::adam: return "adam";
    }
    return "?";
}

OptimizerKind optimizer_kind_from_string(const std::string& name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "momentum") return OptimizerKind::momentum;
    if (name == "adam") return OptimizerKind::adam;
    throw std::invalid_argument("unknown optimizer '" + name + "'");
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
    if (!(config_.rate > 0.0)) throw std::invalid_argument("Optimizer: rate must be positive");
}

void Optimizer::step(Vec& params, const Vec& gradient) {
    if (gradient.size() != params.size()) throw std::invalid_argument("Optimizer: size mismatch");
    if (!gradient.allFinite()) throw NumericError("Optimizer: non-finite gradient");
    switch (config_.kind) {
        case OptimizerKind::sgd:
            params -= config_.rate * gradient;
            return;
        case OptimizerKind::momentum:
            if (first_.size() != params.size()) first_ = Vec::Zero(params.size());
            first_ = config_.momentum * first_ + gradient;
            params -= config_.rate * first_;
            return;
        case OptimizerKind::adam: {
            if (first_.size() != params.size()) {
                first_ = Vec::Zero(params.size());
                second_ = Vec::Zero(params.size());
            }
            ++steps_;
            first_ = config_.beta1 * first_ + (1.0 - config_.beta1) * gradient;
            second_ = config_.beta2 * second_ + (1.0 - config_.beta2) * gradient.cwiseAbs2();
            const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
            const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
            params.array() -= config_.rate * (first_.array() / c1) /
                              ((second_.array() / c2).sqrt() + config_.epsilon);
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
    unsigned char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
    return value;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Vec& params) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string());
    out.write("MXRL", 4);
    put_le<std::uint32_t>(out, kCheckpointVersion);
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(params.size()));
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(params[i]));
    }
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

Vec load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "MXRL") throw std::runtime_error("checkpoint: bad magic");
    const auto version = get_le<std::uint32_t>(in);
    if (version != kCheckpointVersion) throw std::runtime_error("checkpoint: unsupported version");
    const auto count = get_le<std::uint64_t>(in);
    Vec params(static_cast<Eigen::Index>(count));
    for (std::uint64_t i = 0; i < count; ++i) {
        params[static_cast<Eigen::Index>(i)] = std::bit_cast<double>(get_le<std::uint64_t>(in));
    }
    return params;
}

}  // namespace mixrl

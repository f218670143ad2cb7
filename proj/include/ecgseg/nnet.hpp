#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ecgseg/common.hpp"
#include "ecgseg/tensor.hpp"

namespace ecgseg {

// Parameter count reported for the published architecture; the exact layer
// shapes behind it are not recoverable, so the default architecture below
// differs and both counts appear in reports.
inline constexpr int kReferenceParamCount = 60804;

enum class Activation { Relu, None };

struct ConvLayer {
    int in_channels = 0;
    int out_channels = 0;
    int kernel_size = 1;  // odd
    Activation activation = Activation::None;
    std::vector<double> weights;  // [out][in][k], row-major
    std::vector<double> bias;     // [out]

    double w(int o, int i, int k) const {
        return weights[(static_cast<std::size_t>(o) * in_channels + i) * kernel_size + k];
    }
    double& w(int o, int i, int k) {
        return weights[(static_cast<std::size_t>(o) * in_channels + i) * kernel_size + k];
    }
    int weight_count() const { return out_channels * in_channels * kernel_size; }
};

struct ModelParams {
    std::vector<ConvLayer> layers;
};

// Architecture description: widths has one entry per layer boundary
// (widths[0] = input channels), kernels one entry per layer.
struct Architecture {
    std::vector<int> widths = {1, 16, 16, 32, 32, 32, 32, 32, 4};
    std::vector<int> kernels = {9, 9, 9, 9, 9, 9, 9, 1};
};

// Glorot-uniform weights, zero biases; every layer except the last uses relu.
ModelParams make_model(const Architecture& arch, std::uint64_t seed);

// The 8-layer default segmentation network (1 input lead, 4 softmax channels).
ModelParams default_segmenter(std::uint64_t seed);

// Enforces the pipeline architecture contract: 8 layers chained 1 -> ... -> 4,
// last layer pointwise (kernel 1) with no activation, odd kernels throughout.
void validate_segmenter(const ModelParams& model);

int param_count(const ModelParams& model);

// Same zero padding; output length equals input length.
Tensor1d conv1d_forward(const Tensor1d& x, const ConvLayer& layer);

// Per-time-step softmax over channels, computed with max subtraction.
Tensor1d softmax_columns(const Tensor1d& logits);

// Chains all layers then applies the per-time-step softmax.
Tensor1d forward(const Tensor1d& x, const ModelParams& model);

// Full forward pass keeping post-activation outputs for backpropagation.
// activations[0] is the input, activations[l] the output of layer l.
struct ForwardTrace {
    std::vector<Tensor1d> activations;
    Tensor1d probs;
};
ForwardTrace forward_trace(const Tensor1d& x, const ModelParams& model);

// Mean over time of the per-column categorical cross entropy. Target columns
// must be exactly one-hot.
double cross_entropy_loss(const Tensor1d& probs, const Tensor1d& target);

struct LayerGrads {
    std::vector<double> weights;
    std::vector<double> bias;
};
using Gradients = std::vector<LayerGrads>;

Gradients zero_gradients(const ModelParams& model);
void accumulate(Gradients& into, const Gradients& g);
void scale(Gradients& g, double factor);

// Exact analytic gradients of cross_entropy_loss(forward(x), target) with
// respect to every weight and bias.
Gradients backward(const Tensor1d& x, const Tensor1d& target,
                   const ModelParams& model);
Gradients backward(const ForwardTrace& trace, const Tensor1d& target,
                   const ModelParams& model);

// RMSProp: v <- rho v + (1-rho) g^2; theta <- theta - lr g / (sqrt(v) + eps).
struct OptimizerState {
    double rho = 0.9;
    double learning_rate = 1e-3;
    double epsilon = 1e-8;
    Gradients v;  // squared-gradient accumulator, same shapes as the model
};

OptimizerState make_optimizer(const ModelParams& model, double rho = 0.9,
                              double learning_rate = 1e-3, double epsilon = 1e-8);

// Throws on a non-finite gradient, naming the parameter.
void rmsprop_step(ModelParams& model, const Gradients& grads, OptimizerState& state);

// Checkpoint container: architecture, flat parameters (per layer: weights
// [o][i][k] row-major, then biases), optimizer state in the same order, the
// RNG seed and the parameter count. JSON on disk, round-trip exact.
struct Checkpoint {
    ModelParams model;
    OptimizerState optimizer;
    std::uint64_t seed = 0;
};

void save_checkpoint(const Checkpoint&, const std::filesystem::path&);
Checkpoint load_checkpoint(const std::filesystem::path&);

}  // namespace ecgseg

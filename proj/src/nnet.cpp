#include "ecgseg/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ecgseg/kernels.hpp"

namespace ecgseg {

using nlohmann::json;

namespace {

ConvLayer make_layer(int in_c, int out_c, int kernel, Activation act, Rng& rng) {
    if (kernel % 2 == 0)
        throw std::invalid_argument("make_layer: kernel size must be odd");
    ConvLayer layer;
    layer.in_channels = in_c;
    layer.out_channels = out_c;
    layer.kernel_size = kernel;
    layer.activation = act;
    layer.weights.resize(static_cast<std::size_t>(out_c) * in_c * kernel);
    layer.bias.assign(out_c, 0.0);
    const double fan_in = static_cast<double>(in_c) * kernel;
    const double fan_out = static_cast<double>(out_c) * kernel;
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& w : layer.weights) w = rng.uniform(-limit, limit);
    return layer;
}

}  // namespace

ModelParams make_model(const Architecture& arch, std::uint64_t seed) {
    if (arch.widths.size() != arch.kernels.size() + 1)
        throw std::invalid_argument("make_model: widths must have one more entry than kernels");
    Rng rng(seed);
    ModelParams model;
    const int n_layers = static_cast<int>(arch.kernels.size());
    for (int l = 0; l < n_layers; ++l) {
        const Activation act = l + 1 < n_layers ? Activation::Relu : Activation::None;
        model.layers.push_back(
            make_layer(arch.widths[l], arch.widths[l + 1], arch.kernels[l], act, rng));
    }
    return model;
}

ModelParams default_segmenter(std::uint64_t seed) {
    ModelParams model = make_model(Architecture{}, seed);
    validate_segmenter(model);
    return model;
}

void validate_segmenter(const ModelParams& model) {
    std::vector<std::string> violations;
    if (model.layers.size() != 8)
        violations.push_back("segmenter must have exactly 8 layers, got " +
                             std::to_string(model.layers.size()));
    if (!model.layers.empty()) {
        if (model.layers.front().in_channels != 1)
            violations.push_back("layer 1 must take 1 input channel");
        const ConvLayer& last = model.layers.back();
        if (last.out_channels != 4)
            violations.push_back("final layer must emit 4 channels");
        if (last.kernel_size != 1)
            violations.push_back("final layer must be pointwise (kernel 1)");
        if (last.activation != Activation::None)
            violations.push_back("final layer must not apply an activation");
    }
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const ConvLayer& layer = model.layers[l];
        if (layer.kernel_size % 2 == 0)
            violations.push_back("layer " + std::to_string(l + 1) + ": kernel must be odd");
        if (static_cast<int>(layer.weights.size()) != layer.weight_count())
            violations.push_back("layer " + std::to_string(l + 1) + ": weight count mismatch");
        if (static_cast<int>(layer.bias.size()) != layer.out_channels)
            violations.push_back("layer " + std::to_string(l + 1) + ": bias count mismatch");
        if (l > 0 && layer.in_channels != model.layers[l - 1].out_channels)
            violations.push_back("layer " + std::to_string(l + 1) +
                                 ": input channels do not match previous layer output");
    }
    if (!violations.empty()) {
        std::string msg = "invalid segmenter architecture:";
        for (const auto& v : violations) msg += "\n  - " + v;
        throw ValidationError(msg);
    }
}

int param_count(const ModelParams& model) {
    int count = 0;
    for (const auto& layer : model.layers)
        count += layer.weight_count() + layer.out_channels;
    return count;
}

Tensor1d conv1d_forward(const Tensor1d& x, const ConvLayer& layer) {
    Tensor1d y;
    kernels::conv1d_forward(x, layer, y);
    return y;
}

Tensor1d softmax_columns(const Tensor1d& logits) {
    Tensor1d p(logits.channels, logits.length);
    const int C = logits.channels;
    const int T = logits.length;
#pragma omp parallel for schedule(static)
    for (int t = 0; t < T; ++t) {
        double m = logits.at(0, t);
        for (int c = 1; c < C; ++c) m = std::max(m, logits.at(c, t));
        double sum = 0.0;
        for (int c = 0; c < C; ++c) {
            const double e = std::exp(logits.at(c, t) - m);
            p.at(c, t) = e;
            sum += e;
        }
        for (int c = 0; c < C; ++c) p.at(c, t) /= sum;
    }
    return p;
}

Tensor1d forward(const Tensor1d& x, const ModelParams& model) {
    Tensor1d a = x;
    Tensor1d next;
    for (const auto& layer : model.layers) {
        kernels::conv1d_forward(a, layer, next);
        std::swap(a, next);
    }
    return softmax_columns(a);
}

ForwardTrace forward_trace(const Tensor1d& x, const ModelParams& model) {
    ForwardTrace trace;
    trace.activations.reserve(model.layers.size() + 1);
    trace.activations.push_back(x);
    for (const auto& layer : model.layers) {
        Tensor1d y;
        kernels::conv1d_forward(trace.activations.back(), layer, y);
        trace.activations.push_back(std::move(y));
    }
    trace.probs = softmax_columns(trace.activations.back());
    return trace;
}

double cross_entropy_loss(const Tensor1d& probs, const Tensor1d& target) {
    if (!probs.same_shape(target))
        throw std::invalid_argument("cross_entropy_loss: shape mismatch");
    const int C = probs.channels;
    const int T = probs.length;
    double total = 0.0;
    for (int t = 0; t < T; ++t) {
        int ones = 0;
        int hot = -1;
        for (int c = 0; c < C; ++c) {
            const double v = target.at(c, t);
            if (v == 1.0) {
                ++ones;
                hot = c;
            } else if (v != 0.0) {
                throw std::invalid_argument(
                    "cross_entropy_loss: target column " + std::to_string(t) +
                    " is not one-hot (value " + std::to_string(v) + ")");
            }
        }
        if (ones != 1)
            throw std::invalid_argument("cross_entropy_loss: target column " +
                                        std::to_string(t) + " is not one-hot");
        total += -std::log(probs.at(hot, t));
    }
    return total / T;
}

Gradients zero_gradients(const ModelParams& model) {
    Gradients g(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        g[l].weights.assign(model.layers[l].weights.size(), 0.0);
        g[l].bias.assign(model.layers[l].bias.size(), 0.0);
    }
    return g;
}

void accumulate(Gradients& into, const Gradients& g) {
    for (std::size_t l = 0; l < into.size(); ++l) {
        for (std::size_t i = 0; i < into[l].weights.size(); ++i)
            into[l].weights[i] += g[l].weights[i];
        for (std::size_t i = 0; i < into[l].bias.size(); ++i)
            into[l].bias[i] += g[l].bias[i];
    }
}

void scale(Gradients& g, double factor) {
    for (auto& layer : g) {
        for (auto& w : layer.weights) w *= factor;
        for (auto& b : layer.bias) b *= factor;
    }
}

Gradients backward(const Tensor1d& x, const Tensor1d& target,
                   const ModelParams& model) {
    return backward(forward_trace(x, model), target, model);
}

Gradients backward(const ForwardTrace& trace, const Tensor1d& target,
                   const ModelParams& model) {
    const int L = static_cast<int>(model.layers.size());
    const Tensor1d& probs = trace.probs;
    if (!probs.same_shape(target))
        throw std::invalid_argument("backward: target shape mismatch");
    const int T = probs.length;

    Gradients grads(L);

    // d loss / d logits of the softmax + cross-entropy head.
    Tensor1d g(probs.channels, T);
    const double inv_t = 1.0 / T;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(g.data.size()); ++idx)
        g.data[idx] = (probs.data[idx] - target.data[idx]) * inv_t;

    Tensor1d dx;
    for (int l = L - 1; l >= 0; --l) {
        const ConvLayer& layer = model.layers[l];
        kernels::conv1d_backward_params(g, trace.activations[l], layer, grads[l]);
        if (l > 0) {
            kernels::conv1d_backward_data(g, layer, dx);
            if (model.layers[l - 1].activation == Activation::Relu)
                kernels::relu_backward_inplace(dx, trace.activations[l]);
            std::swap(g, dx);
        }
    }
    return grads;
}

OptimizerState make_optimizer(const ModelParams& model, double rho,
                              double learning_rate, double epsilon) {
    OptimizerState state;
    state.rho = rho;
    state.learning_rate = learning_rate;
    state.epsilon = epsilon;
    state.v = zero_gradients(model);
    return state;
}

namespace {

void rmsprop_update(std::vector<double>& theta, const std::vector<double>& g,
                    std::vector<double>& v, const OptimizerState& s,
                    int layer_index, const char* kind) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!std::isfinite(g[i]))
            throw std::runtime_error("rmsprop_step: non-finite gradient at layer " +
                                     std::to_string(layer_index + 1) + " " + kind +
                                     "[" + std::to_string(i) + "]");
        v[i] = s.rho * v[i] + (1.0 - s.rho) * g[i] * g[i];
        theta[i] -= s.learning_rate * g[i] / (std::sqrt(v[i]) + s.epsilon);
    }
}

}  // namespace

void rmsprop_step(ModelParams& model, const Gradients& grads, OptimizerState& state) {
    if (grads.size() != model.layers.size() || state.v.size() != model.layers.size())
        throw std::invalid_argument("rmsprop_step: shape mismatch");
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        rmsprop_update(model.layers[l].weights, grads[l].weights, state.v[l].weights,
                       state, static_cast<int>(l), "weight");
        rmsprop_update(model.layers[l].bias, grads[l].bias, state.v[l].bias, state,
                       static_cast<int>(l), "bias");
    }
}

namespace {

const char* activation_name(Activation a) {
    return a == Activation::Relu ? "relu" : "none";
}

Activation activation_from_name(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "none") return Activation::None;
    throw ParseError("checkpoint: unknown activation \"" + s + "\"");
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    json arch = json::array();
    for (const auto& layer : ckpt.model.layers) {
        arch.push_back({{"in", layer.in_channels},
                        {"out", layer.out_channels},
                        {"kernel", layer.kernel_size},
                        {"activation", activation_name(layer.activation)}});
    }
    // Flat parameter order: per layer, weights [o][i][k] row-major, then bias.
    std::vector<double> params;
    std::vector<double> v;
    for (std::size_t l = 0; l < ckpt.model.layers.size(); ++l) {
        const auto& layer = ckpt.model.layers[l];
        params.insert(params.end(), layer.weights.begin(), layer.weights.end());
        params.insert(params.end(), layer.bias.begin(), layer.bias.end());
        v.insert(v.end(), ckpt.optimizer.v[l].weights.begin(),
                 ckpt.optimizer.v[l].weights.end());
        v.insert(v.end(), ckpt.optimizer.v[l].bias.begin(),
                 ckpt.optimizer.v[l].bias.end());
    }

    json j;
    j["format"] = "ecgseg-checkpoint-v1";
    j["architecture"] = std::move(arch);
    j["params"] = std::move(params);
    j["optimizer"] = {{"rho", ckpt.optimizer.rho},
                      {"learning_rate", ckpt.optimizer.learning_rate},
                      {"epsilon", ckpt.optimizer.epsilon},
                      {"v", std::move(v)}};
    j["seed"] = ckpt.seed;
    j["param_count"] = param_count(ckpt.model);
    j["reference_param_count"] = kReferenceParamCount;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
    out << j.dump() << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open checkpoint: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("checkpoint " + path.string() + ": " + e.what());
    }

    try {
        Checkpoint ckpt;
        for (const auto& entry : j.at("architecture")) {
            ConvLayer layer;
            layer.in_channels = entry.at("in").get<int>();
            layer.out_channels = entry.at("out").get<int>();
            layer.kernel_size = entry.at("kernel").get<int>();
            layer.activation = activation_from_name(entry.at("activation").get<std::string>());
            layer.weights.resize(layer.weight_count());
            layer.bias.resize(layer.out_channels);
            ckpt.model.layers.push_back(std::move(layer));
        }
        const auto params = j.at("params").get<std::vector<double>>();
        const auto& opt = j.at("optimizer");
        const auto v = opt.at("v").get<std::vector<double>>();
        if (static_cast<int>(params.size()) != param_count(ckpt.model) ||
            params.size() != v.size())
            throw ParseError("checkpoint " + path.string() + ": parameter count mismatch");
        if (j.at("param_count").get<int>() != param_count(ckpt.model))
            throw ParseError("checkpoint " + path.string() + ": stored param_count mismatch");

        ckpt.optimizer.rho = opt.at("rho").get<double>();
        ckpt.optimizer.learning_rate = opt.at("learning_rate").get<double>();
        ckpt.optimizer.epsilon = opt.at("epsilon").get<double>();
        ckpt.optimizer.v.resize(ckpt.model.layers.size());
        ckpt.seed = j.at("seed").get<std::uint64_t>();

        std::size_t pos = 0;
        for (std::size_t l = 0; l < ckpt.model.layers.size(); ++l) {
            auto& layer = ckpt.model.layers[l];
            std::copy_n(params.begin() + pos, layer.weights.size(), layer.weights.begin());
            ckpt.optimizer.v[l].weights.assign(v.begin() + pos,
                                               v.begin() + pos + layer.weights.size());
            pos += layer.weights.size();
            std::copy_n(params.begin() + pos, layer.bias.size(), layer.bias.begin());
            ckpt.optimizer.v[l].bias.assign(v.begin() + pos,
                                            v.begin() + pos + layer.bias.size());
            pos += layer.bias.size();
        }
        return ckpt;
    } catch (const json::exception& e) {
        throw ParseError("checkpoint " + path.string() + ": " + e.what());
    }
}

}  // namespace ecgseg

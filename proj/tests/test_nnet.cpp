#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "ecgseg/kernels.hpp"
#include "ecgseg/nnet.hpp"
#include "ecgseg/reference.hpp"
#include "test_support.hpp"

using namespace ecgseg;
using namespace testsupport;

namespace {

ConvLayer layer_from(int in_c, int out_c, int kernel, std::vector<double> w,
                     std::vector<double> b, Activation act = Activation::None) {
    ConvLayer layer;
    layer.in_channels = in_c;
    layer.out_channels = out_c;
    layer.kernel_size = kernel;
    layer.activation = act;
    layer.weights = std::move(w);
    layer.bias = std::move(b);
    return layer;
}

}  // namespace

TEST_CASE("conv1d_forward identity layer") {
    const ConvLayer identity = layer_from(1, 1, 1, {1.0}, {0.0});
    Rng rng(1);
    const Tensor1d x = random_tensor(1, 10, rng);
    const Tensor1d y = conv1d_forward(x, identity);
    CHECK(y.data == x.data);
}

TEST_CASE("conv1d_forward shift kernels against direct summation") {
    // y[t] = sum_k w[k] * x[t + k - 1] for kernel 3, zero padding.
    const Tensor1d x = [] {
        Tensor1d t(1, 4);
        t.data = {1.0, 2.0, 3.0, 4.0};
        return t;
    }();

    // w = [0,0,1] picks x[t+1]: a left shift with zero fill.
    const ConvLayer left = layer_from(1, 1, 3, {0.0, 0.0, 1.0}, {0.0});
    CHECK(conv1d_forward(x, left).data == std::vector<double>{2.0, 3.0, 4.0, 0.0});

    // w = [1,0,0] picks x[t-1]: the mirror case.
    const ConvLayer right = layer_from(1, 1, 3, {1.0, 0.0, 0.0}, {0.0});
    CHECK(conv1d_forward(x, right).data == std::vector<double>{0.0, 1.0, 2.0, 3.0});

    // Direct summation oracle on the left-shift kernel.
    for (int t = 0; t < 4; ++t) {
        double acc = 0.0;
        for (int k = 0; k < 3; ++k) {
            const int s = t + k - 1;
            if (s >= 0 && s < 4) acc += left.weights[k] * x.data[s];
        }
        CHECK(conv1d_forward(x, left).at(0, t) == acc);
    }
}

TEST_CASE("conv1d_forward relu clamps a large negative bias") {
    const ConvLayer layer = layer_from(1, 1, 1, {1.0}, {-10.0}, Activation::Relu);
    Rng rng(2);
    const Tensor1d x = random_tensor(1, 16, rng, 0.0, 1.0);
    const Tensor1d y = conv1d_forward(x, layer);
    for (double v : y.data) CHECK(v == 0.0);
}

TEST_CASE("conv1d_forward rejects channel mismatches") {
    const ConvLayer layer = layer_from(2, 1, 1, {1.0, 1.0}, {0.0});
    Rng rng(3);
    const Tensor1d x = random_tensor(1, 8, rng);
    CHECK_THROWS_AS(conv1d_forward(x, layer), std::invalid_argument);
}

TEST_CASE("optimized conv kernels equal the naive reference bit-exactly") {
    Rng rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const int in_c = 1 + rng.uniform_int(5);
        const int out_c = 1 + rng.uniform_int(5);
        const int kernel = 1 + 2 * rng.uniform_int(4);
        const int T = 1 + rng.uniform_int(40);
        ConvLayer layer;
        layer.in_channels = in_c;
        layer.out_channels = out_c;
        layer.kernel_size = kernel;
        layer.activation = rng.uniform() < 0.5 ? Activation::Relu : Activation::None;
        layer.weights.resize(static_cast<std::size_t>(out_c) * in_c * kernel);
        layer.bias.resize(out_c);
        for (auto& w : layer.weights) w = rng.uniform(-1.0, 1.0);
        for (auto& b : layer.bias) b = rng.uniform(-0.5, 0.5);
        const Tensor1d x = random_tensor(in_c, T, rng);

        Tensor1d y_fast;
        kernels::conv1d_forward(x, layer, y_fast);
        const Tensor1d y_ref = reference::conv1d_forward(x, layer);
        CHECK(y_fast.data == y_ref.data);

        const Tensor1d g = random_tensor(out_c, T, rng);
        Tensor1d dx_fast;
        kernels::conv1d_backward_data(g, layer, dx_fast);
        const Tensor1d dx_ref = reference::conv1d_backward_data(g, layer, T);
        CHECK(dx_fast.data == dx_ref.data);

        LayerGrads grads_fast;
        kernels::conv1d_backward_params(g, x, layer, grads_fast);
        const LayerGrads grads_ref = reference::conv1d_backward_params(g, x, layer);
        CHECK(grads_fast.weights == grads_ref.weights);
        CHECK(grads_fast.bias == grads_ref.bias);
    }
}

TEST_CASE("forward emits simplex columns") {
    Rng rng(5);
    const ModelParams model = default_segmenter(rng.next_u64());
    const Tensor1d x = random_tensor(1, 64, rng);
    const Tensor1d p = forward(x, model);
    REQUIRE(p.channels == 4);
    REQUIRE(p.length == 64);
    for (int t = 0; t < p.length; ++t) {
        double sum = 0.0;
        for (int c = 0; c < 4; ++c) {
            CHECK(p.at(c, t) > 0.0);
            CHECK(p.at(c, t) < 1.0);
            sum += p.at(c, t);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("forward with all-zero parameters is uniform") {
    ModelParams model = default_segmenter(9);
    for (auto& layer : model.layers) {
        std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
    }
    Rng rng(6);
    const Tensor1d x = random_tensor(1, 16, rng);
    const Tensor1d p = forward(x, model);
    for (double v : p.data) CHECK(v == 0.25);
}

TEST_CASE("forward is deterministic") {
    Rng rng(7);
    const Tensor1d x = random_tensor(1, 48, rng);
    const ModelParams model = default_segmenter(1234);
    const Tensor1d a = forward(x, model);
    const Tensor1d b = forward(x, model);
    CHECK(a.data == b.data);
    const ModelParams again = default_segmenter(1234);
    CHECK(forward(x, again).data == a.data);
}

TEST_CASE("cross_entropy_loss analytic cases") {
    // Uniform probabilities, any one-hot target: ln 4.
    Tensor1d probs(4, 3, 0.25);
    Rng rng(8);
    const Tensor1d target = random_one_hot(4, 3, rng);
    CHECK(cross_entropy_loss(probs, target) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-12));

    // Near-perfect prediction drives the loss toward zero.
    Tensor1d sharp(4, 2, 1e-9);
    Tensor1d hot(4, 2);
    hot.at(1, 0) = 1.0;
    hot.at(2, 1) = 1.0;
    sharp.at(1, 0) = 1.0 - 3e-9;
    sharp.at(2, 1) = 1.0 - 3e-9;
    CHECK(cross_entropy_loss(sharp, hot) < 1e-6);

    // T=2 mixed case against a scalar hand computation.
    Tensor1d p2(4, 2);
    p2.at(0, 0) = 0.7; p2.at(1, 0) = 0.1; p2.at(2, 0) = 0.1; p2.at(3, 0) = 0.1;
    p2.at(0, 1) = 0.2; p2.at(1, 1) = 0.5; p2.at(2, 1) = 0.2; p2.at(3, 1) = 0.1;
    Tensor1d y2(4, 2);
    y2.at(0, 0) = 1.0;
    y2.at(1, 1) = 1.0;
    const double expected = -(std::log(0.7) + std::log(0.5)) / 2.0;
    CHECK(cross_entropy_loss(p2, y2) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("cross_entropy_loss rejects non-one-hot targets") {
    Tensor1d probs(4, 2, 0.25);
    Tensor1d target(4, 2, 0.0);
    target.at(0, 0) = 1.0;
    target.at(1, 0) = 1.0;  // two hot entries
    target.at(0, 1) = 1.0;
    CHECK_THROWS_AS(cross_entropy_loss(probs, target), std::invalid_argument);
    Tensor1d soft(4, 2, 0.25);
    CHECK_THROWS_AS(cross_entropy_loss(probs, soft), std::invalid_argument);
}

TEST_CASE("backward matches central finite differences") {
    Rng rng(9);
    int checked = 0;
    for (int trial = 0; trial < 6; ++trial) {
        const FdCase c = fd_safe_case(rng);
        const Gradients analytic = backward(c.x, c.target, c.model);
        const Gradients numeric = fd_gradients(c.x, c.target, c.model);
        CHECK(max_relative_error(analytic, numeric) < 1e-4);
        ++checked;
    }
    CHECK(checked == 6);
}

TEST_CASE("backward at the all-zero stationary point") {
    // Zero parameters give uniform probabilities; against a uniform target
    // the softmax gradient vanishes, so the final bias gradient is exactly 0.
    Architecture arch;
    arch.widths = {1, 3, 4};
    arch.kernels = {3, 1};
    ModelParams model = make_model(arch, 10);
    for (auto& layer : model.layers) {
        std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
    }
    Rng rng(11);
    const Tensor1d x = random_tensor(1, 8, rng);
    const Tensor1d uniform_target(4, 8, 0.25);
    const Gradients grads = backward(x, uniform_target, model);
    for (double g : grads.back().bias) CHECK(g == 0.0);
}

TEST_CASE("duplicating a batch leaves averaged gradients unchanged") {
    Rng rng(12);
    const ModelParams model = random_small_model(rng);
    const int T = 6;
    const Tensor1d x = random_tensor(model.layers.front().in_channels, T, rng);
    const Tensor1d y = random_one_hot(4, T, rng);

    const Gradients once = backward(x, y, model);
    // Mean of two identical contributions.
    Gradients twice = zero_gradients(model);
    accumulate(twice, backward(x, y, model));
    accumulate(twice, backward(x, y, model));
    scale(twice, 0.5);
    CHECK(max_relative_error(once, twice) == 0.0);
}

TEST_CASE("rmsprop_step scalar case") {
    Architecture arch;
    arch.widths = {1, 1};
    arch.kernels = {1};
    ModelParams model = make_model(arch, 0);
    model.layers[0].weights = {0.0};
    model.layers[0].bias = {0.0};
    OptimizerState opt = make_optimizer(model, 0.9, 0.001, 1e-8);
    Gradients g = zero_gradients(model);
    g[0].weights[0] = 1.0;

    rmsprop_step(model, g, opt);
    CHECK(opt.v[0].weights[0] == doctest::Approx(0.1).epsilon(1e-15));
    const double expected = -0.001 * 1.0 / (std::sqrt(0.1) + 1e-8);
    CHECK(model.layers[0].weights[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(model.layers[0].weights[0] == doctest::Approx(-0.0031623).epsilon(1e-4));

    // Second identical step keeps moving the same way.
    rmsprop_step(model, g, opt);
    CHECK(model.layers[0].weights[0] < expected);
}

TEST_CASE("rmsprop_step with zero gradient only decays v") {
    Rng rng(13);
    ModelParams model = random_small_model(rng);
    OptimizerState opt = make_optimizer(model);
    opt.v = zero_gradients(model);
    for (auto& lg : opt.v)
        for (auto& v : lg.weights) v = 1.0;
    const ModelParams before = model;
    const Gradients zero = zero_gradients(model);
    rmsprop_step(model, zero, opt);
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        CHECK(model.layers[l].weights == before.layers[l].weights);
        CHECK(model.layers[l].bias == before.layers[l].bias);
        for (double v : opt.v[l].weights) CHECK(v == doctest::Approx(0.9));
    }
}

TEST_CASE("rmsprop_step names the non-finite parameter") {
    Architecture arch;
    arch.widths = {1, 2};
    arch.kernels = {1};
    ModelParams model = make_model(arch, 0);
    OptimizerState opt = make_optimizer(model);
    Gradients g = zero_gradients(model);
    g[0].bias[1] = std::numeric_limits<double>::quiet_NaN();
    try {
        rmsprop_step(model, g, opt);
        FAIL("expected error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("bias[1]") != std::string::npos);
        CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
    }
}

TEST_CASE("param_count") {
    Architecture tiny;
    tiny.widths = {1, 4};
    tiny.kernels = {1};
    CHECK(param_count(make_model(tiny, 0)) == 8);

    const ModelParams model = default_segmenter(0);
    // Independent per-layer arithmetic for the default architecture.
    const int expected = (16 * 1 * 9 + 16) + (16 * 16 * 9 + 16) +
                         (32 * 16 * 9 + 32) + 4 * (32 * 32 * 9 + 32) +
                         (4 * 32 * 1 + 4);
    CHECK(param_count(model) == expected);
    CHECK(param_count(model) == 44244);
    CHECK(kReferenceParamCount == 60804);
}

TEST_CASE("validate_segmenter enforces the pipeline contract") {
    CHECK_NOTHROW(validate_segmenter(default_segmenter(0)));
    Architecture bad;
    bad.widths = {1, 8, 4};
    bad.kernels = {9, 1};
    CHECK_THROWS_AS(validate_segmenter(make_model(bad, 0)), ValidationError);
}

TEST_CASE("checkpoint round-trips exactly") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "ecgseg_test_ckpt.json";

    Rng rng(14);
    Checkpoint ckpt;
    ckpt.model = random_small_model(rng);
    ckpt.optimizer = make_optimizer(ckpt.model, 0.93, 0.0007, 1e-7);
    for (auto& lg : ckpt.optimizer.v)
        for (auto& v : lg.weights) v = rng.uniform(0.0, 2.0);
    ckpt.seed = 987654321;

    save_checkpoint(ckpt, path);
    const Checkpoint back = load_checkpoint(path);

    REQUIRE(back.model.layers.size() == ckpt.model.layers.size());
    for (std::size_t l = 0; l < back.model.layers.size(); ++l) {
        CHECK(back.model.layers[l].weights == ckpt.model.layers[l].weights);
        CHECK(back.model.layers[l].bias == ckpt.model.layers[l].bias);
        CHECK(back.optimizer.v[l].weights == ckpt.optimizer.v[l].weights);
        CHECK(back.model.layers[l].activation == ckpt.model.layers[l].activation);
    }
    CHECK(back.optimizer.rho == ckpt.optimizer.rho);
    CHECK(back.optimizer.learning_rate == ckpt.optimizer.learning_rate);
    CHECK(back.seed == ckpt.seed);
    fs::remove(path);
}

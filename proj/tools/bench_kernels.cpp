// Benchmark comparing the OpenMP kernels against their serial reference
// implementations on production-sized workloads, verifying bit-identical
// output along the way.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ecgseg/common.hpp"
#include "ecgseg/kernels.hpp"
#include "ecgseg/reference.hpp"

using namespace ecgseg;

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    const auto start = Clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto stop = Clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

Tensor1d random_tensor(int channels, int length, Rng& rng) {
    Tensor1d x(channels, length);
    for (auto& v : x.data) v = rng.uniform(-1.0, 1.0);
    return x;
}

ConvLayer random_layer(int in_c, int out_c, int kernel, Rng& rng) {
    ConvLayer layer;
    layer.in_channels = in_c;
    layer.out_channels = out_c;
    layer.kernel_size = kernel;
    layer.activation = Activation::Relu;
    layer.weights.resize(static_cast<std::size_t>(out_c) * in_c * kernel);
    layer.bias.resize(out_c);
    for (auto& w : layer.weights) w = rng.uniform(-0.3, 0.3);
    for (auto& b : layer.bias) b = rng.uniform(-0.1, 0.1);
    return layer;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (OpenMP disabled)\n");
#endif

    Rng rng(42);
    const int T = 5000;

    // conv1d forward, mid-network shape
    {
        const Tensor1d x = random_tensor(32, T, rng);
        const ConvLayer layer = random_layer(32, 32, 9, rng);
        Tensor1d y_fast;
        Tensor1d y_ref;
        const double fast = time_ms([&] { kernels::conv1d_forward(x, layer, y_fast); }, 5);
        const double ref = time_ms([&] { y_ref = reference::conv1d_forward(x, layer); }, 5);
        std::printf("conv1d_forward   32x32 k9 T=%d: kernel %8.2f ms, reference %8.2f ms, speedup %5.2fx, match %s\n",
                    T, fast, ref, ref / fast,
                    bit_equal(y_fast.data, y_ref.data) ? "yes" : "NO");
    }

    // conv1d backward (data + params)
    {
        const Tensor1d x = random_tensor(32, T, rng);
        const Tensor1d g = random_tensor(32, T, rng);
        const ConvLayer layer = random_layer(32, 32, 9, rng);
        Tensor1d dx_fast;
        LayerGrads grads_fast;
        Tensor1d dx_ref;
        LayerGrads grads_ref;
        const double fast = time_ms(
            [&] {
                kernels::conv1d_backward_data(g, layer, dx_fast);
                kernels::conv1d_backward_params(g, x, layer, grads_fast);
            },
            5);
        const double ref = time_ms(
            [&] {
                dx_ref = reference::conv1d_backward_data(g, layer, T);
                grads_ref = reference::conv1d_backward_params(g, x, layer);
            },
            5);
        const bool ok = bit_equal(dx_fast.data, dx_ref.data) &&
                        bit_equal(grads_fast.weights, grads_ref.weights) &&
                        bit_equal(grads_fast.bias, grads_ref.bias);
        std::printf("conv1d_backward  32x32 k9 T=%d: kernel %8.2f ms, reference %8.2f ms, speedup %5.2fx, match %s\n",
                    T, fast, ref, ref / fast, ok ? "yes" : "NO");
    }

    // median filter, both baseline windows
    for (const int window : {101, 301}) {
        std::vector<double> x(T);
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        std::vector<double> y_fast, y_ref;
        const double fast = time_ms([&] { y_fast = kernels::median_filter(x, window); }, 5);
        const double ref = time_ms([&] { y_ref = reference::median_filter(x, window); }, 5);
        std::printf("median_filter    w=%3d    T=%d: kernel %8.2f ms, reference %8.2f ms, speedup %5.2fx, match %s\n",
                    window, T, fast, ref, ref / fast,
                    bit_equal(y_fast, y_ref) ? "yes" : "NO");
    }
    return 0;
}

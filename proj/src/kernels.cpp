#include "ecgseg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecgseg::kernels {

void conv1d_forward(const Tensor1d& x, const ConvLayer& layer, Tensor1d& y) {
    const int in_c = layer.in_channels;
    const int out_c = layer.out_channels;
    const int K = layer.kernel_size;
    const int P = (K - 1) / 2;
    const int T = x.length;

    if (x.channels != in_c)
        throw std::invalid_argument("conv1d_forward: input has " +
                                    std::to_string(x.channels) +
                                    " channels, layer expects " + std::to_string(in_c));
    if (!(y.channels == out_c && y.length == T)) y = Tensor1d(out_c, T);

#pragma omp parallel for schedule(static)
    for (int o = 0; o < out_c; ++o) {
        double* yo = y.row(o);
        const double b = layer.bias[o];
        for (int t = 0; t < T; ++t) yo[t] = b;
        for (int i = 0; i < in_c; ++i) {
            const double* xi = x.row(i);
            for (int k = 0; k < K; ++k) {
                const double wv = layer.w(o, i, k);
                const int off = k - P;
                const int t0 = std::max(0, -off);
                const int t1 = std::min(T, T - off);
                for (int t = t0; t < t1; ++t) yo[t] += wv * xi[t + off];
            }
        }
        if (layer.activation == Activation::Relu) {
            for (int t = 0; t < T; ++t) yo[t] = yo[t] > 0.0 ? yo[t] : 0.0;
        }
    }
}

void conv1d_backward_data(const Tensor1d& g, const ConvLayer& layer, Tensor1d& dx) {
    const int in_c = layer.in_channels;
    const int out_c = layer.out_channels;
    const int K = layer.kernel_size;
    const int P = (K - 1) / 2;
    const int T = g.length;

    if (g.channels != out_c)
        throw std::invalid_argument("conv1d_backward_data: gradient channel mismatch");
    if (!(dx.channels == in_c && dx.length == T)) dx = Tensor1d(in_c, T);

#pragma omp parallel for schedule(static)
    for (int i = 0; i < in_c; ++i) {
        double* dxi = dx.row(i);
        for (int t = 0; t < T; ++t) dxi[t] = 0.0;
        for (int o = 0; o < out_c; ++o) {
            const double* go = g.row(o);
            for (int k = 0; k < K; ++k) {
                const double wv = layer.w(o, i, k);
                const int off = P - k;  // dx[s] += w * g[s + off]
                const int s0 = std::max(0, -off);
                const int s1 = std::min(T, T - off);
                for (int s = s0; s < s1; ++s) dxi[s] += wv * go[s + off];
            }
        }
    }
}

void conv1d_backward_params(const Tensor1d& g, const Tensor1d& x,
                            const ConvLayer& layer, LayerGrads& grads) {
    const int in_c = layer.in_channels;
    const int out_c = layer.out_channels;
    const int K = layer.kernel_size;
    const int P = (K - 1) / 2;
    const int T = g.length;

    if (g.channels != out_c || x.channels != in_c || x.length != T)
        throw std::invalid_argument("conv1d_backward_params: shape mismatch");
    grads.weights.assign(layer.weights.size(), 0.0);
    grads.bias.assign(layer.bias.size(), 0.0);

#pragma omp parallel for schedule(static)
    for (int o = 0; o < out_c; ++o) {
        const double* go = g.row(o);
        double db = 0.0;
        for (int t = 0; t < T; ++t) db += go[t];
        grads.bias[o] = db;
        for (int i = 0; i < in_c; ++i) {
            const double* xi = x.row(i);
            for (int k = 0; k < K; ++k) {
                const int off = k - P;
                const int t0 = std::max(0, -off);
                const int t1 = std::min(T, T - off);
                double dw = 0.0;
                for (int t = t0; t < t1; ++t) dw += go[t] * xi[t + off];
                grads.weights[(static_cast<std::size_t>(o) * in_c + i) * K + k] = dw;
            }
        }
    }
}

void relu_backward_inplace(Tensor1d& g, const Tensor1d& post) {
    if (!g.same_shape(post))
        throw std::invalid_argument("relu_backward_inplace: shape mismatch");
    const std::size_t n = g.data.size();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(n); ++idx) {
        if (!(post.data[idx] > 0.0)) g.data[idx] = 0.0;
    }
}

std::vector<double> median_filter(const std::vector<double>& x, int window) {
    const int n = static_cast<int>(x.size());
    if (window < 1 || window > n)
        throw std::invalid_argument("median_filter: window must satisfy 1 <= window <= signal length");
    if (window % 2 == 0)
        throw std::invalid_argument("median_filter: window must be odd, got " +
                                    std::to_string(window));
    const int half = (window - 1) / 2;
    std::vector<double> y(n);

#pragma omp parallel
    {
        std::vector<double> buf(window);
#pragma omp for schedule(static)
        for (int t = 0; t < n; ++t) {
            for (int j = -half; j <= half; ++j) {
                const int s = std::clamp(t + j, 0, n - 1);  // replicate padding
                buf[j + half] = x[s];
            }
            std::nth_element(buf.begin(), buf.begin() + half, buf.end());
            y[t] = buf[half];
        }
    }
    return y;
}

}  // namespace ecgseg::kernels

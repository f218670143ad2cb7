#include "ecgseg/reference.hpp"

#include <algorithm>
#include <stdexcept>

namespace ecgseg::reference {

Tensor1d conv1d_forward(const Tensor1d& x, const ConvLayer& layer) {
    if (x.channels != layer.in_channels)
        throw std::invalid_argument("reference conv1d_forward: channel mismatch");
    const int T = x.length;
    const int P = (layer.kernel_size - 1) / 2;
    Tensor1d y(layer.out_channels, T);
    for (int o = 0; o < layer.out_channels; ++o) {
        for (int t = 0; t < T; ++t) {
            double acc = layer.bias[o];
            for (int i = 0; i < layer.in_channels; ++i) {
                for (int k = 0; k < layer.kernel_size; ++k) {
                    const int s = t + k - P;
                    if (s >= 0 && s < T) acc += layer.w(o, i, k) * x.at(i, s);
                }
            }
            if (layer.activation == Activation::Relu && acc < 0.0) acc = 0.0;
            y.at(o, t) = acc;
        }
    }
    return y;
}

Tensor1d conv1d_backward_data(const Tensor1d& g, const ConvLayer& layer,
                              int input_length) {
    const int T = input_length;
    const int P = (layer.kernel_size - 1) / 2;
    Tensor1d dx(layer.in_channels, T);
    for (int i = 0; i < layer.in_channels; ++i) {
        for (int s = 0; s < T; ++s) {
            double acc = 0.0;
            for (int o = 0; o < layer.out_channels; ++o) {
                for (int k = 0; k < layer.kernel_size; ++k) {
                    const int t = s - k + P;
                    if (t >= 0 && t < g.length) acc += layer.w(o, i, k) * g.at(o, t);
                }
            }
            dx.at(i, s) = acc;
        }
    }
    return dx;
}

LayerGrads conv1d_backward_params(const Tensor1d& g, const Tensor1d& x,
                                  const ConvLayer& layer) {
    const int T = g.length;
    const int P = (layer.kernel_size - 1) / 2;
    LayerGrads grads;
    grads.weights.assign(layer.weights.size(), 0.0);
    grads.bias.assign(layer.bias.size(), 0.0);
    for (int o = 0; o < layer.out_channels; ++o) {
        double db = 0.0;
        for (int t = 0; t < T; ++t) db += g.at(o, t);
        grads.bias[o] = db;
        for (int i = 0; i < layer.in_channels; ++i) {
            for (int k = 0; k < layer.kernel_size; ++k) {
                double dw = 0.0;
                for (int t = 0; t < T; ++t) {
                    const int s = t + k - P;
                    if (s >= 0 && s < T) dw += g.at(o, t) * x.at(i, s);
                }
                grads.weights[(static_cast<std::size_t>(o) * layer.in_channels + i) *
                                  layer.kernel_size +
                              k] = dw;
            }
        }
    }
    return grads;
}

std::vector<double> median_filter(const std::vector<double>& x, int window) {
    const int n = static_cast<int>(x.size());
    if (window < 1 || window > n)
        throw std::invalid_argument("median_filter: window must satisfy 1 <= window <= signal length");
    if (window % 2 == 0)
        throw std::invalid_argument("median_filter: window must be odd");
    const int half = (window - 1) / 2;
    std::vector<double> y(n);
    std::vector<double> buf(window);
    for (int t = 0; t < n; ++t) {
        for (int j = -half; j <= half; ++j) {
            const int s = std::clamp(t + j, 0, n - 1);
            buf[j + half] = x[s];
        }
        std::sort(buf.begin(), buf.end());
        y[t] = buf[half];
    }
    return y;
}

}  // namespace ecgseg::reference

#pragma once

// OpenMP-parallel compute kernels. Each kernel accumulates every output
// element in the same order as its serial counterpart in
// ecgseg/reference.hpp, so results are bit-identical regardless of thread
// count; tests and the benchmark tool compare the two paths.

#include <vector>

#include "ecgseg/nnet.hpp"
#include "ecgseg/tensor.hpp"

namespace ecgseg::kernels {

// y[o][t] = act(bias[o] + sum_i sum_k w[o][i][k] * x[i][t + k - (K-1)/2]),
// zero padding outside [0, T).
void conv1d_forward(const Tensor1d& x, const ConvLayer& layer, Tensor1d& y);

// dx[i][s] = sum_o sum_k w[o][i][k] * g[o][s - k + (K-1)/2]
void conv1d_backward_data(const Tensor1d& g, const ConvLayer& layer, Tensor1d& dx);

// dw[o][i][k] = sum_t g[o][t] * x[i][t + k - (K-1)/2];  db[o] = sum_t g[o][t]
void conv1d_backward_params(const Tensor1d& g, const Tensor1d& x,
                            const ConvLayer& layer, LayerGrads& grads);

// In-place: g[c][t] = 0 where post[c][t] <= 0 (relu mask from the
// post-activation values).
void relu_backward_inplace(Tensor1d& g, const Tensor1d& post);

// Sliding median with replicate padding, parallel across positions.
std::vector<double> median_filter(const std::vector<double>& x, int window);

}  // namespace ecgseg::kernels

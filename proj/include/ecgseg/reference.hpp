#pragma once

// Serial reference implementations kept for testing and benchmarking. These
// are the plainest possible formulations (triple loops, full window sort) and
// serve as oracles for the OpenMP kernels in ecgseg/kernels.hpp.

#include <vector>

#include "ecgseg/nnet.hpp"
#include "ecgseg/tensor.hpp"

namespace ecgseg::reference {

Tensor1d conv1d_forward(const Tensor1d& x, const ConvLayer& layer);

Tensor1d conv1d_backward_data(const Tensor1d& g, const ConvLayer& layer, int input_length);

LayerGrads conv1d_backward_params(const Tensor1d& g, const Tensor1d& x,
                                  const ConvLayer& layer);

std::vector<double> median_filter(const std::vector<double>& x, int window);

}  // namespace ecgseg::reference

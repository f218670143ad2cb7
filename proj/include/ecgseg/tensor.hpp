#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ecgseg {

// Channel-major 1-D tensor: data[c * length + t].
struct Tensor1d {
    int channels = 0;
    int length = 0;
    std::vector<double> data;

    Tensor1d() = default;
    Tensor1d(int c, int l, double fill = 0.0)
        : channels(c), length(l),
          data(static_cast<std::size_t>(c) * static_cast<std::size_t>(l), fill) {
        if (c < 0 || l < 0) throw std::invalid_argument("Tensor1d: negative shape");
    }

    double& at(int c, int t) {
        return data[static_cast<std::size_t>(c) * length + t];
    }
    double at(int c, int t) const {
        return data[static_cast<std::size_t>(c) * length + t];
    }
    double* row(int c) { return data.data() + static_cast<std::size_t>(c) * length; }
    const double* row(int c) const {
        return data.data() + static_cast<std::size_t>(c) * length;
    }
    bool same_shape(const Tensor1d& o) const {
        return channels == o.channels && length == o.length;
    }
};

}  // namespace ecgseg

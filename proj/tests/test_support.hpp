#pragma once

// Shared test fixtures and independent oracles. Everything here is test-only
// and deliberately brute force; implementation code must never include it.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ecgseg/dataset.hpp"
#include "ecgseg/nnet.hpp"
#include "ecgseg/tensor.hpp"

namespace testsupport {

using namespace ecgseg;

inline Tensor1d random_tensor(int channels, int length, Rng& rng, double lo = -1.0,
                              double hi = 1.0) {
    Tensor1d x(channels, length);
    for (auto& v : x.data) v = rng.uniform(lo, hi);
    return x;
}

inline Tensor1d random_one_hot(int channels, int length, Rng& rng) {
    Tensor1d y(channels, length);
    for (int t = 0; t < length; ++t) y.at(rng.uniform_int(channels), t) = 1.0;
    return y;
}

// in_channels 0 draws a random input width (gradient checks); single-lead
// inference tests pass 1.
inline ModelParams random_small_model(Rng& rng, int out_channels = 4,
                                      int in_channels = 0) {
    // 2-3 layers, small widths, odd kernels.
    const int n_layers = 2 + rng.uniform_int(2);
    Architecture arch;
    arch.widths = {in_channels > 0 ? in_channels : 1 + rng.uniform_int(3)};
    arch.kernels.clear();
    for (int l = 0; l < n_layers; ++l) {
        arch.widths.push_back(l + 1 == n_layers ? out_channels : 1 + rng.uniform_int(4));
        arch.kernels.push_back(1 + 2 * rng.uniform_int(3));  // 1, 3 or 5
    }
    return make_model(arch, rng.next_u64());
}

// Smallest |pre-activation| over all relu layers: the distance to the nearest
// kink. Central differences are only a valid oracle when no kink lies inside
// the probe interval, so gradient checks reject draws where this is tiny
// (zero biases plus dead input windows put units exactly on the kink).
inline double min_relu_gap(const ModelParams& model, const Tensor1d& x) {
    double gap = std::numeric_limits<double>::infinity();
    Tensor1d a = x;
    for (const auto& layer : model.layers) {
        ConvLayer linear = layer;
        linear.activation = Activation::None;
        Tensor1d z = conv1d_forward(a, linear);
        if (layer.activation == Activation::Relu) {
            for (double v : z.data) gap = std::min(gap, std::abs(v));
            for (auto& v : z.data) v = v > 0.0 ? v : 0.0;
        }
        a = std::move(z);
    }
    return gap;
}

struct FdCase {
    ModelParams model;
    Tensor1d x;
    Tensor1d target;
};

inline FdCase fd_safe_case(Rng& rng, double kink_margin = 1e-3) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        FdCase c;
        c.model = random_small_model(rng);
        const int T = 3 + rng.uniform_int(5);
        c.x = random_tensor(c.model.layers.front().in_channels, T, rng);
        c.target = random_one_hot(4, T, rng);
        if (min_relu_gap(c.model, c.x) >= kink_margin) return c;
    }
    throw std::runtime_error("fd_safe_case: no kink-safe draw found");
}

// Central finite differences of cross_entropy_loss(forward(x), target) with
// respect to every parameter.
inline Gradients fd_gradients(const Tensor1d& x, const Tensor1d& target,
                              ModelParams model, double h = 1e-5) {
    Gradients grads = zero_gradients(model);
    auto loss_at = [&]() { return cross_entropy_loss(forward(x, model), target); };
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        for (std::size_t i = 0; i < model.layers[l].weights.size(); ++i) {
            double& w = model.layers[l].weights[i];
            const double saved = w;
            w = saved + h;
            const double up = loss_at();
            w = saved - h;
            const double down = loss_at();
            w = saved;
            grads[l].weights[i] = (up - down) / (2.0 * h);
        }
        for (std::size_t i = 0; i < model.layers[l].bias.size(); ++i) {
            double& b = model.layers[l].bias[i];
            const double saved = b;
            b = saved + h;
            const double up = loss_at();
            b = saved - h;
            const double down = loss_at();
            b = saved;
            grads[l].bias[i] = (up - down) / (2.0 * h);
        }
    }
    return grads;
}

// Worst relative disagreement between two gradient sets.
inline double max_relative_error(const Gradients& a, const Gradients& b) {
    double worst = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) {
        auto compare = [&](const std::vector<double>& u, const std::vector<double>& v) {
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double denom = std::max(std::abs(u[i]) + std::abs(v[i]), 1e-8);
                worst = std::max(worst, std::abs(u[i] - v[i]) / denom);
            }
        };
        compare(a[l].weights, b[l].weights);
        compare(a[l].bias, b[l].bias);
    }
    return worst;
}

// Exhaustive maximum-cardinality matching: tries every injective assignment
// of reference points to predicted points within the radius.
inline long exhaustive_match_tp(const std::vector<int>& reference,
                                const std::vector<int>& predicted,
                                double radius_ms, int sampling_rate) {
    const double ms_per_sample = 1000.0 / sampling_rate;
    std::vector<bool> used(predicted.size(), false);
    long best = 0;
    auto recurse = [&](auto&& self, std::size_t i, long matched) -> void {
        best = std::max(best, matched);
        if (i == reference.size()) return;
        self(self, i + 1, matched);  // reference point left unmatched
        for (std::size_t j = 0; j < predicted.size(); ++j) {
            if (used[j]) continue;
            if (std::abs((predicted[j] - reference[i]) * ms_per_sample) <= radius_ms) {
                used[j] = true;
                self(self, i + 1, matched + 1);
                used[j] = false;
            }
        }
    };
    recurse(recurse, 0, 0);
    return best;
}

// A minimal valid record: flat leads except the configured lead carries the
// given samples/annotations.
inline EcgRecord make_record(const std::string& id,
                             const std::vector<WaveAnnotation>& annos,
                             const std::vector<double>& lead_ii_samples = {}) {
    EcgRecord r;
    r.patient_id = id;
    r.sampling_rate = kSamplingRate;
    for (const char* lead : kLeadNames) {
        std::vector<double> samples(kRecordLength, 0.0);
        if (std::string(lead) == "ii" && !lead_ii_samples.empty())
            samples = lead_ii_samples;
        r.leads[lead] = std::move(samples);
        r.annotations[lead] = annos;
    }
    return r;
}

// One obvious repeating rectangular "QRS" pattern; trivially learnable.
inline EcgRecord square_wave_record(const std::string& id = "sq01") {
    std::vector<double> samples(kRecordLength, 0.0);
    std::vector<WaveAnnotation> annos;
    for (int start = 200; start + 60 < kRecordLength - 10; start += 500) {
        for (int t = start; t < start + 60; ++t) samples[t] = 1.0;
        annos.push_back({WaveType::QRS, start, start + 30, start + 59});
    }
    return make_record(id, annos, samples);
}

}  // namespace testsupport

#include "ecgseg/preprocess.hpp"

#include <cmath>
#include <stdexcept>

#include "ecgseg/kernels.hpp"

namespace ecgseg {

int window_samples(double window_ms, int sampling_rate) {
    if (window_ms <= 0.0)
        throw std::invalid_argument("window_samples: duration must be positive");
    int n = static_cast<int>(std::llround(window_ms * sampling_rate / 1000.0));
    if (n < 1) n = 1;
    if (n % 2 == 0) ++n;
    return n;
}

std::vector<double> median_filter(const std::vector<double>& x, int window) {
    return kernels::median_filter(x, window);
}

std::vector<double> remove_baseline(const std::vector<double>& x,
                                    const FilterSpec& spec, int sampling_rate) {
    const int w1 = window_samples(spec.window1_ms, sampling_rate);
    const int w2 = window_samples(spec.window2_ms, sampling_rate);
    if (w1 >= w2)
        throw std::invalid_argument("remove_baseline: window_1 must be shorter than window_2");
    if (static_cast<int>(x.size()) < w2)
        throw std::invalid_argument(
            "remove_baseline: signal of length " + std::to_string(x.size()) +
            " is shorter than the larger filter window (" + std::to_string(w2) + ")");

    const std::vector<double> baseline =
        kernels::median_filter(kernels::median_filter(x, w1), w2);
    std::vector<double> y(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) y[t] = x[t] - baseline[t];
    return y;
}

EcgRecord remove_baseline(const EcgRecord& record, const FilterSpec& spec) {
    EcgRecord out = record;
    for (auto& [name, samples] : out.leads)
        samples = remove_baseline(samples, spec, record.sampling_rate);
    return out;
}

}  // namespace ecgseg

#pragma once

#include <vector>

#include "ecgseg/dataset.hpp"

namespace ecgseg {

// Two cascaded median filters; the first removes QRS/P, the second removes T,
// leaving the baseline estimate to subtract.
struct FilterSpec {
    double window1_ms = 200.0;
    double window2_ms = 600.0;
};

// Converts a window duration to an odd sample count (even counts are bumped
// up by one so the window has a center sample). Throws for non-positive
// durations.
int window_samples(double window_ms, int sampling_rate);

// Sliding median with replicate padding; output length equals input length.
// Window must be odd and no longer than the signal.
std::vector<double> median_filter(const std::vector<double>& x, int window);

// x minus the cascaded-median baseline estimate.
std::vector<double> remove_baseline(const std::vector<double>& x,
                                    const FilterSpec& spec,
                                    int sampling_rate = kSamplingRate);

// Applies remove_baseline to every lead of a record.
EcgRecord remove_baseline(const EcgRecord& record, const FilterSpec& spec);

}  // namespace ecgseg

#pragma once

#include <array>
#include <vector>

#include "ecgseg/dataset.hpp"
#include "ecgseg/nnet.hpp"
#include "ecgseg/train.hpp"

namespace ecgseg {

// Default minimum run length for decoded waves: 20 ms at 500 Hz. Set to 1 to
// keep every run (no decoding rule at all); the value in force is recorded in
// reports.
inline constexpr int kDefaultMinRun = 10;

// Per-time-step argmax of the 4 channels; exactly one channel set per step.
struct WinnerMask {
    int length = 0;
    std::array<std::vector<std::uint8_t>, kNumChannels> channels;

    int winner(int t) const {
        for (int c = 0; c < kNumChannels; ++c)
            if (channels[c][t]) return c;
        return -1;
    }
};

// Ties go to the lowest channel index (P < QRS < T < background).
WinnerMask winner_mask(const Tensor1d& probs);

struct WaveRun {
    int onset = 0;
    int offset = 0;
};

struct PredictedPoints {
    std::array<std::vector<WaveRun>, 3> runs;  // indexed by WaveType

    std::vector<int> onsets(WaveType type) const;
    std::vector<int> offsets(WaveType type) const;
};

// Maximal runs of each wave channel; runs shorter than min_run are dropped.
PredictedPoints extract_points(const WinnerMask& mask, int min_run = kDefaultMinRun);

// Interchange-schema annotations for the decoded runs; the peak is the
// argmax-probability index inside each run.
std::vector<WaveAnnotation> predicted_annotations(const PredictedPoints& points,
                                                  const Tensor1d& probs);

// Raw network output for one lead signal.
Tensor1d infer_probs(const std::vector<double>& lead_signal, const ModelParams& model);

// Elementwise mean of the member probabilities (the mean of simplex columns
// stays on the simplex). Throws on an empty ensemble.
Tensor1d infer_probs(const std::vector<double>& lead_signal,
                     const std::vector<ModelParams>& members);

struct Inference {
    Tensor1d probs;
    WinnerMask mask;
    PredictedPoints points;
};

// record must already be baseline-corrected.
Inference infer(const EcgRecord& record, const std::string& lead,
                const std::vector<ModelParams>& members,
                int min_run = kDefaultMinRun);

}  // namespace ecgseg

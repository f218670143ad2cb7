#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ecgseg/dataset.hpp"
#include "ecgseg/nnet.hpp"
#include "ecgseg/tensor.hpp"

namespace ecgseg {

// Output channel order. Background is last so the winner tie-break
// P < QRS < T < background falls out of the index order.
inline constexpr int kChannelP = 0;
inline constexpr int kChannelQrs = 1;
inline constexpr int kChannelT = 2;
inline constexpr int kChannelBackground = 3;
inline constexpr int kNumChannels = 4;

struct TrainConfig {
    std::string lead = kDefaultLead;
    double window_seconds = 6.0;
    int batch_size = 8;
    int epochs = 50;
    // 0 means derive ceil(n_records / batch_size) * 4.
    int steps_per_epoch = 0;
    std::uint64_t seed = 0;
    double rho = 0.9;
    double learning_rate = 1e-3;
    double epsilon = 1e-8;
    Architecture arch;
    std::filesystem::path checkpoint_path;  // empty: do not write
    std::filesystem::path loss_log_path;    // empty: do not write
};

// One-hot 4xlength target. Wave channels cover [onset, offset] inclusive;
// the background channel covers everything else. Cross-type collisions are
// resolved by precedence QRS > P > T and reported through `warnings`.
Tensor1d rasterize_targets(const std::vector<WaveAnnotation>& annotations,
                           int length,
                           std::vector<std::string>* warnings = nullptr);

// Uniform window start in [0, length - window].
int sample_window_start(int record_length, int window, Rng& rng);

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<double> epoch_losses;
};

// Mini-batch RMSProp on randomly positioned windows of randomly chosen
// patients. Deterministic for a fixed (records, config) pair.
TrainResult train_base(const std::vector<EcgRecord>& records,
                       const TrainConfig& config,
                       const std::function<void(int, double)>& on_epoch = {});

// Loss log format: one "epoch,mean_loss" line per epoch.
void write_loss_log(const std::vector<double>& epoch_losses,
                    const std::filesystem::path& path);

}  // namespace ecgseg

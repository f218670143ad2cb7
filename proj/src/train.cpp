#include "ecgseg/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace ecgseg {

Tensor1d rasterize_targets(const std::vector<WaveAnnotation>& annotations,
                           int length, std::vector<std::string>* warnings) {
    Tensor1d target(kNumChannels, length);
    std::vector<int> owner(length, kChannelBackground);

    // Paint in ascending precedence so QRS overwrites P overwrites T.
    const WaveType order[3] = {WaveType::T, WaveType::P, WaveType::QRS};
    const int channel_of[3] = {kChannelP, kChannelQrs, kChannelT};
    for (const WaveType type : order) {
        for (const auto& a : annotations) {
            if (a.type != type) continue;
            if (a.onset < 0 || a.offset >= length || a.onset > a.peak || a.peak > a.offset)
                throw std::invalid_argument("rasterize_targets: invalid annotation (" +
                                            std::to_string(a.onset) + ", " +
                                            std::to_string(a.peak) + ", " +
                                            std::to_string(a.offset) + ")");
            const int channel = channel_of[static_cast<int>(a.type)];
            bool conflict = false;
            for (int t = a.onset; t <= a.offset; ++t) {
                if (owner[t] != kChannelBackground && owner[t] != channel) conflict = true;
                owner[t] = channel;
            }
            if (conflict && warnings)
                warnings->push_back(std::string("overlap: ") + wave_type_name(a.type) +
                                    " wave [" + std::to_string(a.onset) + ", " +
                                    std::to_string(a.offset) +
                                    "] collides with another wave type; precedence QRS > P > T applied");
        }
    }

    for (int t = 0; t < length; ++t) target.at(owner[t], t) = 1.0;
    return target;
}

int sample_window_start(int record_length, int window, Rng& rng) {
    if (window > record_length)
        throw std::invalid_argument("sample_window_start: window " + std::to_string(window) +
                                    " exceeds record length " + std::to_string(record_length));
    return rng.uniform_int(record_length - window + 1);
}

namespace {

Tensor1d slice_columns(const Tensor1d& x, int start, int count) {
    Tensor1d y(x.channels, count);
    for (int c = 0; c < x.channels; ++c) {
        const double* src = x.row(c) + start;
        double* dst = y.row(c);
        for (int t = 0; t < count; ++t) dst[t] = src[t];
    }
    return y;
}

}  // namespace

TrainResult train_base(const std::vector<EcgRecord>& records,
                       const TrainConfig& config,
                       const std::function<void(int, double)>& on_epoch) {
    if (records.empty())
        throw std::invalid_argument("train_base: training set is empty");
    if (config.batch_size < 1)
        throw std::invalid_argument("train_base: batch_size must be >= 1");
    const int window =
        static_cast<int>(std::llround(config.window_seconds * kSamplingRate));
    if (window > kRecordLength)
        throw std::invalid_argument("train_base: window exceeds record length");

    const int n = static_cast<int>(records.size());
    const int steps_per_epoch =
        config.steps_per_epoch > 0
            ? config.steps_per_epoch
            : ((n + config.batch_size - 1) / config.batch_size) * 4;

    // Inputs and rasterized targets are fixed for the whole run.
    std::vector<Tensor1d> inputs(n);
    std::vector<Tensor1d> targets(n);
    for (int i = 0; i < n; ++i) {
        const auto& lead = select_lead(records[i], config.lead);
        Tensor1d x(1, static_cast<int>(lead.size()));
        std::copy(lead.begin(), lead.end(), x.row(0));
        inputs[i] = std::move(x);
        targets[i] = rasterize_targets(lead_annotations(records[i], config.lead),
                                       static_cast<int>(lead.size()));
    }

    ModelParams model = make_model(config.arch, derive_seed(config.seed, "init"));
    OptimizerState opt =
        make_optimizer(model, config.rho, config.learning_rate, config.epsilon);
    Rng rng(derive_seed(config.seed, "batch"));

    std::vector<double> epoch_losses;
    epoch_losses.reserve(config.epochs);

    std::vector<Gradients> item_grads(config.batch_size);
    std::vector<double> item_loss(config.batch_size);
    std::vector<std::pair<int, int>> picks(config.batch_size);  // (record, start)

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double loss_sum = 0.0;
        for (int step = 0; step < steps_per_epoch; ++step) {
            // Draws happen serially so the sequence is fixed; the heavy
            // forward/backward per item fans out below.
            for (int b = 0; b < config.batch_size; ++b) {
                const int rec = rng.uniform_int(n);
                const int start =
                    sample_window_start(inputs[rec].length, window, rng);
                picks[b] = {rec, start};
            }

#pragma omp parallel for schedule(dynamic, 1)
            for (int b = 0; b < config.batch_size; ++b) {
                const auto [rec, start] = picks[b];
                const Tensor1d x = slice_columns(inputs[rec], start, window);
                const Tensor1d y = slice_columns(targets[rec], start, window);
                const ForwardTrace trace = forward_trace(x, model);
                item_loss[b] = cross_entropy_loss(trace.probs, y);
                item_grads[b] = backward(trace, y, model);
            }

            // Reduce in index order: deterministic regardless of thread count.
            Gradients batch_grads = zero_gradients(model);
            double batch_loss = 0.0;
            for (int b = 0; b < config.batch_size; ++b) {
                accumulate(batch_grads, item_grads[b]);
                batch_loss += item_loss[b];
            }
            scale(batch_grads, 1.0 / config.batch_size);
            batch_loss /= config.batch_size;

            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train_base: non-finite loss at epoch " +
                                         std::to_string(epoch + 1) + " step " +
                                         std::to_string(step + 1));
            rmsprop_step(model, batch_grads, opt);
            loss_sum += batch_loss;
        }
        const double mean_loss = loss_sum / steps_per_epoch;
        epoch_losses.push_back(mean_loss);
        if (on_epoch) on_epoch(epoch + 1, mean_loss);
    }

    TrainResult result;
    result.checkpoint.model = std::move(model);
    result.checkpoint.optimizer = std::move(opt);
    result.checkpoint.seed = config.seed;
    result.epoch_losses = std::move(epoch_losses);

    if (!config.checkpoint_path.empty())
        save_checkpoint(result.checkpoint, config.checkpoint_path);
    if (!config.loss_log_path.empty())
        write_loss_log(result.epoch_losses, config.loss_log_path);
    return result;
}

void write_loss_log(const std::vector<double>& epoch_losses,
                    const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write loss log: " + path.string());
    out << "epoch,mean_loss\n";
    char buf[64];
    for (std::size_t i = 0; i < epoch_losses.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.9g\n", i + 1, epoch_losses[i]);
        out << buf;
    }
}

}  // namespace ecgseg

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ecgseg/synth.hpp"
#include "ecgseg/train.hpp"
#include "test_support.hpp"

using namespace ecgseg;
using namespace testsupport;

TEST_CASE("rasterize_targets background everywhere without annotations") {
    const Tensor1d y = rasterize_targets({}, 100);
    for (int t = 0; t < 100; ++t) {
        CHECK(y.at(kChannelBackground, t) == 1.0);
        CHECK(y.at(kChannelP, t) == 0.0);
        CHECK(y.at(kChannelQrs, t) == 0.0);
        CHECK(y.at(kChannelT, t) == 0.0);
    }
}

TEST_CASE("rasterize_targets paints a single QRS inclusively") {
    const Tensor1d y = rasterize_targets({{WaveType::QRS, 100, 120, 140}}, 200);
    for (int t = 0; t < 200; ++t) {
        const bool in_wave = t >= 100 && t <= 140;
        CHECK(y.at(kChannelQrs, t) == (in_wave ? 1.0 : 0.0));
        CHECK(y.at(kChannelBackground, t) == (in_wave ? 0.0 : 1.0));
    }
}

TEST_CASE("rasterize_targets keeps adjacent waves one-hot") {
    const Tensor1d y = rasterize_targets(
        {{WaveType::P, 90, 95, 99}, {WaveType::QRS, 100, 120, 140}}, 200);
    for (int t = 0; t < 200; ++t) {
        double sum = 0.0;
        for (int c = 0; c < kNumChannels; ++c) sum += y.at(c, t);
        CHECK(sum == 1.0);  // exhaustive one-hot scan
    }
    CHECK(y.at(kChannelP, 99) == 1.0);
    CHECK(y.at(kChannelQrs, 100) == 1.0);
}

TEST_CASE("rasterize_targets applies QRS > P > T precedence with a warning") {
    std::vector<std::string> warnings;
    const Tensor1d y = rasterize_targets(
        {{WaveType::T, 100, 110, 130}, {WaveType::QRS, 120, 130, 150}}, 200,
        &warnings);
    CHECK(y.at(kChannelQrs, 125) == 1.0);
    CHECK(y.at(kChannelT, 125) == 0.0);
    CHECK(y.at(kChannelT, 115) == 1.0);
    REQUIRE(!warnings.empty());
    CHECK(warnings[0].find("overlap") != std::string::npos);

    // P loses to QRS too.
    warnings.clear();
    const Tensor1d y2 = rasterize_targets(
        {{WaveType::P, 100, 105, 125}, {WaveType::QRS, 120, 130, 150}}, 200,
        &warnings);
    CHECK(y2.at(kChannelQrs, 122) == 1.0);
    CHECK(!warnings.empty());
}

TEST_CASE("rasterize_targets property: one-hot for synthetic annotations") {
    Rng rng(31);
    for (int trial = 0; trial < 8; ++trial) {
        const EcgRecord r = synth_record("p", rng.next_u64());
        const Tensor1d y =
            rasterize_targets(lead_annotations(r, "ii"), kRecordLength);
        for (int t = 0; t < kRecordLength; ++t) {
            double sum = 0.0;
            for (int c = 0; c < kNumChannels; ++c) sum += y.at(c, t);
            REQUIRE(sum == 1.0);
        }
    }
}

TEST_CASE("sample_window_start covers the single-choice case") {
    Rng rng(1);
    for (int i = 0; i < 10; ++i) CHECK(sample_window_start(3000, 3000, rng) == 0);
    CHECK_THROWS_AS(sample_window_start(100, 101, rng), std::invalid_argument);
}

TEST_CASE("sample_window_start is reproducible under a fixed seed") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i)
        CHECK(sample_window_start(5000, 3000, a) == sample_window_start(5000, 3000, b));
}

TEST_CASE("sample_window_start draws uniformly (chi-squared)") {
    // 10^5 draws over [0, 2000], 23 bins of 87 values each.
    // Critical value chi2(df=22, p=0.999) = 48.268.
    Rng rng(123);
    const int draws = 100000;
    const int bins = 23;
    const int values = 2001;
    std::vector<long> counts(bins, 0);
    for (int i = 0; i < draws; ++i) {
        const int s = sample_window_start(5000, 3000, rng);
        REQUIRE(s >= 0);
        REQUIRE(s <= 2000);
        ++counts[s / (values / bins)];
    }
    const double expected = static_cast<double>(draws) / bins;
    double chi2 = 0.0;
    for (long c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 48.268);
}

namespace {

TrainConfig small_config(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.lead = "ii";
    cfg.window_seconds = 6.0;
    cfg.batch_size = 2;
    cfg.epochs = 2;
    cfg.steps_per_epoch = 3;
    cfg.seed = seed;
    cfg.arch.widths = {1, 6, 6, 4};
    cfg.arch.kernels = {9, 9, 1};
    return cfg;
}

}  // namespace

TEST_CASE("training loss starts near ln 4") {
    const EcgRecord record = square_wave_record();
    TrainConfig cfg = small_config(7);
    cfg.epochs = 1;
    cfg.steps_per_epoch = 1;
    cfg.learning_rate = 0.0;  // epoch mean equals the untouched initial loss
    const TrainResult result = train_base({record}, cfg);
    REQUIRE(result.epoch_losses.size() == 1);
    CHECK(result.epoch_losses[0] == doctest::Approx(std::log(4.0)).epsilon(0.25));
}

TEST_CASE("learning rate zero leaves parameters bit-identical") {
    const EcgRecord record = square_wave_record();
    TrainConfig cfg = small_config(8);
    cfg.learning_rate = 0.0;
    const TrainResult result = train_base({record}, cfg);
    const ModelParams untouched = make_model(cfg.arch, derive_seed(cfg.seed, "init"));
    REQUIRE(result.checkpoint.model.layers.size() == untouched.layers.size());
    for (std::size_t l = 0; l < untouched.layers.size(); ++l) {
        CHECK(result.checkpoint.model.layers[l].weights == untouched.layers[l].weights);
        CHECK(result.checkpoint.model.layers[l].bias == untouched.layers[l].bias);
    }
}

TEST_CASE("identical seeds give identical loss logs") {
    namespace fs = std::filesystem;
    const EcgRecord record = square_wave_record();
    TrainConfig cfg = small_config(9);
    const fs::path log_a = fs::temp_directory_path() / "ecgseg_loss_a.csv";
    const fs::path log_b = fs::temp_directory_path() / "ecgseg_loss_b.csv";
    cfg.loss_log_path = log_a;
    const TrainResult a = train_base({record}, cfg);
    cfg.loss_log_path = log_b;
    const TrainResult b = train_base({record}, cfg);
    CHECK(a.epoch_losses == b.epoch_losses);

    std::ifstream fa(log_a), fb(log_b);
    const std::string sa((std::istreambuf_iterator<char>(fa)), {});
    const std::string sb((std::istreambuf_iterator<char>(fb)), {});
    CHECK(sa == sb);
    CHECK(sa.find("epoch,mean_loss") == 0);
    fs::remove(log_a);
    fs::remove(log_b);
}

TEST_CASE("training overfits one synthetic square-wave record") {
    const EcgRecord record = square_wave_record();
    TrainConfig cfg;
    cfg.lead = "ii";
    cfg.batch_size = 4;
    cfg.epochs = 10;
    cfg.steps_per_epoch = 20;  // 200 steps total
    cfg.seed = 5;
    cfg.learning_rate = 2e-3;
    cfg.arch.widths = {1, 8, 8, 4};
    cfg.arch.kernels = {9, 9, 1};
    const TrainResult result = train_base({record}, cfg);
    CHECK(result.epoch_losses.back() < 0.05);
    CHECK(result.epoch_losses.back() < result.epoch_losses.front());
}

TEST_CASE("train_base rejects bad inputs") {
    CHECK_THROWS_AS(train_base({}, small_config(1)), std::invalid_argument);
    const EcgRecord record = square_wave_record();
    TrainConfig cfg = small_config(2);
    cfg.window_seconds = 20.0;  // longer than the record
    CHECK_THROWS_AS(train_base({record}, cfg), std::invalid_argument);
}

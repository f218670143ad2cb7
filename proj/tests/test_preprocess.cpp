#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ecgseg/common.hpp"
#include "ecgseg/preprocess.hpp"
#include "ecgseg/reference.hpp"

using namespace ecgseg;

namespace {

// Scalar brute-force median of the replicate-padded window; independent of
// both library implementations.
double window_median(const std::vector<double>& x, int center, int window) {
    const int half = (window - 1) / 2;
    std::vector<double> vals;
    for (int j = -half; j <= half; ++j) {
        const int s = std::clamp(center + j, 0, static_cast<int>(x.size()) - 1);
        vals.push_back(x[s]);
    }
    std::sort(vals.begin(), vals.end());
    return vals[half];
}

std::vector<double> oracle_median(const std::vector<double>& x, int window) {
    std::vector<double> y(x.size());
    for (std::size_t t = 0; t < x.size(); ++t)
        y[t] = window_median(x, static_cast<int>(t), window);
    return y;
}

}  // namespace

TEST_CASE("window_samples converts durations to odd counts") {
    CHECK(window_samples(200.0, 500) == 101);
    CHECK(window_samples(600.0, 500) == 301);
    CHECK(window_samples(2.0, 500) == 1);
    CHECK(window_samples(6.0, 500) == 3);
    CHECK_THROWS_AS(window_samples(0.0, 500), std::invalid_argument);
}

TEST_CASE("median_filter fixed points") {
    CHECK(median_filter({5, 5, 5, 5, 5}, 3) == std::vector<double>{5, 5, 5, 5, 5});
    CHECK(median_filter({1, 2, 3, 4, 5}, 3) == std::vector<double>{1, 2, 3, 4, 5});
}

TEST_CASE("median_filter removes an isolated spike") {
    // Hand enumeration: every 3-window around the spike has two zeros.
    CHECK(median_filter({0, 0, 10, 0, 0}, 3) == std::vector<double>{0, 0, 0, 0, 0});
}

TEST_CASE("median_filter rejects bad windows") {
    CHECK_THROWS_AS(median_filter({1, 2, 3}, 2), std::invalid_argument);
    CHECK_THROWS_AS(median_filter({1, 2, 3}, 5), std::invalid_argument);
    CHECK_THROWS_AS(median_filter({1, 2, 3}, 0), std::invalid_argument);
}

TEST_CASE("median_filter matches the scalar oracle and the serial reference") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 20 + rng.uniform_int(400);
        const int window = 1 + 2 * rng.uniform_int(std::min(n, 31) / 2);
        std::vector<double> x(n);
        for (auto& v : x) v = rng.uniform(-3.0, 3.0);
        const auto fast = median_filter(x, window);
        const auto oracle = oracle_median(x, window);
        const auto serial = reference::median_filter(x, window);
        CHECK(fast == oracle);
        CHECK(fast == serial);
    }
}

TEST_CASE("median_filter output values come from the padded input") {
    Rng rng(11);
    std::vector<double> x(200);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    const auto y = median_filter(x, 15);
    for (double v : y)
        CHECK(std::find(x.begin(), x.end(), v) != x.end());
}

TEST_CASE("remove_baseline zeroes constants and ramps") {
    std::vector<double> constant(2000, 3.25);
    FilterSpec spec;
    auto corrected = remove_baseline(constant, spec);
    REQUIRE(corrected.size() == constant.size());
    for (double v : corrected) CHECK(v == 0.0);

    std::vector<double> ramp(2000);
    for (std::size_t t = 0; t < ramp.size(); ++t) ramp[t] = 0.001 * t - 1.0;
    corrected = remove_baseline(ramp, spec);
    for (double v : corrected) CHECK(v == 0.0);
}

TEST_CASE("remove_baseline keeps a narrow spike on a ramp") {
    FilterSpec spec;
    std::vector<double> x(2000);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] = 0.0005 * t;
    x[1000] += 2.0;  // narrow spike, far narrower than window_1

    // Oracle: cascade of the scalar brute-force medians.
    const int w1 = window_samples(spec.window1_ms, 500);
    const int w2 = window_samples(spec.window2_ms, 500);
    const auto baseline = oracle_median(oracle_median(x, w1), w2);
    const auto corrected = remove_baseline(x, spec);
    for (std::size_t t = 0; t < x.size(); ++t)
        CHECK(corrected[t] == x[t] - baseline[t]);

    // The ramp is gone, the spike survives (the spike displaces the window
    // median by one ramp step, hence the 0.0005 slack).
    CHECK(corrected[1000] == doctest::Approx(2.0).epsilon(1e-3));
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (t < 900 || t > 1100) CHECK(corrected[t] == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("remove_baseline rejects short signals") {
    std::vector<double> x(100, 1.0);
    CHECK_THROWS_AS(remove_baseline(x, FilterSpec{}), std::invalid_argument);
}

TEST_CASE("remove_baseline amplitude-shift invariance is exact on a grid") {
    // Signals on the 2^-10 grid: x + c and the median subtraction stay exact
    // in double precision, so invariance holds bitwise.
    Rng rng(23);
    std::vector<double> x(1500);
    for (auto& v : x) v = rng.uniform_int(4096) * 0x1.0p-10 - 2.0;
    FilterSpec spec;
    const auto base = remove_baseline(x, spec);
    for (const double c : {1.0, -2.0, 0.5, 100.0, 12.25}) {
        std::vector<double> shifted(x.size());
        for (std::size_t t = 0; t < x.size(); ++t) shifted[t] = x[t] + c;
        const auto corrected = remove_baseline(shifted, spec);
        CHECK(corrected == base);
    }
}

TEST_CASE("record-level remove_baseline treats every lead") {
    EcgRecord r;
    r.patient_id = "x";
    for (const char* lead : kLeadNames)
        r.leads[lead] = std::vector<double>(kRecordLength, 1.5);
    const EcgRecord corrected = remove_baseline(r, FilterSpec{});
    for (const auto& [name, samples] : corrected.leads) {
        REQUIRE(samples.size() == kRecordLength);
        for (double v : samples) CHECK(v == 0.0);
    }
}

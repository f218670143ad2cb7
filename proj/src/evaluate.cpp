#include "ecgseg/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecgseg {

const char* point_type_name(PointType t) {
    switch (t) {
        case PointType::PBegin: return "p_begin";
        case PointType::PEnd: return "p_end";
        case PointType::QrsBegin: return "qrs_begin";
        case PointType::QrsEnd: return "qrs_end";
        case PointType::TBegin: return "t_begin";
        case PointType::TEnd: return "t_end";
    }
    return "?";
}

double radius_for_heart_rate(double hr_bpm) {
    if (!(hr_bpm > 0.0))
        throw std::invalid_argument("radius_for_heart_rate: heart rate must be positive");
    return std::min(kRadiusCapMs, kRadiusCapMs * kRadiusReferenceHr / hr_bpm);
}

double tolerance_radius_ms(const std::vector<int>& reference_qrs_onsets,
                           int sampling_rate, bool* fell_back) {
    if (fell_back) *fell_back = false;
    if (reference_qrs_onsets.size() < 2) {
        if (fell_back) *fell_back = true;
        return kRadiusCapMs;
    }
    const double n_intervals =
        static_cast<double>(reference_qrs_onsets.size()) - 1.0;
    const double mean_interval_samples =
        (reference_qrs_onsets.back() - reference_qrs_onsets.front()) / n_intervals;
    const double mean_interval_ms = mean_interval_samples * 1000.0 / sampling_rate;
    const double hr = 60000.0 / mean_interval_ms;
    return radius_for_heart_rate(hr);
}

void TypeMatch::merge(const TypeMatch& other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    errors_ms.insert(errors_ms.end(), other.errors_ms.begin(), other.errors_ms.end());
}

// Non-crossing optimal matching over the two sorted lists: maximize the match
// count, then minimize the total absolute error. A plain greedy
// nearest-neighbour scan can drop a feasible pair (e.g. reference {10, 18},
// predicted {3, 11}, radius 16 ms at 500 Hz), so the table is exact.
TypeMatch match_points(const std::vector<int>& reference,
                       const std::vector<int>& predicted, double radius_ms,
                       int sampling_rate) {
    if (!std::is_sorted(reference.begin(), reference.end()) ||
        !std::is_sorted(predicted.begin(), predicted.end()))
        throw std::invalid_argument("match_points: point lists must be sorted");

    const int n = static_cast<int>(reference.size());
    const int m = static_cast<int>(predicted.size());
    const double ms_per_sample = 1000.0 / sampling_rate;

    struct Cell {
        long count = 0;
        double cost = 0.0;
        char move = 'x';  // 'm' match, 'r' skip reference, 'p' skip predicted
    };
    std::vector<Cell> dp(static_cast<std::size_t>(n + 1) * (m + 1));
    auto cell = [&](int i, int j) -> Cell& {
        return dp[static_cast<std::size_t>(i) * (m + 1) + j];
    };

    for (int i = n; i >= 0; --i) {
        for (int j = m; j >= 0; --j) {
            if (i == n || j == m) {
                cell(i, j) = {0, 0.0, i == n ? 'p' : 'r'};
                continue;
            }
            const double err_ms = (predicted[j] - reference[i]) * ms_per_sample;
            Cell best{-1, 0.0, 'x'};
            auto consider = [&](long count, double cost, char move) {
                if (count > best.count ||
                    (count == best.count && cost < best.cost)) {
                    best = {count, cost, move};
                }
            };
            // Preference order on exact ties: match, then skip-predicted,
            // then skip-reference, so the earliest reference point pairs up.
            if (std::abs(err_ms) <= radius_ms) {
                const Cell& diag = cell(i + 1, j + 1);
                consider(diag.count + 1, diag.cost + std::abs(err_ms), 'm');
            }
            const Cell& skip_p = cell(i, j + 1);
            consider(skip_p.count, skip_p.cost, 'p');
            const Cell& skip_r = cell(i + 1, j);
            consider(skip_r.count, skip_r.cost, 'r');
            cell(i, j) = best;
        }
    }

    TypeMatch result;
    int i = 0, j = 0;
    while (i < n || j < m) {
        const Cell& c = cell(i, j);
        if (c.move == 'm') {
            result.errors_ms.push_back((predicted[j] - reference[i]) * ms_per_sample);
            ++result.tp;
            ++i;
            ++j;
        } else if (c.move == 'r') {
            ++result.fn;
            ++i;
        } else {
            ++result.fp;
            ++j;
        }
    }
    return result;
}

void MatchResult::merge(const MatchResult& other) {
    for (int k = 0; k < kNumPointTypes; ++k) per_type[k].merge(other.per_type[k]);
}

long MatchResult::total_tp() const {
    long s = 0;
    for (const auto& t : per_type) s += t.tp;
    return s;
}
long MatchResult::total_fp() const {
    long s = 0;
    for (const auto& t : per_type) s += t.fp;
    return s;
}
long MatchResult::total_fn() const {
    long s = 0;
    for (const auto& t : per_type) s += t.fn;
    return s;
}

std::array<std::vector<int>, kNumPointTypes> reference_points(
    const std::vector<WaveAnnotation>& annotations) {
    std::array<std::vector<int>, kNumPointTypes> pts;
    for (const auto& a : annotations) {
        const int base = static_cast<int>(a.type) * 2;
        pts[base].push_back(a.onset);
        pts[base + 1].push_back(a.offset);
    }
    for (auto& v : pts) std::sort(v.begin(), v.end());
    return pts;
}

std::array<std::vector<int>, kNumPointTypes> predicted_points(
    const PredictedPoints& points) {
    std::array<std::vector<int>, kNumPointTypes> pts;
    for (int type = 0; type < 3; ++type) {
        pts[type * 2] = points.onsets(static_cast<WaveType>(type));
        pts[type * 2 + 1] = points.offsets(static_cast<WaveType>(type));
    }
    return pts;
}

MatchResult match_record(const std::vector<WaveAnnotation>& reference,
                         const PredictedPoints& predicted, int sampling_rate,
                         double* radius_ms_out, bool* radius_fell_back) {
    const auto ref = reference_points(reference);
    const auto pred = predicted_points(predicted);
    const double radius = tolerance_radius_ms(
        ref[static_cast<int>(PointType::QrsBegin)], sampling_rate, radius_fell_back);
    if (radius_ms_out) *radius_ms_out = radius;

    MatchResult result;
    for (int k = 0; k < kNumPointTypes; ++k)
        result.per_type[k] = match_points(ref[k], pred[k], radius, sampling_rate);
    return result;
}

MetricsReport compute_metrics(const MatchResult& match) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    MetricsReport report;
    for (int k = 0; k < kNumPointTypes; ++k) {
        const TypeMatch& t = match.per_type[k];
        TypeMetrics& out = report.per_type[k];
        out.tp = t.tp;
        out.fp = t.fp;
        out.fn = t.fn;
        out.se = (t.tp + t.fn) > 0 ? 100.0 * t.tp / (t.tp + t.fn) : nan;
        out.ppv = (t.tp + t.fp) > 0 ? 100.0 * t.tp / (t.tp + t.fp) : nan;
        if (t.errors_ms.empty()) {
            out.m = nan;
            out.sigma = nan;
        } else {
            double sum = 0.0;
            for (double e : t.errors_ms) sum += e;
            const double mean = sum / t.errors_ms.size();
            double var = 0.0;
            for (double e : t.errors_ms) var += (e - mean) * (e - mean);
            out.m = mean;
            out.sigma = std::sqrt(var / t.errors_ms.size());
        }
    }
    return report;
}

double f_score(const MatchResult& match) {
    const long tp = match.total_tp();
    const long fp = match.total_fp();
    const long fn = match.total_fn();
    const long denom = 2 * tp + fp + fn;
    if (denom == 0) return 1.0;
    return 2.0 * tp / denom;
}

}  // namespace ecgseg

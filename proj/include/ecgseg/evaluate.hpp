#pragma once

#include <array>
#include <string>
#include <vector>

#include "ecgseg/dataset.hpp"
#include "ecgseg/delineate.hpp"

namespace ecgseg {

inline constexpr double kRadiusCapMs = 150.0;     // ANSI/AAMI-EC57 window
inline constexpr double kRadiusReferenceHr = 70.0;  // BPM at which the cap holds

// The six scored boundary-point types.
enum class PointType {
    PBegin = 0,
    PEnd = 1,
    QrsBegin = 2,
    QrsEnd = 3,
    TBegin = 4,
    TEnd = 5,
};
inline constexpr int kNumPointTypes = 6;
const char* point_type_name(PointType);  // "p_begin", ...

// radius(HR) = min(150 ms, 150 ms * 70 / HR): shrinks linearly with the
// cardiac cycle length, capped at the 70 BPM value for slower rhythms.
double radius_for_heart_rate(double hr_bpm);

// Heart rate from the mean inter-onset interval of the reference QRS begins.
// Fewer than two onsets: falls back to the cap and sets *fell_back.
double tolerance_radius_ms(const std::vector<int>& reference_qrs_onsets,
                           int sampling_rate, bool* fell_back = nullptr);

struct TypeMatch {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    std::vector<double> errors_ms;  // signed, predicted - reference, one per TP

    void merge(const TypeMatch& other);
};

// One-to-one matching of predicted to reference points within the radius.
// Among maximum-cardinality matchings the one with the smallest total
// absolute error is chosen, preferring earlier reference points on ties.
TypeMatch match_points(const std::vector<int>& reference,
                       const std::vector<int>& predicted, double radius_ms,
                       int sampling_rate);

struct MatchResult {
    std::array<TypeMatch, kNumPointTypes> per_type;

    void merge(const MatchResult& other);
    long total_tp() const;
    long total_fp() const;
    long total_fn() const;
};

// Reference boundary points of one lead's expert annotation.
std::array<std::vector<int>, kNumPointTypes> reference_points(
    const std::vector<WaveAnnotation>& annotations);

// Predicted boundary points from decoded runs.
std::array<std::vector<int>, kNumPointTypes> predicted_points(
    const PredictedPoints& points);

// Matches all six point types for one record. The tolerance radius comes from
// the reference (expert) QRS onsets, never from predictions.
MatchResult match_record(const std::vector<WaveAnnotation>& reference,
                         const PredictedPoints& predicted, int sampling_rate,
                         double* radius_ms_out = nullptr,
                         bool* radius_fell_back = nullptr);

struct TypeMetrics {
    double se = 0.0;     // percent; NaN when TP+FN = 0
    double ppv = 0.0;    // percent; NaN when TP+FP = 0
    double m = 0.0;      // ms, mean signed error; NaN when no TPs
    double sigma = 0.0;  // ms, population standard deviation; NaN when no TPs
    long tp = 0, fp = 0, fn = 0;
};

struct MetricsReport {
    std::array<TypeMetrics, kNumPointTypes> per_type;
};

MetricsReport compute_metrics(const MatchResult& match);

// Micro-averaged F1 pooled over the six point types. A patient with no
// points at all (2TP + FP + FN = 0) scores 1: there was nothing to get wrong.
double f_score(const MatchResult& match);

struct PatientScore {
    std::string patient_id;
    double f = 0.0;
};

// Published per-type figures for the base network, kept as reproduction
// targets alongside our own reports.
struct PublishedRow {
    const char* point;
    double se, ppv, m, sigma;
};
inline constexpr std::array<PublishedRow, kNumPointTypes> kPublishedBaseMetrics = {{
    {"p_begin", 95.20, 82.66, 2.7, 21.9},
    {"p_end", 95.39, 82.59, -7.4, 28.6},
    {"qrs_begin", 99.51, 98.17, 2.6, 12.4},
    {"qrs_end", 99.50, 97.96, -1.7, 14.1},
    {"t_begin", 97.95, 94.81, 8.4, 28.2},
    {"t_end", 97.56, 94.96, -3.1, 28.2},
}};

}  // namespace ecgseg

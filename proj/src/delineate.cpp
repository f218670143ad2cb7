#include "ecgseg/delineate.hpp"

#include <stdexcept>

namespace ecgseg {

WinnerMask winner_mask(const Tensor1d& probs) {
    WinnerMask mask;
    mask.length = probs.length;
    for (auto& ch : mask.channels) ch.assign(probs.length, 0);
    for (int t = 0; t < probs.length; ++t) {
        int best = 0;
        double best_v = probs.at(0, t);
        for (int c = 1; c < probs.channels; ++c) {
            const double v = probs.at(c, t);
            if (v > best_v) {
                best_v = v;
                best = c;
            }
        }
        mask.channels[best][t] = 1;
    }
    return mask;
}

std::vector<int> PredictedPoints::onsets(WaveType type) const {
    std::vector<int> out;
    for (const auto& r : runs[static_cast<int>(type)]) out.push_back(r.onset);
    return out;
}

std::vector<int> PredictedPoints::offsets(WaveType type) const {
    std::vector<int> out;
    for (const auto& r : runs[static_cast<int>(type)]) out.push_back(r.offset);
    return out;
}

PredictedPoints extract_points(const WinnerMask& mask, int min_run) {
    if (min_run < 1)
        throw std::invalid_argument("extract_points: min_run must be >= 1");
    PredictedPoints points;
    for (int type = 0; type < 3; ++type) {
        const auto& ch = mask.channels[type];
        int t = 0;
        while (t < mask.length) {
            if (!ch[t]) {
                ++t;
                continue;
            }
            const int onset = t;
            while (t < mask.length && ch[t]) ++t;
            const int offset = t - 1;
            if (offset - onset + 1 >= min_run)
                points.runs[type].push_back({onset, offset});
        }
    }
    return points;
}

std::vector<WaveAnnotation> predicted_annotations(const PredictedPoints& points,
                                                  const Tensor1d& probs) {
    std::vector<WaveAnnotation> annos;
    for (int type = 0; type < 3; ++type) {
        for (const auto& run : points.runs[type]) {
            WaveAnnotation a;
            a.type = static_cast<WaveType>(type);
            a.onset = run.onset;
            a.offset = run.offset;
            int peak = run.onset;
            double best = probs.at(type, run.onset);
            for (int t = run.onset + 1; t <= run.offset; ++t) {
                if (probs.at(type, t) > best) {
                    best = probs.at(type, t);
                    peak = t;
                }
            }
            a.peak = peak;
            annos.push_back(a);
        }
    }
    return annos;
}

namespace {

Tensor1d to_input(const std::vector<double>& lead_signal) {
    Tensor1d x(1, static_cast<int>(lead_signal.size()));
    std::copy(lead_signal.begin(), lead_signal.end(), x.row(0));
    return x;
}

}  // namespace

Tensor1d infer_probs(const std::vector<double>& lead_signal, const ModelParams& model) {
    return forward(to_input(lead_signal), model);
}

Tensor1d infer_probs(const std::vector<double>& lead_signal,
                     const std::vector<ModelParams>& members) {
    if (members.empty())
        throw std::invalid_argument("infer_probs: ensemble has no members");
    const Tensor1d x = to_input(lead_signal);
    Tensor1d mean = forward(x, members[0]);
    for (std::size_t m = 1; m < members.size(); ++m) {
        const Tensor1d p = forward(x, members[m]);
        for (std::size_t i = 0; i < mean.data.size(); ++i) mean.data[i] += p.data[i];
    }
    const double inv = 1.0 / static_cast<double>(members.size());
    for (auto& v : mean.data) v *= inv;
    return mean;
}

Inference infer(const EcgRecord& record, const std::string& lead,
                const std::vector<ModelParams>& members, int min_run) {
    Inference res;
    res.probs = infer_probs(select_lead(record, lead), members);
    res.mask = winner_mask(res.probs);
    res.points = extract_points(res.mask, min_run);
    return res;
}

}  // namespace ecgseg

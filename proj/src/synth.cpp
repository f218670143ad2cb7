#include "ecgseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <vector>

#include "ecgseg/common.hpp"

namespace ecgseg {

namespace {

constexpr double kPi = 3.14159265358979323846;

enum class Tier { Clean, Noisy, NoP, Hard };

struct Profile {
    Tier tier = Tier::Clean;
    double hr_bpm = 70.0;
    double rr_jitter = 0.02;
    double r_amp = 1.2;
    double p_amp = 0.18;
    double t_amp = 0.4;
    bool t_inverted = false;
    double beat_amp_jitter = 0.05;
    double p_dur_ms = 90.0;
    double pr_ms = 160.0;  // P onset to QRS onset
    double q_dur_ms = 28.0;
    double s_dur_ms = 38.0;
    double st_gap_ms = 85.0;
    double t_dur_ms = 170.0;
    double noise_sigma = 0.004;
    double fib_amp = 0.0;  // fibrillation-like ripple instead of P waves
    double fib_hz = 5.5;
};

Profile draw_profile(Rng& rng) {
    Profile p;
    const double tier_draw = rng.uniform();
    if (tier_draw < 0.70)
        p.tier = Tier::Clean;
    else if (tier_draw < 0.85)
        p.tier = Tier::Noisy;
    else if (tier_draw < 0.93)
        p.tier = Tier::NoP;
    else
        p.tier = Tier::Hard;

    p.hr_bpm = rng.uniform(50.0, 92.0);
    p.r_amp = rng.uniform(0.7, 1.9);
    p.p_amp = rng.uniform(0.11, 0.26);
    p.t_amp = rng.uniform(0.22, 0.55);
    p.p_dur_ms = rng.uniform(72.0, 112.0);
    p.pr_ms = std::max(p.p_dur_ms + 25.0, rng.uniform(125.0, 190.0));
    p.q_dur_ms = rng.uniform(20.0, 34.0);
    p.s_dur_ms = rng.uniform(26.0, 44.0);
    p.st_gap_ms = rng.uniform(62.0, 110.0);
    p.t_dur_ms = rng.uniform(145.0, 205.0);

    switch (p.tier) {
        case Tier::Clean:
            p.rr_jitter = rng.uniform(0.01, 0.03);
            p.noise_sigma = rng.uniform(0.002, 0.006);
            p.beat_amp_jitter = rng.uniform(0.02, 0.07);
            break;
        case Tier::Noisy:
            p.rr_jitter = rng.uniform(0.02, 0.05);
            p.noise_sigma = rng.uniform(0.014, 0.034);
            p.beat_amp_jitter = rng.uniform(0.05, 0.12);
            break;
        case Tier::NoP:
            p.rr_jitter = rng.uniform(0.08, 0.16);
            p.noise_sigma = rng.uniform(0.008, 0.020);
            p.beat_amp_jitter = rng.uniform(0.06, 0.12);
            p.p_amp = 0.0;
            p.fib_amp = rng.uniform(0.018, 0.035);
            p.fib_hz = rng.uniform(4.5, 7.0);
            break;
        case Tier::Hard:
            p.rr_jitter = rng.uniform(0.03, 0.07);
            p.noise_sigma = rng.uniform(0.020, 0.042);
            p.beat_amp_jitter = rng.uniform(0.10, 0.20);
            p.t_inverted = rng.uniform() < 0.5;
            if (rng.uniform() < 0.4) p.t_amp = rng.uniform(0.12, 0.20);  // small T
            break;
    }
    return p;
}

// Half-cosine lobe with compact support [start, end]; zero at both ends.
void add_hann_lobe(std::vector<double>& x, double start, double end, double amp) {
    const int a = std::max(0, static_cast<int>(std::ceil(start)));
    const int b = std::min(static_cast<int>(x.size()) - 1,
                           static_cast<int>(std::floor(end)));
    const double span = end - start;
    if (span <= 0.0) return;
    for (int t = a; t <= b; ++t) {
        const double phase = (t - start) / span;
        x[t] += amp * 0.5 * (1.0 - std::cos(2.0 * kPi * phase));
    }
}

// Asymmetric lobe: rises over `rise_frac` of the support, falls over the rest.
void add_asym_lobe(std::vector<double>& x, double start, double end, double amp,
                   double rise_frac) {
    const int a = std::max(0, static_cast<int>(std::ceil(start)));
    const int b = std::min(static_cast<int>(x.size()) - 1,
                           static_cast<int>(std::floor(end)));
    const double span = end - start;
    if (span <= 0.0) return;
    const double rise = span * rise_frac;
    for (int t = a; t <= b; ++t) {
        const double dt = t - start;
        double v;
        if (dt <= rise)
            v = 0.5 * (1.0 - std::cos(kPi * dt / rise));
        else
            v = 0.5 * (1.0 + std::cos(kPi * (dt - rise) / (span - rise)));
        x[t] += amp * v;
    }
}

int argmax_abs(const std::vector<double>& x, int a, int b) {
    int best = a;
    double best_v = std::abs(x[a]);
    for (int t = a + 1; t <= b; ++t) {
        if (std::abs(x[t]) > best_v) {
            best_v = std::abs(x[t]);
            best = t;
        }
    }
    return best;
}

double quantize_mv(double v) { return std::round(v * 1000.0) / 1000.0; }

}  // namespace

EcgRecord synth_record(const std::string& patient_id, std::uint64_t seed) {
    Rng rng(seed);
    const Profile prof = draw_profile(rng);
    const double fs = kSamplingRate;
    const double ms = fs / 1000.0;  // samples per millisecond

    // Shared wave content; leads scale it. The annotation margin keeps every
    // emitted wave strictly inside the record.
    std::vector<double> base(kRecordLength, 0.0);
    std::vector<WaveAnnotation> annos;
    const int margin = 8;

    const double mean_rr = 60.0 * fs / prof.hr_bpm;
    double r_pos = rng.uniform(320.0, 320.0 + mean_rr);
    while (r_pos < kRecordLength + mean_rr) {
        const double beat_scale = 1.0 + prof.beat_amp_jitter * rng.normal();
        const double qrs_on = r_pos - prof.q_dur_ms * ms;
        const double qrs_off = r_pos + prof.s_dur_ms * ms;

        // QRS: narrow tall R lobe, small Q and S dips at the edges.
        if (qrs_on >= margin && qrs_off < kRecordLength - margin) {
            const double dur = qrs_off - qrs_on;
            add_hann_lobe(base, qrs_on, qrs_on + 0.42 * dur, -0.14 * prof.r_amp * beat_scale);
            add_hann_lobe(base, qrs_on + 0.18 * dur, qrs_off - 0.18 * dur,
                          prof.r_amp * beat_scale);
            add_hann_lobe(base, qrs_off - 0.42 * dur, qrs_off, -0.22 * prof.r_amp * beat_scale);
            WaveAnnotation qrs;
            qrs.type = WaveType::QRS;
            qrs.onset = static_cast<int>(std::ceil(qrs_on));
            qrs.offset = static_cast<int>(std::floor(qrs_off));
            qrs.peak = argmax_abs(base, qrs.onset, qrs.offset);
            annos.push_back(qrs);

            // P wave ends PR before the QRS.
            if (prof.p_amp > 0.0) {
                const double p_on = qrs_on - prof.pr_ms * ms;
                const double p_off = p_on + prof.p_dur_ms * ms;
                if (p_on >= margin && p_off < qrs_on - 2.0) {
                    add_hann_lobe(base, p_on, p_off, prof.p_amp * beat_scale);
                    WaveAnnotation p;
                    p.type = WaveType::P;
                    p.onset = static_cast<int>(std::ceil(p_on));
                    p.offset = static_cast<int>(std::floor(p_off));
                    p.peak = argmax_abs(base, p.onset, p.offset);
                    annos.push_back(p);
                }
            }

            // T wave after the ST gap; duration stretches mildly with RR.
            const double t_dur = prof.t_dur_ms * ms * std::sqrt(mean_rr / (60.0 * fs / 70.0));
            const double t_on = qrs_off + prof.st_gap_ms * ms;
            const double t_off = t_on + t_dur;
            const double next_gap = r_pos + mean_rr - prof.pr_ms * ms - 30.0;
            if (t_on >= margin && t_off < kRecordLength - margin && t_off < next_gap) {
                const double amp = (prof.t_inverted ? -1.0 : 1.0) * prof.t_amp * beat_scale;
                add_asym_lobe(base, t_on, t_off, amp, 0.58);
                WaveAnnotation t;
                t.type = WaveType::T;
                t.onset = static_cast<int>(std::ceil(t_on));
                t.offset = static_cast<int>(std::floor(t_off));
                t.peak = argmax_abs(base, t.onset, t.offset);
                annos.push_back(t);
            }
        }

        double rr = mean_rr * (1.0 + prof.rr_jitter * rng.normal());
        rr = std::clamp(rr, 0.55 * mean_rr, 1.6 * mean_rr);
        r_pos += rr;
    }

    std::sort(annos.begin(), annos.end(), [](const auto& a, const auto& b) {
        return a.onset < b.onset;
    });

    // Fibrillation-like ripple replaces the P waves on that tier.
    if (prof.fib_amp > 0.0) {
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        for (int t = 0; t < kRecordLength; ++t)
            base[t] += prof.fib_amp *
                       std::sin(2.0 * kPi * prof.fib_hz * t / fs + phase) *
                       (1.0 + 0.3 * std::sin(2.0 * kPi * 0.9 * t / fs));
    }

    static const std::map<std::string, double> lead_factor = {
        {"i", 0.55},  {"ii", 1.0},  {"iii", 0.45}, {"avr", -0.75},
        {"avl", 0.35}, {"avf", 0.78}, {"v1", 0.5},   {"v2", 0.85},
        {"v3", 1.1},  {"v4", 1.05}, {"v5", 0.9},   {"v6", 0.75}};

    EcgRecord record;
    record.patient_id = patient_id;
    record.sampling_rate = kSamplingRate;
    for (const char* lead : kLeadNames) {
        Rng lead_rng(derive_seed(seed, std::string("lead-") + lead));
        const double factor = lead_factor.at(lead);

        // Per-lead baseline wander: a few slow sinusoids plus linear drift.
        std::vector<double> x(kRecordLength);
        double drift = lead_rng.uniform(-0.3, 0.3);
        double freqs[3], amps[3], phases[3];
        for (int j = 0; j < 3; ++j) {
            freqs[j] = lead_rng.uniform(0.05, 0.35);
            amps[j] = lead_rng.uniform(0.05, 0.32);
            phases[j] = lead_rng.uniform(0.0, 2.0 * kPi);
        }
        for (int t = 0; t < kRecordLength; ++t) {
            double v = factor * base[t];
            for (int j = 0; j < 3; ++j)
                v += amps[j] * std::sin(2.0 * kPi * freqs[j] * t / fs + phases[j]);
            v += drift * (t / static_cast<double>(kRecordLength));
            v += prof.noise_sigma * lead_rng.normal();
            x[t] = quantize_mv(v);
        }
        record.leads[lead] = std::move(x);
        record.annotations[lead] = annos;
    }
    return record;
}

void generate_dataset(const std::filesystem::path& dir, const SynthConfig& config) {
    std::filesystem::create_directories(dir);
    Manifest manifest;
    manifest.split_seed = config.seed;
    for (int i = 0; i < config.patients; ++i) {
        char id[32];
        std::snprintf(id, sizeof(id), "p%04d", i + 1);
        const EcgRecord record =
            synth_record(id, derive_seed(config.seed, "synth-record",
                                         static_cast<std::uint64_t>(i)));
        validate_record(record);
        const std::string file = std::string(id) + ".json";
        write_record(record, dir / file);
        manifest.records.push_back(file);
    }
    write_manifest(manifest, dir);
}

}  // namespace ecgseg

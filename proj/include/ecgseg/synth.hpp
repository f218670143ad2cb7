#pragma once

#include <cstdint>
#include <filesystem>

#include "ecgseg/dataset.hpp"

namespace ecgseg {

// Parametric 12-lead test-data generator. Produces records with the same
// structure as the real corpus (200 patients, 10 s, 500 Hz, expert-style
// P/QRS/T annotations): compact-support waves on a wandering baseline, with a
// mix of clean, noisy, fibrillation-like (no P wave) and otherwise hard
// patients so that screening and error-correction behaviour is non-trivial.
struct SynthConfig {
    int patients = kPopulationSize;
    std::uint64_t seed = 1;
};

EcgRecord synth_record(const std::string& patient_id, std::uint64_t seed);

// Writes one interchange file per patient plus the manifest.
void generate_dataset(const std::filesystem::path& dir, const SynthConfig& config);

}  // namespace ecgseg

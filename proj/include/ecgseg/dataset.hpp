#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ecgseg/common.hpp"

namespace ecgseg {

inline constexpr int kSamplingRate = 500;   // Hz
inline constexpr int kRecordLength = 5000;  // samples (10 s)
inline constexpr int kPopulationSize = 200;
inline constexpr int kTrainSplitSize = 134;
inline constexpr int kTestSplitSize = 66;
inline constexpr const char* kDefaultLead = "ii";

inline constexpr std::array<const char*, 12> kLeadNames = {
    "i", "ii", "iii", "avr", "avl", "avf",
    "v1", "v2", "v3", "v4", "v5", "v6"};

bool is_known_lead(const std::string& name);

enum class WaveType { P = 0, QRS = 1, T = 2 };

const char* wave_type_name(WaveType t);          // "p", "qrs", "t"
WaveType wave_type_from_name(const std::string&);  // throws ParseError

struct WaveAnnotation {
    WaveType type = WaveType::P;
    int onset = 0;
    int peak = 0;
    int offset = 0;

    bool operator==(const WaveAnnotation&) const = default;
};

// One patient: 12 leads of millivolt samples at 500 Hz plus expert wave
// annotations per annotated lead.
struct EcgRecord {
    std::string patient_id;
    int sampling_rate = kSamplingRate;
    std::map<std::string, std::vector<double>> leads;
    std::map<std::string, std::vector<WaveAnnotation>> annotations;

    bool operator==(const EcgRecord&) const = default;
};

// Checks every EcgRecord invariant; throws ValidationError listing each
// violated check.
void validate_record(const EcgRecord& record);

// Interchange format I/O. One JSON document per patient, see README for the
// schema. parse_record validates before returning.
EcgRecord parse_record(const std::filesystem::path& path);
void write_record(const EcgRecord& record, const std::filesystem::path& path);

// 134/66 partition, deterministic in (ids, seed).
struct DatasetSplit {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::uint64_t seed = 0;
};

DatasetSplit split_dataset(std::vector<std::string> ids, std::uint64_t seed);

void write_split(const DatasetSplit&, const std::filesystem::path&);
DatasetSplit read_split(const std::filesystem::path&);

const std::vector<double>& select_lead(const EcgRecord& record,
                                       const std::string& lead);
const std::vector<double>& select_lead(const EcgRecord& record);  // default lead

// Annotations for one lead; empty list if the lead carries none.
const std::vector<WaveAnnotation>& lead_annotations(const EcgRecord& record,
                                                    const std::string& lead);

struct Manifest {
    std::vector<std::string> records;  // file names relative to the dataset dir
    std::uint64_t split_seed = 0;
};

void write_manifest(const Manifest&, const std::filesystem::path& dir);
Manifest read_manifest(const std::filesystem::path& dir);

// Loads every record listed in the manifest of `dir`. Parsing of distinct
// files may run concurrently; records are immutable afterwards.
std::vector<EcgRecord> load_dataset(const std::filesystem::path& dir);

std::vector<std::string> patient_ids(const std::vector<EcgRecord>& records);

}  // namespace ecgseg

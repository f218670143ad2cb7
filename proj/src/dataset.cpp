#include "ecgseg/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ecgseg/common.hpp"

namespace ecgseg {

using nlohmann::json;

bool is_known_lead(const std::string& name) {
    return std::find(kLeadNames.begin(), kLeadNames.end(), name) != kLeadNames.end();
}

const char* wave_type_name(WaveType t) {
    switch (t) {
        case WaveType::P: return "p";
        case WaveType::QRS: return "qrs";
        case WaveType::T: return "t";
    }
    return "?";
}

WaveType wave_type_from_name(const std::string& s) {
    if (s == "p") return WaveType::P;
    if (s == "qrs") return WaveType::QRS;
    if (s == "t") return WaveType::T;
    throw ParseError("annotations: unknown wave type \"" + s +
                     "\" (expected p, qrs or t)");
}

void validate_record(const EcgRecord& record) {
    std::vector<std::string> violations;

    if (record.patient_id.empty())
        violations.push_back("patient_id: must be non-empty");
    if (record.sampling_rate != kSamplingRate)
        violations.push_back("fs: must be " + std::to_string(kSamplingRate) +
                             ", got " + std::to_string(record.sampling_rate));

    if (record.leads.size() != kLeadNames.size())
        violations.push_back("leads: exactly 12 leads required, got " +
                             std::to_string(record.leads.size()));
    for (const char* name : kLeadNames) {
        if (!record.leads.count(name))
            violations.push_back(std::string("leads: missing lead \"") + name + "\"");
    }
    for (const auto& [name, samples] : record.leads) {
        if (!is_known_lead(name)) {
            violations.push_back("leads: unknown lead \"" + name + "\"");
            continue;
        }
        if (static_cast<int>(samples.size()) != kRecordLength)
            violations.push_back("leads: lead length must be " +
                                 std::to_string(kRecordLength) + ", lead \"" + name +
                                 "\" has " + std::to_string(samples.size()));
    }

    for (const auto& [lead, annos] : record.annotations) {
        if (!is_known_lead(lead)) {
            violations.push_back("annotations: unknown lead \"" + lead + "\"");
            continue;
        }
        for (const auto& a : record.annotations.at(lead)) {
            const std::string tag = std::string("annotations[") + lead + "] " +
                                    wave_type_name(a.type);
            if (a.onset < 0 || a.offset >= kRecordLength)
                violations.push_back(tag + ": indices must lie in [0, " +
                                     std::to_string(kRecordLength) + ")");
            if (!(a.onset <= a.peak))
                violations.push_back(tag + ": onset <= peak violated (" +
                                     std::to_string(a.onset) + " > " +
                                     std::to_string(a.peak) + ")");
            if (!(a.peak <= a.offset))
                violations.push_back(tag + ": peak <= offset violated (" +
                                     std::to_string(a.peak) + " > " +
                                     std::to_string(a.offset) + ")");
        }
        // Same-type waves must not overlap.
        for (int t = 0; t < 3; ++t) {
            std::vector<WaveAnnotation> of_type;
            for (const auto& a : annos)
                if (static_cast<int>(a.type) == t) of_type.push_back(a);
            std::sort(of_type.begin(), of_type.end(),
                      [](const auto& x, const auto& y) { return x.onset < y.onset; });
            for (std::size_t i = 1; i < of_type.size(); ++i) {
                if (of_type[i].onset <= of_type[i - 1].offset)
                    violations.push_back(
                        std::string("annotations[") + lead + "]: " +
                        wave_type_name(static_cast<WaveType>(t)) +
                        " waves overlap near sample " + std::to_string(of_type[i].onset));
            }
        }
    }

    if (!violations.empty()) {
        std::string msg = "record \"" + record.patient_id + "\" invalid:";
        for (const auto& v : violations) msg += "\n  - " + v;
        throw ValidationError(msg);
    }
}

namespace {

json require_field(const json& j, const char* field, const std::string& ctx) {
    if (!j.contains(field))
        throw ParseError(ctx + ": missing field \"" + field + "\"");
    return j.at(field);
}

}  // namespace

EcgRecord parse_record(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open record file: " + path.string());

    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("record file " + path.string() + ": " + e.what());
    }

    const std::string ctx = path.filename().string();
    EcgRecord r;
    try {
        r.patient_id = require_field(j, "patient_id", ctx).get<std::string>();
        r.sampling_rate = require_field(j, "fs", ctx).get<int>();
        const json leads = require_field(j, "leads", ctx);
        if (!leads.is_object()) throw ParseError(ctx + ": field \"leads\" must be an object");
        for (const auto& [name, arr] : leads.items()) {
            if (!arr.is_array())
                throw ParseError(ctx + ": leads[\"" + name + "\"] must be an array");
            r.leads[name] = arr.get<std::vector<double>>();
        }
        if (j.contains("annotations")) {
            const json annos = j.at("annotations");
            if (!annos.is_object())
                throw ParseError(ctx + ": field \"annotations\" must be an object");
            for (const auto& [lead, arr] : annos.items()) {
                std::vector<WaveAnnotation> list;
                for (const auto& entry : arr) {
                    if (!entry.is_array() || entry.size() != 4)
                        throw ParseError(ctx + ": annotations[\"" + lead +
                                         "\"]: each entry must be [type, onset, peak, offset]");
                    WaveAnnotation a;
                    a.type = wave_type_from_name(entry.at(0).get<std::string>());
                    a.onset = entry.at(1).get<int>();
                    a.peak = entry.at(2).get<int>();
                    a.offset = entry.at(3).get<int>();
                    list.push_back(a);
                }
                r.annotations[lead] = std::move(list);
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(ctx + ": " + e.what());
    }

    validate_record(r);
    return r;
}

void write_record(const EcgRecord& record, const std::filesystem::path& path) {
    json j;
    j["patient_id"] = record.patient_id;
    j["fs"] = record.sampling_rate;
    json leads = json::object();
    for (const auto& [name, samples] : record.leads) leads[name] = samples;
    j["leads"] = std::move(leads);
    json annos = json::object();
    for (const auto& [lead, list] : record.annotations) {
        json arr = json::array();
        for (const auto& a : list)
            arr.push_back(json::array({wave_type_name(a.type), a.onset, a.peak, a.offset}));
        annos[lead] = std::move(arr);
    }
    j["annotations"] = std::move(annos);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write record file: " + path.string());
    out << j.dump() << "\n";
}

DatasetSplit split_dataset(std::vector<std::string> ids, std::uint64_t seed) {
    if (static_cast<int>(ids.size()) != kPopulationSize)
        throw std::invalid_argument(
            "split_dataset: population must be exactly " +
            std::to_string(kPopulationSize) + " patients, got " +
            std::to_string(ids.size()));
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw std::invalid_argument("split_dataset: patient ids must be distinct");

    Rng rng(seed);
    // Fisher-Yates.
    for (int i = static_cast<int>(ids.size()) - 1; i > 0; --i) {
        const int k = rng.uniform_int(i + 1);
        std::swap(ids[i], ids[k]);
    }

    DatasetSplit split;
    split.seed = seed;
    split.train_ids.assign(ids.begin(), ids.begin() + kTrainSplitSize);
    split.test_ids.assign(ids.begin() + kTrainSplitSize, ids.end());
    std::sort(split.train_ids.begin(), split.train_ids.end());
    std::sort(split.test_ids.begin(), split.test_ids.end());
    return split;
}

void write_split(const DatasetSplit& split, const std::filesystem::path& path) {
    json j;
    j["seed"] = split.seed;
    j["train_ids"] = split.train_ids;
    j["test_ids"] = split.test_ids;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write split file: " + path.string());
    out << j.dump(2) << "\n";
}

DatasetSplit read_split(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open split file: " + path.string());
    json j;
    try {
        in >> j;
        DatasetSplit split;
        split.seed = j.at("seed").get<std::uint64_t>();
        split.train_ids = j.at("train_ids").get<std::vector<std::string>>();
        split.test_ids = j.at("test_ids").get<std::vector<std::string>>();
        return split;
    } catch (const json::exception& e) {
        throw ParseError("split file " + path.string() + ": " + e.what());
    }
}

const std::vector<double>& select_lead(const EcgRecord& record,
                                       const std::string& lead) {
    auto it = record.leads.find(lead);
    if (it == record.leads.end())
        throw std::invalid_argument("select_lead: unknown lead \"" + lead +
                                    "\" in record " + record.patient_id);
    return it->second;
}

const std::vector<double>& select_lead(const EcgRecord& record) {
    return select_lead(record, kDefaultLead);
}

const std::vector<WaveAnnotation>& lead_annotations(const EcgRecord& record,
                                                    const std::string& lead) {
    static const std::vector<WaveAnnotation> empty;
    auto it = record.annotations.find(lead);
    return it == record.annotations.end() ? empty : it->second;
}

void write_manifest(const Manifest& m, const std::filesystem::path& dir) {
    json j;
    j["records"] = m.records;
    j["split_seed"] = m.split_seed;
    std::ofstream out(dir / "manifest.json");
    if (!out)
        throw std::runtime_error("cannot write manifest in " + dir.string());
    out << j.dump(2) << "\n";
}

Manifest read_manifest(const std::filesystem::path& dir) {
    const auto path = dir / "manifest.json";
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open manifest: " + path.string());
    json j;
    try {
        in >> j;
        Manifest m;
        m.records = j.at("records").get<std::vector<std::string>>();
        m.split_seed = j.at("split_seed").get<std::uint64_t>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError("manifest " + path.string() + ": " + e.what());
    }
}

std::vector<EcgRecord> load_dataset(const std::filesystem::path& dir) {
    const Manifest m = read_manifest(dir);
    std::vector<EcgRecord> records(m.records.size());
    std::vector<std::string> errors(m.records.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(m.records.size()); ++i) {
        try {
            records[i] = parse_record(dir / m.records[i]);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    std::string combined;
    for (const auto& e : errors)
        if (!e.empty()) combined += e + std::string("\n");
    if (!combined.empty()) throw ParseError(combined);
    return records;
}

std::vector<std::string> patient_ids(const std::vector<EcgRecord>& records) {
    std::vector<std::string> ids;
    ids.reserve(records.size());
    for (const auto& r : records) ids.push_back(r.patient_id);
    return ids;
}

}  // namespace ecgseg

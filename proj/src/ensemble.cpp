#include "ecgseg/ensemble.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace ecgseg {

using nlohmann::json;

void save_ensemble_manifest(const EnsembleManifest& m,
                            const std::filesystem::path& path) {
    json members = json::array();
    for (const auto& member : m.members) {
        members.push_back({{"checkpoint", member.checkpoint},
                           {"subset", member.subset},
                           {"iteration", member.iteration},
                           {"retrains", member.retrains}});
    }
    json j;
    j["members"] = std::move(members);
    j["stage_sizes"] = m.stage_sizes;
    j["irreducible"] = m.irreducible;
    j["screen_threshold"] = m.screen_threshold;
    j["stagnation_retries"] = m.stagnation_retries;
    j["iteration_cap"] = m.iteration_cap;
    j["seed"] = m.seed;
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write ensemble manifest: " + path.string());
    out << j.dump(2) << "\n";
}

EnsembleManifest load_ensemble_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open ensemble manifest: " + path.string());
    json j;
    try {
        in >> j;
        EnsembleManifest m;
        for (const auto& entry : j.at("members")) {
            MemberRecord member;
            member.checkpoint = entry.at("checkpoint").get<std::string>();
            member.subset = entry.at("subset").get<std::vector<std::string>>();
            member.iteration = entry.at("iteration").get<int>();
            member.retrains = entry.at("retrains").get<int>();
            m.members.push_back(std::move(member));
        }
        m.stage_sizes = j.at("stage_sizes").get<std::vector<int>>();
        m.irreducible = j.at("irreducible").get<std::vector<std::string>>();
        m.screen_threshold = j.at("screen_threshold").get<double>();
        m.stagnation_retries = j.at("stagnation_retries").get<int>();
        m.iteration_cap = j.at("iteration_cap").get<int>();
        m.seed = j.at("seed").get<std::uint64_t>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError("ensemble manifest " + path.string() + ": " + e.what());
    }
}

EnsembleManifest build_ensemble(const std::vector<std::string>& train_ids,
                                const EnsembleCallbacks& callbacks,
                                const EnsembleConfig& config,
                                std::uint64_t master_seed) {
    if (train_ids.empty())
        throw std::invalid_argument("build_ensemble: training set is empty");
    if (!callbacks.train_member || !callbacks.score_patient)
        throw std::invalid_argument("build_ensemble: callbacks not set");

    EnsembleManifest manifest;
    manifest.screen_threshold = config.screen_threshold;
    manifest.stagnation_retries = config.stagnation_retries;
    manifest.iteration_cap = config.iteration_cap;
    manifest.seed = master_seed;

    std::vector<std::string> subset = train_ids;
    std::sort(subset.begin(), subset.end());
    manifest.stage_sizes.push_back(static_cast<int>(subset.size()));

    for (int iteration = 1;
         !subset.empty() && iteration <= config.iteration_cap; ++iteration) {
        int retrain = 0;
        for (;;) {
            const std::uint64_t seed = derive_seed(
                master_seed, "ensemble-member", static_cast<std::uint64_t>(iteration),
                static_cast<std::uint64_t>(retrain));
            const std::string token =
                callbacks.train_member(subset, seed, iteration, retrain);

            std::vector<double> scores(subset.size());
#pragma omp parallel for schedule(dynamic)
            for (int i = 0; i < static_cast<int>(subset.size()); ++i)
                scores[i] = callbacks.score_patient(token, subset[i]);

            std::vector<std::string> remaining;
            for (std::size_t i = 0; i < subset.size(); ++i)
                if (scores[i] < config.screen_threshold) remaining.push_back(subset[i]);

            if (remaining.size() < subset.size()) {
                manifest.members.push_back({token, subset, iteration, retrain});
                subset = std::move(remaining);
                manifest.stage_sizes.push_back(static_cast<int>(subset.size()));
                break;
            }

            // Nothing screened out: assume a bad local minimum and re-train
            // the same iteration with a fresh seed.
            ++retrain;
            if (retrain > config.stagnation_retries) {
                manifest.members.push_back({token, subset, iteration, retrain - 1});
                manifest.stage_sizes.push_back(static_cast<int>(subset.size()));
                manifest.irreducible = subset;
                return manifest;
            }
        }
    }

    manifest.irreducible = subset;
    return manifest;
}

EnsembleManifest build_ensemble(const std::vector<EcgRecord>& records,
                                const TrainConfig& base_config,
                                const EnsembleConfig& config,
                                const std::filesystem::path& out_dir,
                                std::uint64_t master_seed,
                                const std::filesystem::path& base_checkpoint) {
    std::filesystem::create_directories(out_dir / "members");

    std::map<std::string, const EcgRecord*> by_id;
    for (const auto& r : records) by_id[r.patient_id] = &r;

    // Every member trains with the base step budget regardless of subset
    // size; mini-batches over a shrinking subset then revisit its patients
    // ever more often, which is what lets a member fit its subset and screen
    // patients out.
    const int full_steps =
        base_config.steps_per_epoch > 0
            ? base_config.steps_per_epoch
            : ((static_cast<int>(records.size()) + base_config.batch_size - 1) /
               base_config.batch_size) *
                  4;

    // Member models stay cached for screening.
    std::map<std::string, ModelParams> loaded;

    EnsembleCallbacks callbacks;
    callbacks.train_member = [&](const std::vector<std::string>& subset,
                                 std::uint64_t seed, int iteration,
                                 int retrain) -> std::string {
        char name[64];
        std::snprintf(name, sizeof(name), "members/member_%02d_r%d.json", iteration,
                      retrain);
        std::cout << "[ensemble] iteration " << iteration << " retrain " << retrain
                  << ": " << subset.size() << " patients" << std::endl;

        if (iteration == 1 && retrain == 0 && !base_checkpoint.empty()) {
            const Checkpoint base = load_checkpoint(base_checkpoint);
            save_checkpoint(base, out_dir / name);
            loaded[name] = base.model;
            return name;
        }

        std::vector<EcgRecord> subset_records;
        subset_records.reserve(subset.size());
        for (const auto& id : subset) subset_records.push_back(*by_id.at(id));

        TrainConfig member_cfg = base_config;
        member_cfg.seed = seed;
        member_cfg.steps_per_epoch = full_steps;
        member_cfg.checkpoint_path = out_dir / name;
        member_cfg.loss_log_path.clear();

        const TrainResult result = train_base(subset_records, member_cfg);
        loaded[name] = result.checkpoint.model;
        return name;
    };
    callbacks.score_patient = [&](const std::string& token,
                                  const std::string& patient_id) -> double {
        const EcgRecord& record = *by_id.at(patient_id);
        const Inference inf = infer(record, base_config.lead,
                                    {loaded.at(token)}, config.min_run);
        const MatchResult match = match_record(
            lead_annotations(record, base_config.lead), inf.points,
            record.sampling_rate);
        return f_score(match);
    };

    EnsembleManifest manifest =
        build_ensemble(patient_ids(records), callbacks, config, master_seed);
    save_ensemble_manifest(manifest, out_dir / "ensemble_manifest.json");
    return manifest;
}

DistillationReport distillation_report(const std::vector<EcgRecord>& train_records,
                                       const std::vector<EcgRecord>& test_records,
                                       const ModelParams& base,
                                       const std::vector<ModelParams>& members,
                                       const std::string& lead, int min_run,
                                       double outlier_threshold) {
    DistillationReport report;
    report.outlier_threshold = outlier_threshold;

    const std::vector<ModelParams> base_only = {base};

    auto run_split = [&](const std::vector<EcgRecord>& records,
                         const std::string& split, double& base_pooled,
                         double& ensemble_pooled) {
        const int n = static_cast<int>(records.size());
        std::vector<MatchResult> base_matches(n), ens_matches(n);
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) {
            const auto& record = records[i];
            const auto& annos = lead_annotations(record, lead);
            const Inference base_inf = infer(record, lead, base_only, min_run);
            base_matches[i] =
                match_record(annos, base_inf.points, record.sampling_rate);
            const Inference ens_inf = infer(record, lead, members, min_run);
            ens_matches[i] =
                match_record(annos, ens_inf.points, record.sampling_rate);
        }
        MatchResult base_pool, ens_pool;
        for (int i = 0; i < n; ++i) {
            DistillRow row;
            row.patient_id = records[i].patient_id;
            row.split = split;
            row.f_base = f_score(base_matches[i]);
            row.f_ensemble = f_score(ens_matches[i]);
            report.rows.push_back(row);
            if (row.f_base < outlier_threshold) ++report.base_outliers;
            if (row.f_ensemble < outlier_threshold) ++report.ensemble_outliers;
            base_pool.merge(base_matches[i]);
            ens_pool.merge(ens_matches[i]);
        }
        base_pooled = f_score(base_pool);
        ensemble_pooled = f_score(ens_pool);
    };

    run_split(train_records, "train", report.base_train_f, report.ensemble_train_f);
    run_split(test_records, "test", report.base_test_f, report.ensemble_test_f);
    return report;
}

std::vector<ProbeRow> generalization_probe(
    const EnsembleManifest& manifest, const std::vector<std::string>& full_train_ids,
    const std::function<double(const std::string&, const std::string&)>& score_patient,
    double threshold) {
    std::vector<ProbeRow> rows;
    for (std::size_t idx = 0; idx < manifest.members.size(); ++idx) {
        const MemberRecord& member = manifest.members[idx];
        ProbeRow row;
        row.member_index = static_cast<int>(idx) + 1;
        row.subset_size = static_cast<int>(member.subset.size());
        row.probed = idx > 0;  // the first member saw the whole training set

        std::vector<std::string> unseen;
        for (const auto& id : full_train_ids)
            if (std::find(member.subset.begin(), member.subset.end(), id) ==
                member.subset.end())
                unseen.push_back(id);
        row.unseen_size = static_cast<int>(unseen.size());

        if (row.probed) {
            for (const auto& id : member.subset)
                if (score_patient(member.checkpoint, id) >= threshold) ++row.own_good;
            for (const auto& id : unseen)
                if (score_patient(member.checkpoint, id) >= threshold)
                    ++row.unseen_good;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace ecgseg

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ecgseg/dataset.hpp"
#include "ecgseg/evaluate.hpp"
#include "ecgseg/train.hpp"

namespace ecgseg {

struct EnsembleConfig {
    double screen_threshold = 0.99;  // patients at F >= threshold are removed
    int stagnation_retries = 5;      // re-trainings of one iteration before giving up
    int iteration_cap = 50;
    double outlier_threshold = 0.9;  // reporting only
    int min_run = kDefaultMinRun;
};

struct MemberRecord {
    std::string checkpoint;  // path relative to the manifest directory
    std::vector<std::string> subset;
    int iteration = 0;
    int retrains = 0;
};

struct EnsembleManifest {
    std::vector<MemberRecord> members;
    std::vector<int> stage_sizes;  // subset size before each iteration, then final
    std::vector<std::string> irreducible;  // patients never screened out
    double screen_threshold = 0.99;
    int stagnation_retries = 5;
    int iteration_cap = 50;
    std::uint64_t seed = 0;
};

void save_ensemble_manifest(const EnsembleManifest&, const std::filesystem::path&);
EnsembleManifest load_ensemble_manifest(const std::filesystem::path&);

// The builder is generic over how members are trained and scored so the
// termination logic can be exercised with stub models.
struct EnsembleCallbacks {
    // Trains one member on `subset` and returns a token for it (the real
    // pipeline returns a checkpoint path).
    std::function<std::string(const std::vector<std::string>& subset,
                              std::uint64_t seed, int iteration, int retrain)>
        train_member;
    // Patient F-score under the given member.
    std::function<double(const std::string& member_token,
                         const std::string& patient_id)>
        score_patient;
};

// Iteratively trains members, removing every patient the newest member
// already segments at F >= threshold. A stagnating iteration (no patient
// removed) is re-trained with a fresh seed; after `stagnation_retries`
// failures the last attempt is kept and the leftovers are reported as
// irreducible. Always terminates.
EnsembleManifest build_ensemble(const std::vector<std::string>& train_ids,
                                const EnsembleCallbacks& callbacks,
                                const EnsembleConfig& config,
                                std::uint64_t master_seed);

// Production wiring: trains real networks on subsets of `records` and writes
// member checkpoints under out_dir. When `base_checkpoint` is given, that
// network (already trained on the full training set) opens the ensemble as
// its first member instead of being trained again.
EnsembleManifest build_ensemble(const std::vector<EcgRecord>& records,
                                const TrainConfig& base_config,
                                const EnsembleConfig& config,
                                const std::filesystem::path& out_dir,
                                std::uint64_t master_seed,
                                const std::filesystem::path& base_checkpoint = {});

// Members get the same per-epoch step budget as the base network (derived
// from the full training-set size when the config leaves it at 0): screening
// only progresses when each member is trained to the point of fitting its
// subset, however small the subset is.

struct ProbeRow {
    int member_index = 0;  // 1-based
    int subset_size = 0;
    long own_good = 0;     // own-subset patients at F >= threshold
    int unseen_size = 0;
    long unseen_good = 0;  // unseen-training-set patients at F >= threshold
    bool probed = false;   // first member has no unseen part
};

// Per-member generalization probe: every member except the first is scored on
// the part of the training set it never saw.
std::vector<ProbeRow> generalization_probe(
    const EnsembleManifest& manifest, const std::vector<std::string>& full_train_ids,
    const std::function<double(const std::string& member_token,
                               const std::string& patient_id)>& score_patient,
    double threshold = 0.99);

struct DistillRow {
    std::string patient_id;
    std::string split;  // "train" or "test"
    double f_base = 0.0;
    double f_ensemble = 0.0;
};

struct DistillationReport {
    std::vector<DistillRow> rows;
    // Micro-pooled F over each split's patients.
    double base_train_f = 0.0, base_test_f = 0.0;
    double ensemble_train_f = 0.0, ensemble_test_f = 0.0;
    long base_outliers = 0, ensemble_outliers = 0;  // per-patient F < threshold
    double outlier_threshold = 0.9;
};

// Per-patient base-network and ensemble F over both splits, plus pooled
// summaries and outlier counts.
DistillationReport distillation_report(const std::vector<EcgRecord>& train_records,
                                       const std::vector<EcgRecord>& test_records,
                                       const ModelParams& base,
                                       const std::vector<ModelParams>& members,
                                       const std::string& lead, int min_run,
                                       double outlier_threshold);

}  // namespace ecgseg

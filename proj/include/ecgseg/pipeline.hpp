#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ecgseg/ensemble.hpp"
#include "ecgseg/evaluate.hpp"
#include "ecgseg/preprocess.hpp"
#include "ecgseg/train.hpp"

namespace ecgseg {

// Everything a full run needs; serialized as JSON so runs can be reproduced
// from the config echo alone.
struct RunConfig {
    std::filesystem::path dataset_dir;
    std::filesystem::path output_dir;
    std::string lead = kDefaultLead;
    std::uint64_t seed = 1;
    int threads = 0;           // 0: library default
    bool deterministic = true;  // gradient reduction order is fixed either way

    int batch_size = 8;
    int epochs = 50;
    int steps_per_epoch = 0;  // 0: derived from the training-set size
    double learning_rate = 1e-3;
    double rho = 0.9;
    double epsilon = 1e-8;
    double window_seconds = 6.0;
    Architecture arch;

    EnsembleConfig ensemble;
    int member_epochs = 0;  // 0: same as epochs

    FilterSpec filter;
    int min_run = kDefaultMinRun;
};

RunConfig load_run_config(const std::filesystem::path&);
void save_run_config(const RunConfig&, const std::filesystem::path&);

// Applies the thread budget (OpenMP) if configured.
void apply_thread_budget(const RunConfig&);

// Stage names accepted by run_all / --stage, in execution order.
const std::vector<std::string>& stage_names();

// Validates already-converted interchange files in src, copies them to dst
// and writes the manifest. Any invalid record aborts the import with a
// per-record error listing. Returns the number of records written.
int cmd_import(const std::filesystem::path& src, const std::filesystem::path& dst,
               std::uint64_t split_seed);

void stage_preprocess(const RunConfig&);
void stage_split(const RunConfig&);
void stage_train(const RunConfig&);
void stage_evaluate(const RunConfig&);
void stage_ensemble(const RunConfig&);
void stage_report(const RunConfig&);

// Runs every stage from `start_stage` (or all of them when empty). Throws
// StageError naming the failing stage.
class StageError : public std::runtime_error {
public:
    StageError(const std::string& stage, const std::string& what)
        : std::runtime_error("stage " + stage + " failed: " + what), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

void run_all(const RunConfig&, const std::string& start_stage = "");

// Paths of the run artifacts, all under output_dir.
struct RunPaths {
    std::filesystem::path preprocessed;
    std::filesystem::path split;
    std::filesystem::path base_checkpoint;
    std::filesystem::path base_loss_log;
    std::filesystem::path eval_dir;
    std::filesystem::path base_test_metrics;
    std::filesystem::path base_patients;
    std::filesystem::path base_predictions;
    std::filesystem::path ensemble_dir;
    std::filesystem::path ensemble_manifest;
    std::filesystem::path stage_history;
    std::filesystem::path ensemble_test_metrics;
    std::filesystem::path ensemble_patients;
    std::filesystem::path report_dir;
    std::filesystem::path scattergram_csv;
    std::filesystem::path probe_csv;
    std::filesystem::path summary;
};
RunPaths run_paths(const RunConfig&);

// Loads the ensemble member models listed in a manifest.
std::vector<ModelParams> load_members(const EnsembleManifest&,
                                      const std::filesystem::path& ensemble_dir);

}  // namespace ecgseg

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ecgseg/pipeline.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string dataset_dir;
    std::string output_dir;
    std::string lead;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = -1;
    bool deterministic = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "run configuration file (JSON)")
        ->envname("ECGSEG_CONFIG");
    cmd->add_option("--data", opts.dataset_dir, "imported dataset directory")
        ->envname("ECGSEG_DATA");
    cmd->add_option("--out", opts.output_dir, "output directory")
        ->envname("ECGSEG_OUT");
    cmd->add_option("--lead", opts.lead, "training/evaluation lead")
        ->envname("ECGSEG_LEAD");
    cmd->add_option_function<std::uint64_t>(
           "--seed",
           [&opts](std::uint64_t v) {
               opts.seed = v;
               opts.seed_set = true;
           },
           "master seed governing split, init, window sampling and reseeds")
        ->envname("ECGSEG_SEED");
    cmd->add_option("--threads", opts.threads, "worker thread budget (0 = default)")
        ->envname("ECGSEG_THREADS");
    cmd->add_flag("--deterministic", opts.deterministic,
                  "fixed gradient reduction order (always on in this build)");
}

ecgseg::RunConfig resolve_config(const CommonOpts& opts) {
    ecgseg::RunConfig cfg;
    if (!opts.config_path.empty()) cfg = ecgseg::load_run_config(opts.config_path);
    if (!opts.dataset_dir.empty()) cfg.dataset_dir = opts.dataset_dir;
    if (!opts.output_dir.empty()) cfg.output_dir = opts.output_dir;
    if (!opts.lead.empty()) cfg.lead = opts.lead;
    if (opts.seed_set) cfg.seed = opts.seed;
    if (opts.threads >= 0) cfg.threads = opts.threads;
    if (opts.deterministic) cfg.deterministic = true;
    if (cfg.dataset_dir.empty())
        throw CLI::ValidationError("--data (or dataset_dir in --config) is required");
    if (cfg.output_dir.empty())
        throw CLI::ValidationError("--out (or output_dir in --config) is required");
    return cfg;
}

int run_stages(const CommonOpts& opts, const std::string& first,
               const std::string& last) {
    const ecgseg::RunConfig cfg = resolve_config(opts);
    ecgseg::apply_thread_budget(cfg);
    std::filesystem::create_directories(cfg.output_dir);
    ecgseg::save_run_config(cfg, cfg.output_dir / "run_config.json");

    bool active = false;
    for (const auto& name : ecgseg::stage_names()) {
        if (name == first) active = true;
        if (!active) continue;
        try {
            if (name == "preprocess") ecgseg::stage_preprocess(cfg);
            else if (name == "split") ecgseg::stage_split(cfg);
            else if (name == "train") ecgseg::stage_train(cfg);
            else if (name == "evaluate") ecgseg::stage_evaluate(cfg);
            else if (name == "ensemble") ecgseg::stage_ensemble(cfg);
            else if (name == "report") ecgseg::stage_report(cfg);
        } catch (const std::exception& e) {
            std::cerr << "stage " << name << " failed: " << e.what() << "\n";
            return 1;
        }
        if (name == last) break;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ECG wave segmentation: preprocessing, 1-D conv segmenter "
                 "training, boundary-point evaluation and error-correcting "
                 "ensemble construction"};
    app.require_subcommand(1);

    // import
    std::string import_src, import_dst;
    std::uint64_t import_seed = 1;
    CLI::App* import_cmd =
        app.add_subcommand("import", "validate converted records and write the "
                                     "dataset directory with its manifest");
    import_cmd->add_option("src", import_src, "directory of interchange files")
        ->required();
    import_cmd->add_option("dst", import_dst, "dataset directory to create")
        ->required();
    import_cmd->add_option("--seed", import_seed, "split seed recorded in the manifest")
        ->envname("ECGSEG_SEED");

    CommonOpts preprocess_opts, train_opts, evaluate_opts, ensemble_opts,
        report_opts, run_all_opts;
    CLI::App* preprocess_cmd = app.add_subcommand(
        "preprocess", "baseline-correct every lead of every record");
    add_common(preprocess_cmd, preprocess_opts);
    CLI::App* train_cmd =
        app.add_subcommand("train", "train the base segmentation network");
    add_common(train_cmd, train_opts);
    CLI::App* evaluate_cmd = app.add_subcommand(
        "evaluate", "score the base network on the test split");
    add_common(evaluate_cmd, evaluate_opts);
    CLI::App* ensemble_cmd = app.add_subcommand(
        "ensemble", "build and score the error-correcting ensemble");
    add_common(ensemble_cmd, ensemble_opts);
    CLI::App* report_cmd = app.add_subcommand(
        "report", "emit scattergram, probe and summary artifacts");
    add_common(report_cmd, report_opts);
    CLI::App* run_all_cmd =
        app.add_subcommand("run-all", "run the whole pipeline");
    add_common(run_all_cmd, run_all_opts);
    std::string start_stage;
    run_all_cmd
        ->add_option("--stage", start_stage,
                     "resume from this stage (preprocess, split, train, "
                     "evaluate, ensemble, report)")
        ->envname("ECGSEG_STAGE");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*import_cmd) {
            const int n = ecgseg::cmd_import(import_src, import_dst, import_seed);
            std::cout << "imported " << n << " records into " << import_dst << "\n";
            return 0;
        }
        if (*preprocess_cmd) {
            return run_stages(preprocess_opts, "preprocess", "preprocess");
        }
        if (*train_cmd) return run_stages(train_opts, "preprocess", "train");
        if (*evaluate_cmd) return run_stages(evaluate_opts, "evaluate", "evaluate");
        if (*ensemble_cmd) return run_stages(ensemble_opts, "ensemble", "ensemble");
        if (*report_cmd) return run_stages(report_opts, "report", "report");
        if (*run_all_cmd) {
            const std::string first =
                start_stage.empty() ? std::string("preprocess") : start_stage;
            bool known = false;
            for (const auto& name : ecgseg::stage_names()) known |= (name == first);
            if (!known) {
                std::cerr << "unknown stage: " << first << "\n";
                return 2;
            }
            return run_stages(run_all_opts, first, "report");
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

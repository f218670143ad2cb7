#include "ecgseg/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>

#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "ecgseg/report.hpp"

namespace ecgseg {

using nlohmann::json;

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("config " + path.string() + ": " + e.what());
    }

    RunConfig cfg;
    try {
        auto get = [&](const json& obj, const char* key, auto fallback) {
            using T = decltype(fallback);
            return obj.contains(key) ? obj.at(key).get<T>() : fallback;
        };
        cfg.dataset_dir = get(j, "dataset_dir", std::string());
        cfg.output_dir = get(j, "output_dir", std::string());
        cfg.lead = get(j, "lead", std::string(kDefaultLead));
        cfg.seed = get(j, "seed", std::uint64_t{1});
        cfg.threads = get(j, "threads", 0);
        cfg.deterministic = get(j, "deterministic", true);
        if (j.contains("train")) {
            const json& t = j.at("train");
            cfg.batch_size = get(t, "batch_size", cfg.batch_size);
            cfg.epochs = get(t, "epochs", cfg.epochs);
            cfg.steps_per_epoch = get(t, "steps_per_epoch", cfg.steps_per_epoch);
            cfg.learning_rate = get(t, "learning_rate", cfg.learning_rate);
            cfg.rho = get(t, "rho", cfg.rho);
            cfg.epsilon = get(t, "epsilon", cfg.epsilon);
            cfg.window_seconds = get(t, "window_seconds", cfg.window_seconds);
        }
        if (j.contains("arch")) {
            const json& a = j.at("arch");
            cfg.arch.widths = get(a, "widths", cfg.arch.widths);
            cfg.arch.kernels = get(a, "kernels", cfg.arch.kernels);
        }
        if (j.contains("ensemble")) {
            const json& e = j.at("ensemble");
            cfg.ensemble.screen_threshold =
                get(e, "screen_threshold", cfg.ensemble.screen_threshold);
            cfg.ensemble.stagnation_retries =
                get(e, "stagnation_retries", cfg.ensemble.stagnation_retries);
            cfg.ensemble.iteration_cap = get(e, "iteration_cap", cfg.ensemble.iteration_cap);
            cfg.ensemble.outlier_threshold =
                get(e, "outlier_threshold", cfg.ensemble.outlier_threshold);
            cfg.member_epochs = get(e, "member_epochs", cfg.member_epochs);
        }
        if (j.contains("preprocess")) {
            const json& p = j.at("preprocess");
            cfg.filter.window1_ms = get(p, "window1_ms", cfg.filter.window1_ms);
            cfg.filter.window2_ms = get(p, "window2_ms", cfg.filter.window2_ms);
        }
        if (j.contains("evaluate")) {
            const json& e = j.at("evaluate");
            cfg.min_run = get(e, "min_run", cfg.min_run);
        }
    } catch (const json::exception& e) {
        throw ParseError("config " + path.string() + ": " + e.what());
    }
    cfg.ensemble.min_run = cfg.min_run;
    return cfg;
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
    json j;
    j["dataset_dir"] = cfg.dataset_dir.string();
    j["output_dir"] = cfg.output_dir.string();
    j["lead"] = cfg.lead;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["deterministic"] = cfg.deterministic;
    j["train"] = {{"batch_size", cfg.batch_size},
                  {"epochs", cfg.epochs},
                  {"steps_per_epoch", cfg.steps_per_epoch},
                  {"learning_rate", cfg.learning_rate},
                  {"rho", cfg.rho},
                  {"epsilon", cfg.epsilon},
                  {"window_seconds", cfg.window_seconds}};
    j["arch"] = {{"widths", cfg.arch.widths}, {"kernels", cfg.arch.kernels}};
    j["ensemble"] = {{"screen_threshold", cfg.ensemble.screen_threshold},
                     {"stagnation_retries", cfg.ensemble.stagnation_retries},
                     {"iteration_cap", cfg.ensemble.iteration_cap},
                     {"outlier_threshold", cfg.ensemble.outlier_threshold},
                     {"member_epochs", cfg.member_epochs}};
    j["preprocess"] = {{"window1_ms", cfg.filter.window1_ms},
                       {"window2_ms", cfg.filter.window2_ms}};
    j["evaluate"] = {{"min_run", cfg.min_run}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config: " + path.string());
    out << j.dump(2) << "\n";
}

void apply_thread_budget(const RunConfig& cfg) {
#ifdef _OPENMP
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#else
    (void)cfg;
#endif
}

const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names = {
        "preprocess", "split", "train", "evaluate", "ensemble", "report"};
    return names;
}

RunPaths run_paths(const RunConfig& cfg) {
    RunPaths p;
    const auto& out = cfg.output_dir;
    p.preprocessed = out / "preprocessed";
    p.split = out / "split.json";
    p.base_checkpoint = out / "base_checkpoint.json";
    p.base_loss_log = out / "base_loss_log.csv";
    p.eval_dir = out / "eval";
    p.base_test_metrics = p.eval_dir / "base_test_metrics.csv";
    p.base_patients = p.eval_dir / "base_patients.csv";
    p.base_predictions = p.eval_dir / "base_predictions.json";
    p.ensemble_dir = out / "ensemble";
    p.ensemble_manifest = p.ensemble_dir / "ensemble_manifest.json";
    p.stage_history = p.ensemble_dir / "stage_history.csv";
    p.ensemble_test_metrics = p.eval_dir / "ensemble_test_metrics.csv";
    p.ensemble_patients = p.eval_dir / "ensemble_patients.csv";
    p.report_dir = out / "report";
    p.scattergram_csv = p.report_dir / "scattergram.csv";
    p.probe_csv = p.report_dir / "probe.csv";
    p.summary = p.report_dir / "summary.json";
    return p;
}

int cmd_import(const std::filesystem::path& src, const std::filesystem::path& dst,
               std::uint64_t split_seed) {
    if (!std::filesystem::is_directory(src))
        throw std::runtime_error("import: source directory does not exist: " +
                                 src.string());

    std::vector<std::string> files;
    if (std::filesystem::exists(src / "manifest.json")) {
        files = read_manifest(src).records;
    } else {
        for (const auto& entry : std::filesystem::directory_iterator(src)) {
            if (entry.path().extension() == ".json" &&
                entry.path().filename() != "manifest.json")
                files.push_back(entry.path().filename().string());
        }
        std::sort(files.begin(), files.end());
    }
    if (files.empty())
        throw std::runtime_error("import: no records found in " + src.string());

    std::vector<std::string> problems;
    std::vector<EcgRecord> records;
    for (const auto& file : files) {
        try {
            records.push_back(parse_record(src / file));
        } catch (const std::exception& e) {
            problems.push_back(file + ": " + e.what());
        }
    }
    if (!problems.empty()) {
        std::string msg = "import: " + std::to_string(problems.size()) +
                          " invalid record(s):";
        for (const auto& p : problems) msg += "\n" + p;
        throw std::runtime_error(msg);
    }

    std::filesystem::create_directories(dst);
    Manifest manifest;
    manifest.split_seed = split_seed;
    for (std::size_t i = 0; i < records.size(); ++i) {
        write_record(records[i], dst / files[i]);
        manifest.records.push_back(files[i]);
    }
    write_manifest(manifest, dst);
    return static_cast<int>(records.size());
}

namespace {

TrainConfig make_train_config(const RunConfig& cfg) {
    TrainConfig t;
    t.lead = cfg.lead;
    t.window_seconds = cfg.window_seconds;
    t.batch_size = cfg.batch_size;
    t.epochs = cfg.epochs;
    t.steps_per_epoch = cfg.steps_per_epoch;
    t.seed = derive_seed(cfg.seed, "base-training");
    t.rho = cfg.rho;
    t.learning_rate = cfg.learning_rate;
    t.epsilon = cfg.epsilon;
    t.arch = cfg.arch;
    return t;
}

struct SplitRecords {
    std::vector<EcgRecord> train;
    std::vector<EcgRecord> test;
};

SplitRecords load_split_records(const RunConfig& cfg) {
    const RunPaths paths = run_paths(cfg);
    std::vector<EcgRecord> all = load_dataset(paths.preprocessed);
    const DatasetSplit split = read_split(paths.split);

    std::map<std::string, EcgRecord*> by_id;
    for (auto& r : all) by_id[r.patient_id] = &r;

    SplitRecords out;
    for (const auto& id : split.train_ids) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw std::runtime_error("split references unknown patient " + id);
        out.train.push_back(std::move(*it->second));
    }
    for (const auto& id : split.test_ids) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw std::runtime_error("split references unknown patient " + id);
        out.test.push_back(std::move(*it->second));
    }
    return out;
}

// Pooled metrics + per-patient scores for one model over one record list.
struct SplitEvaluation {
    MatchResult pooled;
    std::vector<PatientScore> patients;
};

SplitEvaluation evaluate_records(const std::vector<EcgRecord>& records,
                                 const std::vector<ModelParams>& members,
                                 const std::string& lead, int min_run) {
    const int n = static_cast<int>(records.size());
    std::vector<MatchResult> matches(n);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        const Inference inf = infer(records[i], lead, members, min_run);
        matches[i] = match_record(lead_annotations(records[i], lead), inf.points,
                                  records[i].sampling_rate);
    }
    SplitEvaluation eval;
    for (int i = 0; i < n; ++i) {
        eval.pooled.merge(matches[i]);
        eval.patients.push_back({records[i].patient_id, f_score(matches[i])});
    }
    return eval;
}

void write_patients_csv(const std::vector<PatientScore>& train,
                        const std::vector<PatientScore>& test,
                        const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "patient_id,split,f\n";
    for (const auto& p : train)
        out << p.patient_id << ",train," << format_double(p.f) << "\n";
    for (const auto& p : test)
        out << p.patient_id << ",test," << format_double(p.f) << "\n";
}

}  // namespace

void stage_preprocess(const RunConfig& cfg) {
    const RunPaths paths = run_paths(cfg);
    const std::vector<EcgRecord> records = load_dataset(cfg.dataset_dir);
    const Manifest manifest = read_manifest(cfg.dataset_dir);

    std::filesystem::create_directories(paths.preprocessed);
    const int n = static_cast<int>(records.size());
    std::vector<EcgRecord> corrected(n);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) corrected[i] = remove_baseline(records[i], cfg.filter);
    for (int i = 0; i < n; ++i)
        write_record(corrected[i], paths.preprocessed / manifest.records[i]);
    write_manifest(manifest, paths.preprocessed);
    std::cout << "[preprocess] corrected " << n << " records" << std::endl;
}

void stage_split(const RunConfig& cfg) {
    const RunPaths paths = run_paths(cfg);
    const Manifest manifest = read_manifest(paths.preprocessed);
    std::vector<std::string> ids;
    for (const auto& file : manifest.records)
        ids.push_back(std::filesystem::path(file).stem().string());
    const DatasetSplit split = split_dataset(ids, derive_seed(cfg.seed, "split"));
    write_split(split, paths.split);
    std::cout << "[split] " << split.train_ids.size() << " train / "
              << split.test_ids.size() << " test (seed " << cfg.seed << ")" << std::endl;
}

void stage_train(const RunConfig& cfg) {
    const RunPaths paths = run_paths(cfg);
    const SplitRecords records = load_split_records(cfg);

    TrainConfig train_cfg = make_train_config(cfg);
    train_cfg.checkpoint_path = paths.base_checkpoint;
    train_cfg.loss_log_path = paths.base_loss_log;

    std::cout << "[train] " << records.train.size() << " patients, "
              << param_count(make_model(cfg.arch, 0)) << " parameters" << std::endl;
    train_base(records.train, train_cfg, [](int epoch, double loss) {
        std::cout << "[train] epoch " << epoch << " mean loss " << loss << std::endl;
    });
}

void stage_evaluate(const RunConfig& cfg) {
    const RunPaths paths = run_paths(cfg);
    const SplitRecords records = load_split_records(cfg);
    const Checkpoint base = load_checkpoint(paths.base_checkpoint);
    const std::vector<ModelParams> members = {base.model};

    std::filesystem::create_directories(paths.eval_dir);
    const SplitEvaluation test_eval =
        evaluate_records(records.test, members, cfg.lead, cfg.min_run);
    const SplitEvaluation train_eval =
        evaluate_records(records.train, members, cfg.lead, cfg.min_run);

    write_metrics_csv(compute_metrics(test_eval.pooled), paths.base_test_metrics);
    write_patients_csv(train_eval.patients, test_eval.patients, paths.base_patients);

    // Predicted annotations for the test split, interchange schema.
    json predictions = json::object();
    for (const auto& record : records.test) {
        const Inference inf = infer(record, cfg.lead, members, cfg.min_run);
        json arr = json::array();
        for (const auto& a : predicted_annotations(inf.points, inf.probs))
            arr.push_back(json::array(
                {wave_type_name(a.type), a.onset, a.peak, a.offset}));
        predictions[record.patient_id] = std::move(arr);
    }
    std::ofstream pred_out(paths.base_predictions);
    pred_out << predictions.dump(2) << "\n";

    std::cout << "[evaluate] test F " << f_score(test_eval.pooled) << std::endl;
}

void stage_ensemble(const RunConfig& cfg) {
    const RunPaths paths = run_paths(cfg);
    const SplitRecords records = load_split_records(cfg);

    TrainConfig member_cfg = make_train_config(cfg);
    if (cfg.member_epochs > 0) member_cfg.epochs = cfg.member_epochs;

    EnsembleConfig ens_cfg = cfg.ensemble;
    ens_cfg.min_run = cfg.min_run;

    const EnsembleManifest manifest = build_ensemble(
        records.train, member_cfg, ens_cfg, paths.ensemble_dir,
        derive_seed(cfg.seed, "ensemble"), paths.base_checkpoint);

    write_stage_history_csv(manifest, paths.stage_history);

    const std::vector<ModelParams> members =
        load_members(manifest, paths.ensemble_dir);
    std::filesystem::create_directories(paths.eval_dir);
    const SplitEvaluation test_eval =
        evaluate_records(records.test, members, cfg.lead, cfg.min_run);
    const SplitEvaluation train_eval =
        evaluate_records(records.train, members, cfg.lead, cfg.min_run);
    write_metrics_csv(compute_metrics(test_eval.pooled), paths.ensemble_test_metrics);
    write_patients_csv(train_eval.patients, test_eval.patients,
                       paths.ensemble_patients);

    std::cout << "[ensemble] " << manifest.members.size() << " members, "
              << manifest.irreducible.size() << " irreducible patients, test F "
              << f_score(test_eval.pooled) << std::endl;
}

std::vector<ModelParams> load_members(const EnsembleManifest& manifest,
                                      const std::filesystem::path& ensemble_dir) {
    std::vector<ModelParams> members;
    members.reserve(manifest.members.size());
    for (const auto& member : manifest.members)
        members.push_back(load_checkpoint(ensemble_dir / member.checkpoint).model);
    return members;
}

void stage_report(const RunConfig& cfg) {
    const RunPaths paths = run_paths(cfg);
    const SplitRecords records = load_split_records(cfg);
    const Checkpoint base = load_checkpoint(paths.base_checkpoint);
    const EnsembleManifest manifest = load_ensemble_manifest(paths.ensemble_manifest);
    const std::vector<ModelParams> members =
        load_members(manifest, paths.ensemble_dir);

    std::filesystem::create_directories(paths.report_dir);

    const DistillationReport distill = distillation_report(
        records.train, records.test, base.model, members, cfg.lead, cfg.min_run,
        cfg.ensemble.outlier_threshold);
    write_scattergram_csv(distill.rows, paths.scattergram_csv);
    write_scattergram_svg(distill.rows, "train", cfg.ensemble.outlier_threshold,
                          paths.report_dir / "scattergram_train.svg");
    write_scattergram_svg(distill.rows, "test", cfg.ensemble.outlier_threshold,
                          paths.report_dir / "scattergram_test.svg");

    // Generalization probe against the cached member models.
    std::map<std::string, const ModelParams*> member_models;
    for (std::size_t i = 0; i < manifest.members.size(); ++i)
        member_models[manifest.members[i].checkpoint] = &members[i];
    std::map<std::string, const EcgRecord*> by_id;
    for (const auto& r : records.train) by_id[r.patient_id] = &r;

    const std::vector<std::string> train_ids = patient_ids(records.train);
    const auto score = [&](const std::string& token, const std::string& id) {
        const EcgRecord& record = *by_id.at(id);
        const Inference inf =
            infer(record, cfg.lead, {*member_models.at(token)}, cfg.min_run);
        return f_score(match_record(lead_annotations(record, cfg.lead), inf.points,
                                    record.sampling_rate));
    };
    const std::vector<ProbeRow> probe = generalization_probe(
        manifest, train_ids, score, cfg.ensemble.screen_threshold);
    write_probe_csv(probe, paths.probe_csv);

    json summary;
    summary["lead"] = cfg.lead;
    summary["min_run"] = cfg.min_run;
    summary["f_aggregation"] = "micro";
    summary["annotation_scope"] = "configured lead only";
    summary["param_count"] = param_count(base.model);
    summary["reference_param_count"] = kReferenceParamCount;
    summary["base_train_f"] = distill.base_train_f;
    summary["base_test_f"] = distill.base_test_f;
    summary["ensemble_train_f"] = distill.ensemble_train_f;
    summary["ensemble_test_f"] = distill.ensemble_test_f;
    summary["outlier_threshold"] = distill.outlier_threshold;
    summary["base_outliers"] = distill.base_outliers;
    summary["ensemble_outliers"] = distill.ensemble_outliers;
    summary["ensemble_members"] = manifest.members.size();
    summary["irreducible_patients"] = manifest.irreducible;
    std::ofstream out(paths.summary);
    out << summary.dump(2) << "\n";

    std::cout << "[report] base test F " << distill.base_test_f
              << ", ensemble test F " << distill.ensemble_test_f << std::endl;
}

void run_all(const RunConfig& cfg, const std::string& start_stage) {
    apply_thread_budget(cfg);
    std::filesystem::create_directories(cfg.output_dir);
    save_run_config(cfg, cfg.output_dir / "run_config.json");

    const auto& names = stage_names();
    std::size_t start = 0;
    if (!start_stage.empty()) {
        const auto it = std::find(names.begin(), names.end(), start_stage);
        if (it == names.end())
            throw std::invalid_argument("unknown stage: " + start_stage);
        start = static_cast<std::size_t>(it - names.begin());
    }

    using StageFn = void (*)(const RunConfig&);
    const StageFn stages[] = {stage_preprocess, stage_split, stage_train,
                              stage_evaluate, stage_ensemble, stage_report};
    for (std::size_t i = start; i < names.size(); ++i) {
        try {
            stages[i](cfg);
        } catch (const std::exception& e) {
            throw StageError(names[i], e.what());
        }
    }
}

}  // namespace ecgseg

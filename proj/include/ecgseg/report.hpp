#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ecgseg/ensemble.hpp"
#include "ecgseg/evaluate.hpp"

namespace ecgseg {

// All report files are plain CSV with fixed headers; every writer here has a
// matching generic reader so the toolkit can re-parse its own output.

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path&);

// Header: point_type,se,ppv,m_ms,sigma_ms,tp,fp,fn
void write_metrics_csv(const MetricsReport&, const std::filesystem::path&);

// Header: patient_id,split,f
void write_patient_scores_csv(const std::vector<DistillRow>&, bool ensemble_column,
                              const std::filesystem::path&);

// Header: patient_id,split,f_base,f_ensemble
void write_scattergram_csv(const std::vector<DistillRow>&,
                           const std::filesystem::path&);

// Header: iteration,subset_size,retrains
void write_stage_history_csv(const EnsembleManifest&, const std::filesystem::path&);

// Header: member,subset_size,own_good,unseen_size,unseen_good,probed
void write_probe_csv(const std::vector<ProbeRow>&, const std::filesystem::path&);

// Two-panel scatter (base | ensemble) of per-patient F for one split, with a
// dashed line at the outlier threshold.
void write_scattergram_svg(const std::vector<DistillRow>& rows,
                           const std::string& split, double outlier_threshold,
                           const std::filesystem::path&);

std::string format_double(double v);  // canonical numeric formatting ("nan" allowed)

}  // namespace ecgseg

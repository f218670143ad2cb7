#include "ecgseg/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ecgseg {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report file: " + path.string());
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open csv: " + path.string());
    CsvTable table;
    std::string line;
    if (std::getline(in, line)) table.header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        table.rows.push_back(split_line(line));
    }
    return table;
}

void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "point_type,se,ppv,m_ms,sigma_ms,tp,fp,fn\n";
    for (int k = 0; k < kNumPointTypes; ++k) {
        const TypeMetrics& t = report.per_type[k];
        out << point_type_name(static_cast<PointType>(k)) << ','
            << format_double(t.se) << ',' << format_double(t.ppv) << ','
            << format_double(t.m) << ',' << format_double(t.sigma) << ',' << t.tp
            << ',' << t.fp << ',' << t.fn << '\n';
    }
}

void write_patient_scores_csv(const std::vector<DistillRow>& rows,
                              bool ensemble_column,
                              const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "patient_id,split,f\n";
    for (const auto& r : rows)
        out << r.patient_id << ',' << r.split << ','
            << format_double(ensemble_column ? r.f_ensemble : r.f_base) << '\n';
}

void write_scattergram_csv(const std::vector<DistillRow>& rows,
                           const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "patient_id,split,f_base,f_ensemble\n";
    for (const auto& r : rows)
        out << r.patient_id << ',' << r.split << ',' << format_double(r.f_base)
            << ',' << format_double(r.f_ensemble) << '\n';
}

void write_stage_history_csv(const EnsembleManifest& manifest,
                             const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "iteration,subset_size,retrains\n";
    for (const auto& member : manifest.members)
        out << member.iteration << ',' << member.subset.size() << ','
            << member.retrains << '\n';
}

void write_probe_csv(const std::vector<ProbeRow>& rows,
                     const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "member,subset_size,own_good,unseen_size,unseen_good,probed\n";
    for (const auto& r : rows)
        out << r.member_index << ',' << r.subset_size << ',' << r.own_good << ','
            << r.unseen_size << ',' << r.unseen_good << ','
            << (r.probed ? "yes" : "no") << '\n';
}

namespace {

void draw_panel(std::ostream& out, int x0, int y0, int w, int h,
                const std::vector<double>& values, const std::string& title,
                double outlier_threshold) {
    out << "<g>\n";
    out << "  <rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << w
        << "\" height=\"" << h << "\" fill=\"white\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << x0 + w / 2 << "\" y=\"" << y0 - 8
        << "\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    // y axis: F in [0, 1.05]
    auto fy = [&](double f) { return y0 + h - f / 1.05 * h; };
    for (double tick : {0.0, 0.5, 0.9, 1.0}) {
        out << "  <line x1=\"" << x0 - 4 << "\" y1=\"" << fy(tick) << "\" x2=\""
            << x0 << "\" y2=\"" << fy(tick) << "\" stroke=\"black\"/>\n";
        out << "  <text x=\"" << x0 - 8 << "\" y=\"" << fy(tick) + 4
            << "\" text-anchor=\"end\" font-size=\"10\">" << tick << "</text>\n";
    }
    out << "  <line x1=\"" << x0 << "\" y1=\"" << fy(outlier_threshold)
        << "\" x2=\"" << x0 + w << "\" y2=\"" << fy(outlier_threshold)
        << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    const int n = static_cast<int>(values.size());
    for (int i = 0; i < n; ++i) {
        const double cx = x0 + (n > 1 ? (0.5 + i) * w / n : w / 2.0);
        out << "  <circle cx=\"" << cx << "\" cy=\"" << fy(values[i])
            << "\" r=\"2.5\" fill=\"seagreen\" fill-opacity=\"0.7\"/>\n";
    }
    out << "</g>\n";
}

}  // namespace

void write_scattergram_svg(const std::vector<DistillRow>& rows,
                           const std::string& split, double outlier_threshold,
                           const std::filesystem::path& path) {
    std::vector<double> base, ens;
    for (const auto& r : rows) {
        if (r.split != split) continue;
        base.push_back(r.f_base);
        ens.push_back(r.f_ensemble);
    }

    const int panel_w = 420, panel_h = 260, margin = 50, gap = 60;
    const int width = margin * 2 + panel_w * 2 + gap;
    const int height = margin * 2 + panel_h;

    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n";
    draw_panel(out, margin, margin, panel_w, panel_h, base,
               "base network (" + split + ")", outlier_threshold);
    draw_panel(out, margin + panel_w + gap, margin, panel_w, panel_h, ens,
               "ensemble (" + split + ")", outlier_threshold);
    out << "</svg>\n";
}

}  // namespace ecgseg

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaze_events/classify.hpp"
#include "gaze_events/csv.hpp"
#include "gaze_events/metrics.hpp"
#include "gaze_events/simulate.hpp"

namespace gaze::io {

inline constexpr const char* kFixationHeader =
    "x_f,y_f,z_f,t_start_ms,duration_ms,first_index,last_index,corrected";

inline void write_fixations_csv(std::ostream& out, const std::vector<Fixation>& fixations) {
    out << kFixationHeader << '\n';
    for (const Fixation& f : fixations) {
        out << csv::fmt(f.center.x) << ',' << csv::fmt(f.center.y) << ',' << csv::fmt(f.center.z)
            << ',' << csv::fmt(f.t_start_ms) << ',' << csv::fmt(f.duration_ms) << ','
            << f.first_index << ',' << f.last_index << ',' << (f.corrected ? 1 : 0) << '\n';
    }
}

inline std::vector<Fixation> read_fixations_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || csv::trim(line) != kFixationHeader)
        throw FormatError("bad fixation CSV header");
    std::vector<Fixation> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto cells = csv::split_line(line);
        if (cells.size() != 8)
            throw FormatError("fixation CSV line " + std::to_string(line_no) + ": bad cell count");
        auto cell = [&](std::size_t i, const char* col) {
            const auto v = csv::parse_cell(cells[i], line_no, col);
            if (!v)
                throw FormatError("fixation CSV line " + std::to_string(line_no) + ": empty " +
                                  col);
            return *v;
        };
        Fixation f;
        f.center = {cell(0, "x_f"), cell(1, "y_f"), cell(2, "z_f")};
        f.t_start_ms = cell(3, "t_start_ms");
        f.duration_ms = cell(4, "duration_ms");
        f.first_index = static_cast<std::size_t>(cell(5, "first_index"));
        f.last_index = static_cast<std::size_t>(cell(6, "last_index"));
        f.corrected = cell(7, "corrected") != 0.0;
        out.push_back(f);
    }
    return out;
}

inline void write_labels_csv(std::ostream& out, const std::vector<Label>& labels) {
    out << "index,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i)
        out << i << ',' << (labels[i] == Label::Fixation ? "fixation" : "saccade") << '\n';
}

inline std::vector<Label> read_labels_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || csv::trim(line) != "index,label")
        throw FormatError("bad label CSV header");
    std::vector<Label> out;
    while (std::getline(in, line)) {
        if (csv::trim(line).empty()) continue;
        const auto cells = csv::split_line(line);
        if (cells.size() != 2) throw FormatError("bad label CSV row");
        if (cells[1] == "fixation")
            out.push_back(Label::Fixation);
        else if (cells[1] == "saccade")
            out.push_back(Label::Saccade);
        else
            throw FormatError("bad label '" + cells[1] + "'");
    }
    return out;
}

inline void write_truth_csv(std::ostream& out, const GroundTruth& truth) {
    out << "index,label,target_index\n";
    for (std::size_t i = 0; i < truth.labels.size(); ++i) {
        const char* label = truth.labels[i] == TruthLabel::Fixation  ? "fixation"
                            : truth.labels[i] == TruthLabel::Saccade ? "saccade"
                                                                     : "blink";
        out << i << ',' << label << ',' << truth.target_index[i] << '\n';
    }
}

inline nlohmann::json report_to_json(const MetricReport& r) {
    nlohmann::json j;
    for (std::size_t i = 0; i < kMetricCount; ++i) {
        j["raw"][kMetricNames[i]] = r.raw[i];
        j["deviation"][kMetricNames[i]] = r.deviations[i];
        j["normalized"][kMetricNames[i]] = r.normalized[i];
    }
    j["ideals"] = {{"afn", r.ideals.afn},           {"afd_ms", r.ideals.afd_ms},
                   {"ans", r.ideals.ans},           {"asa_deg", r.ideals.asa_deg},
                   {"fqns_pct", r.ideals.fqns_pct}, {"fqls_m", r.ideals.fqls_m},
                   {"sqns_pct", r.ideals.sqns_pct}};
    j["overall"] = r.overall;
    j["flags"] = {{"fqls_degenerate", r.fqls_degenerate},
                  {"afd_degenerate", r.afd_degenerate},
                  {"asa_degenerate", r.asa_degenerate}};
    return j;
}

/// Report plus the normalization population it was scored against.
inline nlohmann::json report_to_json(const MetricReport& r, const NormalizationBounds& bounds,
                                     const std::string& run_id) {
    nlohmann::json j = report_to_json(r);
    j["provenance"] = {{"normalization_min", bounds.min},
                       {"normalization_max", bounds.max},
                       {"run_id", run_id}};
    return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("failed writing " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace gaze::io

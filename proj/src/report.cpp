#include "exactrep/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace exactrep {

ReportRow ReportRow::from(const std::string& id, const McReport& rep) {
    ReportRow row;
    row.experiment = id;
    row.grid_n = rep.grid_n;
    row.paths = rep.n_paths;
    row.mean_gap_sq = rep.mean_gap_sq;
    row.se_gap_sq = rep.se_gap_sq;
    row.mean_cost = rep.mean_cost;
    row.se_cost = rep.se_cost;
    row.closed_form_cost = rep.closed_form_cost;
    return row;
}

std::string csv_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

constexpr const char* kReportHeader =
    "experiment,grid_n,paths,mean_gap_sq,se_gap_sq,mean_cost,se_cost,closed_form_cost";

std::string row_text(const ReportRow& r) {
    std::string line = r.experiment;
    line += ',' + std::to_string(r.grid_n);
    line += ',' + std::to_string(r.paths);
    line += ',' + csv_double(r.mean_gap_sq);
    line += ',' + csv_double(r.se_gap_sq);
    line += ',' + csv_double(r.mean_cost);
    line += ',' + csv_double(r.se_cost);
    line += ',' + csv_double(r.closed_form_cost);
    return line;
}

} // namespace

std::string report_csv_text(const std::vector<ReportRow>& rows) {
    std::string out = kReportHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += row_text(r);
        out += '\n';
    }
    return out;
}

std::string converge_csv_text(const std::vector<ReportRow>& rows, const std::vector<double>& ratios) {
    std::string out = kReportHeader;
    out += ",gap_sq_ratio\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out += row_text(rows[i]);
        out += ',';
        if (i > 0 && i - 1 < ratios.size()) out += csv_double(ratios[i - 1]);
        out += '\n';
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace exactrep

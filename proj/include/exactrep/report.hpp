#pragma once

#include "exactrep/simulator.hpp"

#include <string>
#include <vector>

namespace exactrep {

/// One line of report.csv. Deterministic fields only: identical configs and
/// seeds must produce byte-identical files at any worker count, so wall time
/// stays out of the CSVs and goes to the text summary instead.
struct ReportRow {
    std::string experiment;
    int grid_n = 0;
    std::int64_t paths = 0;
    double mean_gap_sq = 0.0;
    double se_gap_sq = 0.0;
    double mean_cost = 0.0;
    double se_cost = 0.0;
    double closed_form_cost = 0.0;

    static ReportRow from(const std::string& id, const McReport& rep);
};

/// Shortest round-trippable decimal form (17 significant digits).
std::string csv_double(double x);

std::string report_csv_text(const std::vector<ReportRow>& rows);

/// report.csv rows plus the MSE-halving ratio column (empty for the first row).
std::string converge_csv_text(const std::vector<ReportRow>& rows, const std::vector<double>& ratios);

void write_text_file(const std::string& path, const std::string& content);

} // namespace exactrep

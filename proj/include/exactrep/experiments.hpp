#pragma once

#include "exactrep/config.hpp"
#include "exactrep/report.hpp"
#include "exactrep/simulator.hpp"

#include <string>
#include <vector>

namespace exactrep {

struct RunOutcome {
    McReport report;
    double wall_seconds = 0.0;
    std::vector<std::string> failures; // violated thresholds, empty on success
    std::string report_csv_path;       // empty when files were not requested
    std::string summary_path;
};

/// Builds the law, runs the Monte Carlo, writes report.csv + summary.txt and
/// evaluates the config's thresholds.
RunOutcome run_experiment(const ExperimentConfig& config, bool write_files = true);

struct ConvergeOutcome {
    std::vector<ReportRow> rows;
    std::vector<double> ratios; // mean_gap_sq(N_{i+1}) / mean_gap_sq(N_i)
    std::vector<std::string> failures;
    std::string csv_path;
    std::string summary_path;
};

/// One Monte Carlo row per step count, shared seed family; emits the
/// MSE-halving ratios and flags any ratio above 0.7.
ConvergeOutcome run_converge(const ExperimentConfig& config, const std::vector<int>& n_list,
                             bool write_files = true);

struct PdeErrorRow {
    int space_nodes = 0;
    int time_steps = 0;
    double h_max = 0.0; // max-norm over the central half of the domain, all slices
    double h_l2 = 0.0;
    double hx_max = 0.0;
    double hx_l2 = 0.0;
    double terminal_max = 0.0; // full-grid terminal-slice error (should be exactly 0)
};

struct PdeCheckOutcome {
    std::vector<PdeErrorRow> rows;
    double h00 = 0.0;     // H(y0, 0) at the finest resolution
    double mc_mean = 0.0; // Monte Carlo E F(y(T))
    double mc_se = 0.0;
    std::int64_t mc_paths = 0;
    std::vector<std::string> failures;
    std::string csv_path;
    std::string summary_path;
};

/// Error ladder of the finite-difference H against the closed-form solution
/// (square/cosine payoffs only) plus the probabilistic consistency check
/// H(y0,0) vs a Monte Carlo estimate of E F(y(T)).
PdeCheckOutcome run_pde_check(const ExperimentConfig& config, bool write_files = true);

struct CostBreakdownRow {
    std::string id;
    double mean_term = 0.0;
    double kernel_term = 0.0;
    double total = 0.0;
};

std::vector<CostBreakdownRow> run_cost_table(const std::vector<ExperimentConfig>& configs);
std::string cost_table_csv_text(const std::vector<CostBreakdownRow>& rows);

} // namespace exactrep

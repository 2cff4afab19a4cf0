#pragma once

#include "exactrep/claims.hpp"
#include "exactrep/controller.hpp"
#include "exactrep/linalg.hpp"
#include "exactrep/weight.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace exactrep {

struct SimConfig {
    std::int64_t paths = 20000;
    int grid_n = 4096;
    double gamma = 2.0;
    std::uint64_t seed = 20260808;
    int workers = 0; // 0 = hardware concurrency

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct GramianConfig {
    int nodes = 1024;

    friend bool operator==(const GramianConfig&, const GramianConfig&) = default;
};

/// Acceptance thresholds checked by `run`; exit status 0 iff none is violated.
struct Thresholds {
    std::optional<double> max_mean_gap_sq;
    std::optional<double> cost_se_multiple; // |mean_cost - closed_form| <= multiple * SE
    std::optional<double> cost_rel_tol;     // |mean_cost - closed_form| <= tol * closed_form

    friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<std::string> formats = {"csv", "txt"};

    friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ClaimConfig {
    ClaimVariant variant = ClaimVariant::linear_terminal;

    // linear-terminal: f = coeff w(T) + offset
    Mat coeff;
    Vec offset;

    // markov-terminal-1d: f = F(y(T))
    PayoffKind payoff_kind = PayoffKind::square;
    std::vector<double> payoff_x, payoff_f; // tabulated payoffs, stored inline
    DriftKind drift_kind = DriftKind::none;
    double kappa = 0.0;
    double sigma = 1.0;
    double y0 = 0.0;
    double delta = 0.25;
    HMode h_mode = HMode::analytic;
    Measure measure = Measure::physical;
    int space_nodes = 401;
    int time_steps = 400;
    double pde_gamma = 2.0;
    double width_stddevs = 6.0;

    friend bool operator==(const ClaimConfig&, const ClaimConfig&) = default;
};

struct ExperimentConfig {
    std::string id = "experiment";

    Mat A;
    Mat b;
    Vec a;
    double T = 1.0;

    WeightForm weight_form = WeightForm::pure_power;
    double alpha = 0.75;
    double tau = 0.0; // plateau only
    double c = 1.0;

    Mat gmatrix;

    ClaimConfig claim;
    GramianConfig gramian;
    SimConfig sim;
    Thresholds thresholds;
    OutputConfig outputs;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses and validates a JSON config document. Every violation is collected
/// and reported together in the thrown config_error.
ExperimentConfig parse_config(const std::string& json_text);

/// Canonical JSON emission; parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& config);

/// Instantiates the full law (weight, G, gramian table, claim) from a
/// validated config.
std::shared_ptr<const ControlLaw> build_law(const ExperimentConfig& config);

} // namespace exactrep

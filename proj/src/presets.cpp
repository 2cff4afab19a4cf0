#include "exactrep/presets.hpp"

#include <stdexcept>

namespace exactrep {

namespace {

ExperimentConfig scalar_base() {
    ExperimentConfig cfg;
    cfg.A = Mat{{0.0}};
    cfg.b = Mat{{1.0}};
    cfg.a = Vec{0.0};
    cfg.T = 1.0;
    cfg.weight_form = WeightForm::pure_power;
    cfg.alpha = 0.75;
    cfg.c = 1.0;
    cfg.gmatrix = Mat{{1.0}};
    cfg.sim.paths = 20000;
    cfg.sim.grid_n = 4096;
    cfg.sim.gamma = 2.0;
    cfg.sim.seed = 20260808;
    cfg.sim.workers = 0;
    cfg.gramian.nodes = 1024;
    return cfg;
}

ExperimentConfig scalar_w() {
    ExperimentConfig cfg = scalar_base();
    cfg.id = "scalar-w";
    cfg.claim.variant = ClaimVariant::linear_terminal;
    cfg.claim.coeff = Mat{{1.0}};
    cfg.claim.offset = Vec{0.0};
    cfg.thresholds.max_mean_gap_sq = 1e-3;
    cfg.thresholds.cost_se_multiple = 3.0;
    cfg.thresholds.cost_rel_tol = 0.02;
    return cfg;
}

ExperimentConfig scalar_w2() {
    ExperimentConfig cfg = scalar_base();
    cfg.id = "scalar-w2";
    cfg.claim.variant = ClaimVariant::markov_terminal_1d;
    cfg.claim.payoff_kind = PayoffKind::square;
    cfg.claim.h_mode = HMode::analytic;
    cfg.claim.measure = Measure::physical;
    cfg.thresholds.max_mean_gap_sq = 1e-3;
    cfg.thresholds.cost_se_multiple = 3.0;
    return cfg;
}

ExperimentConfig nilpotent_2d() {
    ExperimentConfig cfg;
    cfg.id = "nilpotent-2d";
    cfg.A = Mat{{0.0, 1.0}, {0.0, 0.0}};
    cfg.b = Mat{{1.0, 0.0}, {0.0, 1.0}};
    cfg.a = Vec{1.0, 0.5};
    cfg.T = 1.0;
    cfg.weight_form = WeightForm::pure_power;
    cfg.alpha = 0.75;
    cfg.c = 1.0;
    cfg.gmatrix = Mat{{1.0, 0.0}, {0.0, 1.0}};
    cfg.claim.variant = ClaimVariant::linear_terminal;
    cfg.claim.coeff = Mat{{1.0, 0.0}, {0.0, 1.0}};
    cfg.claim.offset = Vec{0.0, 0.0};
    cfg.sim.paths = 10000;
    cfg.sim.grid_n = 2048;
    cfg.sim.gamma = 2.0;
    cfg.sim.seed = 20260808;
    cfg.gramian.nodes = 1024;
    cfg.thresholds.max_mean_gap_sq = 1e-3;
    cfg.thresholds.cost_se_multiple = 4.0;
    return cfg;
}

ExperimentConfig markov_square() {
    ExperimentConfig cfg = scalar_w2();
    cfg.id = "markov-square";
    cfg.claim.h_mode = HMode::finite_difference;
    cfg.claim.space_nodes = 401;
    cfg.claim.time_steps = 400;
    cfg.thresholds.cost_se_multiple = 4.0;
    return cfg;
}

ExperimentConfig markov_cos() {
    ExperimentConfig cfg = markov_square();
    cfg.id = "markov-cos";
    cfg.claim.payoff_kind = PayoffKind::cosine;
    return cfg;
}

ExperimentConfig girsanov_linear() {
    ExperimentConfig cfg = scalar_base();
    cfg.id = "girsanov-linear";
    cfg.claim.variant = ClaimVariant::markov_terminal_1d;
    cfg.claim.payoff_kind = PayoffKind::identity;
    cfg.claim.drift_kind = DriftKind::linear;
    cfg.claim.kappa = 0.5;
    cfg.claim.h_mode = HMode::finite_difference;
    cfg.claim.measure = Measure::girsanov_q;
    cfg.claim.space_nodes = 401;
    cfg.claim.time_steps = 400;
    cfg.thresholds.max_mean_gap_sq = 1e-3;
    return cfg;
}

} // namespace

std::vector<std::string> preset_names() {
    return {"scalar-w", "scalar-w2", "nilpotent-2d", "markov-square", "markov-cos", "girsanov-linear"};
}

ExperimentConfig preset(const std::string& name) {
    if (name == "scalar-w") return scalar_w();
    if (name == "scalar-w2") return scalar_w2();
    if (name == "nilpotent-2d") return nilpotent_2d();
    if (name == "markov-square") return markov_square();
    if (name == "markov-cos") return markov_cos();
    if (name == "girsanov-linear") return girsanov_linear();
    throw std::invalid_argument("unknown preset: " + name + " (try `presets` for the list)");
}

} // namespace exactrep

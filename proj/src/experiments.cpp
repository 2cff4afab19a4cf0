#include "exactrep/experiments.hpp"

#include "exactrep/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

namespace exactrep {

namespace {

namespace fs = std::filesystem;

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string fmt(double x, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, x);
    return buf;
}

bool wants(const OutputConfig& out, const std::string& format) {
    return std::find(out.formats.begin(), out.formats.end(), format) != out.formats.end();
}

std::vector<std::string> evaluate_thresholds(const Thresholds& th, const McReport& rep) {
    std::vector<std::string> failures;
    if (th.max_mean_gap_sq && !(rep.mean_gap_sq <= *th.max_mean_gap_sq))
        failures.push_back("mean_gap_sq " + fmt(rep.mean_gap_sq) + " exceeds " + fmt(*th.max_mean_gap_sq));
    const double diff = std::fabs(rep.mean_cost - rep.closed_form_cost);
    if (th.cost_se_multiple) {
        const double allowed = *th.cost_se_multiple * rep.se_cost + 1e-15 * (1.0 + std::fabs(rep.closed_form_cost));
        if (!(diff <= allowed))
            failures.push_back("|mean_cost - closed_form| " + fmt(diff) + " exceeds " +
                               fmt(*th.cost_se_multiple) + " standard errors (" + fmt(allowed) + ")");
    }
    if (th.cost_rel_tol) {
        const double allowed = *th.cost_rel_tol * std::max(std::fabs(rep.closed_form_cost), 1e-12);
        if (!(diff <= allowed))
            failures.push_back("|mean_cost - closed_form| " + fmt(diff) + " exceeds relative tolerance " +
                               fmt(*th.cost_rel_tol));
    }
    return failures;
}

std::string summary_text(const ExperimentConfig& cfg, const McReport& rep, double wall_seconds,
                         const std::vector<std::string>& failures) {
    std::ostringstream out;
    out << "experiment: " << cfg.id << "\n";
    out << "grid_n=" << rep.grid_n << " gamma=" << fmt(rep.gamma) << " paths=" << rep.n_paths
        << " seed=" << rep.seed << " workers=" << rep.worker_count << "\n";
    out << "mean |x(T)-f|^2 = " << fmt(rep.mean_gap_sq) << " (se " << fmt(rep.se_gap_sq) << ")\n";
    out << "mean cost       = " << fmt(rep.mean_cost) << " (se " << fmt(rep.se_cost) << ")\n";
    out << "closed-form cost = " << fmt(rep.closed_form_cost);
    if (rep.measure == Measure::girsanov_q)
        out << "  [girsanov-q optimum; the sampled cost above is a physical-measure statistic]";
    out << "\n";
    out << "admissibility: E(int |u| dt)^2 = " << fmt(rep.mean_l1_sq) << " (se " << fmt(rep.se_l1_sq)
        << "), E int g|u|^2 dt = " << fmt(rep.mean_weighted_u2) << " (se " << fmt(rep.se_weighted_u2)
        << ")\n";
    out << "aborted paths: " << rep.aborted << " of " << rep.n_paths << "\n";
    out << "wall time: " << fmt(wall_seconds, "%.3f") << " s\n";
    if (failures.empty()) {
        out << "thresholds: PASS\n";
    } else {
        out << "thresholds: FAIL\n";
        for (const auto& f : failures) out << "  - " << f << "\n";
    }
    return out.str();
}

} // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg, bool write_files) {
    const double t0 = now_seconds();
    const auto law = build_law(cfg);
    const TimeGrid grid = TimeGrid::build(cfg.T, cfg.sim.grid_n, cfg.sim.gamma);
    RunOutcome outcome;
    outcome.report = monte_carlo(*law, grid, cfg.sim.paths, cfg.sim.seed, cfg.sim.workers);
    outcome.wall_seconds = now_seconds() - t0;
    outcome.failures = evaluate_thresholds(cfg.thresholds, outcome.report);

    if (write_files) {
        fs::create_directories(cfg.outputs.directory);
        if (wants(cfg.outputs, "csv")) {
            outcome.report_csv_path = (fs::path(cfg.outputs.directory) / "report.csv").string();
            write_text_file(outcome.report_csv_path,
                            report_csv_text({ReportRow::from(cfg.id, outcome.report)}));
        }
        if (wants(cfg.outputs, "txt")) {
            outcome.summary_path = (fs::path(cfg.outputs.directory) / "summary.txt").string();
            write_text_file(outcome.summary_path,
                            summary_text(cfg, outcome.report, outcome.wall_seconds, outcome.failures));
        }
    }
    return outcome;
}

ConvergeOutcome run_converge(const ExperimentConfig& cfg, const std::vector<int>& n_list,
                             bool write_files) {
    if (n_list.empty()) throw std::invalid_argument("converge needs at least one step count");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1]) throw std::invalid_argument("converge step counts must increase");

    const auto law = build_law(cfg);
    ConvergeOutcome outcome;
    for (int n : n_list) {
        const TimeGrid grid = TimeGrid::build(cfg.T, n, cfg.sim.gamma);
        const McReport rep = monte_carlo(*law, grid, cfg.sim.paths, cfg.sim.seed, cfg.sim.workers);
        outcome.rows.push_back(ReportRow::from(cfg.id, rep));
    }
    for (std::size_t i = 1; i < outcome.rows.size(); ++i) {
        const double prev = outcome.rows[i - 1].mean_gap_sq;
        const double ratio = prev > 0.0 ? outcome.rows[i].mean_gap_sq / prev : 0.0;
        outcome.ratios.push_back(ratio);
        if (!(ratio <= 0.7))
            outcome.failures.push_back("gap_sq ratio at N=" + std::to_string(outcome.rows[i].grid_n) +
                                       " is " + fmt(ratio) + " > 0.7");
    }

    if (write_files) {
        fs::create_directories(cfg.outputs.directory);
        if (wants(cfg.outputs, "csv")) {
            outcome.csv_path = (fs::path(cfg.outputs.directory) / "converge.csv").string();
            write_text_file(outcome.csv_path, converge_csv_text(outcome.rows, outcome.ratios));
        }
        if (wants(cfg.outputs, "txt")) {
            std::ostringstream txt;
            txt << "experiment: " << cfg.id << " (convergence study)\n";
            for (std::size_t i = 0; i < outcome.rows.size(); ++i) {
                txt << "N=" << outcome.rows[i].grid_n << "  mean_gap_sq=" << fmt(outcome.rows[i].mean_gap_sq);
                if (i > 0) txt << "  ratio=" << fmt(outcome.ratios[i - 1]);
                txt << "\n";
            }
            txt << (outcome.failures.empty() ? "halving ratios: PASS (all <= 0.7)\n" : "halving ratios: FAIL\n");
            for (const auto& f : outcome.failures) txt << "  - " << f << "\n";
            outcome.summary_path = (fs::path(cfg.outputs.directory) / "converge_summary.txt").string();
            write_text_file(outcome.summary_path, txt.str());
        }
    }
    return outcome;
}

namespace {

struct PdeReference {
    HSolution fd;
    HSolution exact;
};

PdeErrorRow pde_errors(const ExperimentConfig& cfg, int space_nodes, int time_steps) {
    PayoffSpec payoff = cfg.claim.payoff_kind == PayoffKind::square ? PayoffSpec::square()
                                                                    : PayoffSpec::cosine();
    DiffusionSpec diff;
    diff.drift_kind = cfg.claim.drift_kind;
    diff.kappa = cfg.claim.kappa;
    diff.sigma = cfg.claim.sigma;
    diff.y0 = cfg.claim.y0;
    diff.delta = cfg.claim.delta;

    HSolverSpec fd_spec;
    fd_spec.mode = HMode::finite_difference;
    fd_spec.measure = cfg.claim.measure;
    fd_spec.space_nodes = space_nodes;
    fd_spec.time_steps = time_steps;
    fd_spec.gamma = cfg.claim.pde_gamma;
    fd_spec.width_stddevs = cfg.claim.width_stddevs;
    const HSolution fd = solve_h(payoff, diff, fd_spec, cfg.T);

    HSolverSpec an_spec = fd_spec;
    an_spec.mode = HMode::analytic;
    const HSolution exact = solve_h(payoff, diff, an_spec, cfg.T);

    // Error metrics over the central half of the truncated domain: the frozen
    // Dirichlet values H = F are exact at t = T only, so the outer band near
    // the boundary carries O(1) truncation error that decays inward under the
    // heat kernel and is below 1e-3 from the half-width on.
    const auto& xs = fd.x_grid();
    const auto& ts = fd.t_grid();
    const double half_width = 0.5 * (xs.back() - xs.front());
    const double core = 0.5 * half_width;
    PdeErrorRow row;
    row.space_nodes = space_nodes;
    row.time_steps = time_steps;
    double h_sq = 0.0, hx_sq = 0.0;
    std::int64_t count = 0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double x = xs[i];
            const double t = ts[k];
            if (std::fabs(x - diff.y0) > core) continue;
            const double he = std::fabs(fd.node_value(static_cast<int>(k), static_cast<int>(i)) -
                                        exact.value(x, t));
            const double ge = std::fabs(fd.node_dx(static_cast<int>(k), static_cast<int>(i)) -
                                        exact.dx(x, t));
            row.h_max = std::max(row.h_max, he);
            row.hx_max = std::max(row.hx_max, ge);
            h_sq += he * he;
            hx_sq += ge * ge;
            ++count;
        }
    }
    row.h_l2 = std::sqrt(h_sq / static_cast<double>(count));
    row.hx_l2 = std::sqrt(hx_sq / static_cast<double>(count));
    const int last = static_cast<int>(ts.size()) - 1;
    for (std::size_t i = 0; i < xs.size(); ++i)
        row.terminal_max = std::max(row.terminal_max,
                                    std::fabs(fd.node_value(last, static_cast<int>(i)) - payoff(xs[i])));
    return row;
}

} // namespace

PdeCheckOutcome run_pde_check(const ExperimentConfig& cfg, bool write_files) {
    if (cfg.claim.variant != ClaimVariant::markov_terminal_1d)
        throw std::invalid_argument("pde-check needs a markov claim");
    if (cfg.claim.payoff_kind != PayoffKind::square && cfg.claim.payoff_kind != PayoffKind::cosine)
        throw std::invalid_argument(
            "no analytic reference for this payoff; use the probabilistic consistency check instead");

    PdeCheckOutcome outcome;
    const std::vector<std::pair<int, int>> ladder = {{51, 50}, {101, 100}, {201, 200}, {401, 400}};
    for (const auto& [sn, ts] : ladder) outcome.rows.push_back(pde_errors(cfg, sn, ts));

    // probabilistic consistency: H(y0, 0) vs Monte Carlo E F(y(T))
    DiffusionSpec diff;
    diff.drift_kind = cfg.claim.drift_kind;
    diff.kappa = cfg.claim.kappa;
    diff.sigma = cfg.claim.sigma;
    diff.y0 = cfg.claim.y0;
    diff.delta = cfg.claim.delta;
    PayoffSpec payoff = cfg.claim.payoff_kind == PayoffKind::square ? PayoffSpec::square()
                                                                    : PayoffSpec::cosine();
    HSolverSpec fine;
    fine.mode = HMode::finite_difference;
    fine.measure = cfg.claim.measure;
    fine.space_nodes = 401;
    fine.time_steps = 400;
    fine.gamma = cfg.claim.pde_gamma;
    fine.width_stddevs = cfg.claim.width_stddevs;
    const HSolution h = solve_h(payoff, diff, fine, cfg.T);
    outcome.h00 = h.value(diff.y0, 0.0);

    outcome.mc_paths = 100000;
    const int steps = 512;
    double sum = 0.0, sum_sq = 0.0;
    for (std::int64_t p = 0; p < outcome.mc_paths; ++p) {
        RngStream rng(0x70646563686bULL, static_cast<std::uint64_t>(p));
        double y = diff.y0;
        const double dt = cfg.T / steps;
        const double sqrt_dt = std::sqrt(dt);
        for (int k = 0; k < steps; ++k) {
            const double t = cfg.T * static_cast<double>(k) / steps;
            y += diff.drift(y, t) * dt + diff.vol(y, t) * sqrt_dt * rng.normal();
        }
        const double f = payoff(y);
        sum += f;
        sum_sq += f * f;
    }
    const double n = static_cast<double>(outcome.mc_paths);
    outcome.mc_mean = sum / n;
    outcome.mc_se = std::sqrt((sum_sq - n * outcome.mc_mean * outcome.mc_mean) / (n - 1.0) / n);

    const PdeErrorRow& finest = outcome.rows.back();
    if (!(finest.h_max <= 1e-3))
        outcome.failures.push_back("H max-norm error " + fmt(finest.h_max) + " exceeds 1e-3");
    if (!(std::fabs(outcome.h00 - outcome.mc_mean) <= 3.0 * outcome.mc_se))
        outcome.failures.push_back("H(y0,0) = " + fmt(outcome.h00) + " is more than 3 SE from the MC estimate " +
                                   fmt(outcome.mc_mean) + " (se " + fmt(outcome.mc_se) + ")");
    if (!(finest.terminal_max == 0.0))
        outcome.failures.push_back("terminal slice deviates from F on grid nodes by " + fmt(finest.terminal_max));

    if (write_files) {
        fs::create_directories(cfg.outputs.directory);
        if (wants(cfg.outputs, "csv")) {
            std::string csv = "space_nodes,time_steps,h_max,h_l2,dhdx_max,dhdx_l2,terminal_max\n";
            for (const auto& r : outcome.rows) {
                csv += std::to_string(r.space_nodes) + ',' + std::to_string(r.time_steps) + ',' +
                       csv_double(r.h_max) + ',' + csv_double(r.h_l2) + ',' + csv_double(r.hx_max) + ',' +
                       csv_double(r.hx_l2) + ',' + csv_double(r.terminal_max) + '\n';
            }
            outcome.csv_path = (fs::path(cfg.outputs.directory) / "pde_check.csv").string();
            write_text_file(outcome.csv_path, csv);
        }
        if (wants(cfg.outputs, "txt")) {
            std::ostringstream txt;
            txt << "experiment: " << cfg.id << " (PDE check, errors over the central half-domain)\n";
            for (const auto& r : outcome.rows)
                txt << r.space_nodes << "x" << r.time_steps << "  |H err|_max=" << fmt(r.h_max)
                    << "  |dH/dx err|_max=" << fmt(r.hx_max) << "  terminal=" << fmt(r.terminal_max) << "\n";
            txt << "H(y0,0) = " << fmt(outcome.h00) << " vs MC " << fmt(outcome.mc_mean) << " (se "
                << fmt(outcome.mc_se) << ", " << outcome.mc_paths << " paths)\n";
            txt << (outcome.failures.empty() ? "pde-check: PASS\n" : "pde-check: FAIL\n");
            for (const auto& f : outcome.failures) txt << "  - " << f << "\n";
            outcome.summary_path = (fs::path(cfg.outputs.directory) / "pde_summary.txt").string();
            write_text_file(outcome.summary_path, txt.str());
        }
    }
    return outcome;
}

std::vector<CostBreakdownRow> run_cost_table(const std::vector<ExperimentConfig>& configs) {
    std::vector<CostBreakdownRow> rows;
    rows.reserve(configs.size());
    for (const auto& cfg : configs) {
        const auto law = build_law(cfg);
        const auto parts = law->closed_form_cost_parts();
        rows.push_back({cfg.id, parts.mean_term, parts.kernel_term, parts.total()});
    }
    return rows;
}

std::string cost_table_csv_text(const std::vector<CostBreakdownRow>& rows) {
    std::string csv = "experiment,mean_term,kernel_term,closed_form_cost\n";
    for (const auto& r : rows)
        csv += r.id + ',' + csv_double(r.mean_term) + ',' + csv_double(r.kernel_term) + ',' +
               csv_double(r.total) + '\n';
    return csv;
}

} // namespace exactrep

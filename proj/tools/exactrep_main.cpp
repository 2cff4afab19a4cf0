// exactrep: replicate a Brownian-functional target exactly at time T with an
// ordinary integral of an adapted control, minimal in a degenerating
// quadratic norm. Verbs: run, converge, pde-check, cost-table, presets.

#include "exactrep/config.hpp"
#include "exactrep/errors.hpp"
#include "exactrep/experiments.hpp"
#include "exactrep/presets.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

struct CommonOpts {
    std::string config_path;
    std::string preset_name;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> paths;
    std::optional<int> grid_n;
    std::optional<double> gamma;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    auto* config = cmd->add_option("--config", opts.config_path, "JSON config file");
    auto* preset = cmd->add_option("--preset", opts.preset_name, "built-in preset name");
    config->excludes(preset);
    cmd->add_option_function<std::uint64_t>("--seed", [&opts](std::uint64_t v) { opts.seed = v; },
                                            "RNG seed");
    cmd->add_option_function<std::int64_t>("--paths", [&opts](std::int64_t v) { opts.paths = v; },
                                           "Monte Carlo path count");
    cmd->add_option_function<int>("--grid-n", [&opts](int v) { opts.grid_n = v; }, "time steps");
    cmd->add_option_function<double>("--gamma", [&opts](double v) { opts.gamma = v; },
                                     "grid clustering exponent (>= 1)");
    cmd->add_option_function<int>("--workers", [&opts](int v) { opts.workers = v; },
                                  "worker threads (0 = hardware)");
    cmd->add_option_function<std::string>("--out", [&opts](const std::string& v) { opts.out_dir = v; },
                                          "output directory");
}

exactrep::ExperimentConfig load_config(const CommonOpts& opts) {
    exactrep::ExperimentConfig cfg;
    if (!opts.preset_name.empty()) {
        cfg = exactrep::preset(opts.preset_name);
    } else if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) throw std::runtime_error("cannot open config: " + opts.config_path);
        std::ostringstream text;
        text << in.rdbuf();
        cfg = exactrep::parse_config(text.str());
    } else {
        throw std::runtime_error("give either --preset NAME or --config PATH");
    }
    if (opts.seed) cfg.sim.seed = *opts.seed;
    if (opts.paths) cfg.sim.paths = *opts.paths;
    if (opts.grid_n) cfg.sim.grid_n = *opts.grid_n;
    if (opts.gamma) cfg.sim.gamma = *opts.gamma;
    if (opts.workers) cfg.sim.workers = *opts.workers;
    if (opts.out_dir) cfg.outputs.directory = *opts.out_dir;
    return cfg;
}

int report_failures(const std::vector<std::string>& failures) {
    if (failures.empty()) return 0;
    std::cerr << "threshold failures:\n";
    for (const auto& f : failures) std::cerr << "  - " << f << "\n";
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact terminal replication with a singular-weight quadratic cost"};
    app.require_subcommand(1);

    CommonOpts run_opts, conv_opts, pde_opts, cost_opts;
    std::vector<int> n_list = {512, 1024, 2048, 4096};
    bool cost_all_presets = false;

    auto* run_cmd = app.add_subcommand("run", "Monte Carlo replication run with report emission");
    add_common(run_cmd, run_opts);

    auto* conv_cmd = app.add_subcommand("converge", "mean-square gap convergence study over step counts");
    add_common(conv_cmd, conv_opts);
    conv_cmd->add_option("--n-list", n_list, "increasing step counts")->delimiter(',');

    auto* pde_cmd = app.add_subcommand("pde-check", "finite-difference H errors vs the closed forms");
    add_common(pde_cmd, pde_opts);

    auto* cost_cmd = app.add_subcommand("cost-table", "closed-form cost decomposition");
    add_common(cost_cmd, cost_opts);
    cost_cmd->add_flag("--all-presets", cost_all_presets, "tabulate every built-in preset");

    auto* presets_cmd = app.add_subcommand("presets", "list built-in presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (presets_cmd->parsed()) {
            for (const auto& name : exactrep::preset_names()) std::cout << name << "\n";
            return 0;
        }
        if (run_cmd->parsed()) {
            const auto cfg = load_config(run_opts);
            const auto outcome = exactrep::run_experiment(cfg);
            std::cout << "experiment " << cfg.id << ": mean_gap_sq=" << outcome.report.mean_gap_sq
                      << " mean_cost=" << outcome.report.mean_cost
                      << " closed_form=" << outcome.report.closed_form_cost << "\n";
            if (!outcome.report_csv_path.empty()) std::cout << "wrote " << outcome.report_csv_path << "\n";
            if (!outcome.summary_path.empty()) std::cout << "wrote " << outcome.summary_path << "\n";
            return report_failures(outcome.failures);
        }
        if (conv_cmd->parsed()) {
            const auto cfg = load_config(conv_opts);
            const auto outcome = exactrep::run_converge(cfg, n_list);
            for (std::size_t i = 0; i < outcome.rows.size(); ++i) {
                std::cout << "N=" << outcome.rows[i].grid_n
                          << " mean_gap_sq=" << outcome.rows[i].mean_gap_sq;
                if (i > 0) std::cout << " ratio=" << outcome.ratios[i - 1];
                std::cout << "\n";
            }
            if (!outcome.csv_path.empty()) std::cout << "wrote " << outcome.csv_path << "\n";
            return report_failures(outcome.failures);
        }
        if (pde_cmd->parsed()) {
            const auto cfg = load_config(pde_opts);
            const auto outcome = exactrep::run_pde_check(cfg);
            for (const auto& r : outcome.rows)
                std::cout << r.space_nodes << "x" << r.time_steps << " |H err|_max=" << r.h_max
                          << " |dH/dx err|_max=" << r.hx_max << "\n";
            std::cout << "H(y0,0)=" << outcome.h00 << " vs MC " << outcome.mc_mean << " (se "
                      << outcome.mc_se << ")\n";
            if (!outcome.csv_path.empty()) std::cout << "wrote " << outcome.csv_path << "\n";
            return report_failures(outcome.failures);
        }
        if (cost_cmd->parsed()) {
            std::vector<exactrep::ExperimentConfig> configs;
            if (cost_all_presets) {
                for (const auto& name : exactrep::preset_names()) configs.push_back(exactrep::preset(name));
            } else {
                configs.push_back(load_config(cost_opts));
            }
            const auto rows = exactrep::run_cost_table(configs);
            std::cout << exactrep::cost_table_csv_text(rows);
            if (!configs.empty()) {
                namespace fs = std::filesystem;
                fs::create_directories(configs.front().outputs.directory);
                const auto path = (fs::path(configs.front().outputs.directory) / "cost_table.csv").string();
                exactrep::write_text_file(path, exactrep::cost_table_csv_text(rows));
                std::cout << "wrote " << path << "\n";
            }
            return 0;
        }
    } catch (const exactrep::config_error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

#include "exactrep/config.hpp"

#include "exactrep/errors.hpp"
#include "exactrep/gramian.hpp"
#include "exactrep/system.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace exactrep {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

Mat mat_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) throw std::runtime_error("expected a matrix (array of rows)");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j[static_cast<std::size_t>(i)].size()) != cols)
            throw std::runtime_error("ragged matrix rows");
        for (int k = 0; k < cols; ++k) m(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
    }
    return m;
}

json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Vec vec_from_json(const json& j) {
    if (!j.is_array()) throw std::runtime_error("expected a vector (array)");
    Vec v(static_cast<int>(j.size()));
    for (int i = 0; i < v.size(); ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

json vec_to_json(const Vec& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

std::string payoff_kind_name(PayoffKind k) {
    switch (k) {
        case PayoffKind::square: return "square";
        case PayoffKind::cosine: return "cosine";
        case PayoffKind::identity: return "identity";
        case PayoffKind::tabulated: return "tabulated";
    }
    return "?";
}

PayoffKind payoff_kind_from(const std::string& s) {
    if (s == "square") return PayoffKind::square;
    if (s == "cosine") return PayoffKind::cosine;
    if (s == "identity") return PayoffKind::identity;
    if (s == "tabulated") return PayoffKind::tabulated;
    throw std::runtime_error("unknown payoff kind: " + s);
}

} // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    std::vector<std::string> bad;
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw config_error({std::string("JSON parse failure: ") + e.what()});
    }

    ExperimentConfig cfg;
    auto grab = [&](const char* what, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            bad.push_back(std::string(what) + ": " + e.what());
        }
    };

    grab("id", [&] { cfg.id = j.value("id", std::string("experiment")); });
    grab("system", [&] {
        const auto& s = j.at("system");
        cfg.A = mat_from_json(s.at("A"));
        cfg.b = mat_from_json(s.at("b"));
        cfg.a = vec_from_json(s.at("a"));
        cfg.T = s.at("T").get<double>();
    });
    grab("weight", [&] {
        const auto& w = j.at("weight");
        const std::string form = w.at("form").get<std::string>();
        if (form == "pure-power")
            cfg.weight_form = WeightForm::pure_power;
        else if (form == "plateau")
            cfg.weight_form = WeightForm::plateau;
        else
            throw std::runtime_error("unknown weight form: " + form);
        cfg.alpha = w.at("alpha").get<double>();
        cfg.c = w.at("c").get<double>();
        cfg.tau = w.value("tau", 0.0);
    });
    grab("gmatrix", [&] { cfg.gmatrix = mat_from_json(j.at("gmatrix")); });
    grab("claim", [&] {
        const auto& c = j.at("claim");
        const std::string variant = c.at("variant").get<std::string>();
        if (variant == "linear-terminal") {
            cfg.claim.variant = ClaimVariant::linear_terminal;
            cfg.claim.coeff = mat_from_json(c.at("coeff"));
            cfg.claim.offset = vec_from_json(c.at("offset"));
        } else if (variant == "markov-terminal-1d") {
            cfg.claim.variant = ClaimVariant::markov_terminal_1d;
            const auto& p = c.at("payoff");
            cfg.claim.payoff_kind = payoff_kind_from(p.at("kind").get<std::string>());
            if (cfg.claim.payoff_kind == PayoffKind::tabulated) {
                if (p.contains("csv")) {
                    const PayoffSpec spec = PayoffSpec::from_csv(p.at("csv").get<std::string>());
                    cfg.claim.payoff_x = spec.xs;
                    cfg.claim.payoff_f = spec.values;
                } else {
                    cfg.claim.payoff_x = p.at("x").get<std::vector<double>>();
                    cfg.claim.payoff_f = p.at("f").get<std::vector<double>>();
                }
            }
            const auto& d = c.at("diffusion");
            const std::string drift = d.value("drift", std::string("none"));
            if (drift == "none")
                cfg.claim.drift_kind = DriftKind::none;
            else if (drift == "linear")
                cfg.claim.drift_kind = DriftKind::linear;
            else
                throw std::runtime_error("unknown drift kind: " + drift);
            cfg.claim.kappa = d.value("kappa", 0.0);
            cfg.claim.sigma = d.value("sigma", 1.0);
            cfg.claim.y0 = d.value("y0", 0.0);
            cfg.claim.delta = d.value("delta", 0.25);
            const auto& h = c.at("h_solver");
            const std::string mode = h.at("mode").get<std::string>();
            if (mode == "analytic")
                cfg.claim.h_mode = HMode::analytic;
            else if (mode == "finite-difference")
                cfg.claim.h_mode = HMode::finite_difference;
            else
                throw std::runtime_error("unknown H solver mode: " + mode);
            const std::string measure = h.value("measure", std::string("physical"));
            if (measure == "physical")
                cfg.claim.measure = Measure::physical;
            else if (measure == "girsanov-q")
                cfg.claim.measure = Measure::girsanov_q;
            else
                throw std::runtime_error("unknown measure: " + measure);
            cfg.claim.space_nodes = h.value("space_nodes", 401);
            cfg.claim.time_steps = h.value("time_steps", 400);
            cfg.claim.pde_gamma = h.value("gamma", 2.0);
            cfg.claim.width_stddevs = h.value("width_stddevs", 6.0);
        } else {
            throw std::runtime_error("unknown claim variant: " + variant);
        }
    });
    grab("gramian", [&] {
        if (j.contains("gramian")) cfg.gramian.nodes = j.at("gramian").value("nodes", 1024);
    });
    grab("sim", [&] {
        if (!j.contains("sim")) return;
        const auto& s = j.at("sim");
        cfg.sim.paths = s.value("paths", cfg.sim.paths);
        cfg.sim.grid_n = s.value("grid_n", cfg.sim.grid_n);
        cfg.sim.gamma = s.value("gamma", cfg.sim.gamma);
        cfg.sim.seed = s.value("seed", cfg.sim.seed);
        cfg.sim.workers = s.value("workers", cfg.sim.workers);
    });
    grab("thresholds", [&] {
        if (!j.contains("thresholds")) return;
        const auto& t = j.at("thresholds");
        if (t.contains("max_mean_gap_sq")) cfg.thresholds.max_mean_gap_sq = t.at("max_mean_gap_sq").get<double>();
        if (t.contains("cost_se_multiple")) cfg.thresholds.cost_se_multiple = t.at("cost_se_multiple").get<double>();
        if (t.contains("cost_rel_tol")) cfg.thresholds.cost_rel_tol = t.at("cost_rel_tol").get<double>();
    });
    grab("outputs", [&] {
        if (!j.contains("outputs")) return;
        const auto& o = j.at("outputs");
        cfg.outputs.directory = o.value("directory", cfg.outputs.directory);
        if (o.contains("formats")) cfg.outputs.formats = o.at("formats").get<std::vector<std::string>>();
    });

    if (!bad.empty()) throw config_error(std::move(bad));

    // Semantic validation; keep collecting so the user sees every problem.
    const int n = cfg.A.rows();
    if (n < 1 || cfg.A.cols() != n) bad.push_back("system.A must be a nonempty square matrix");
    if (cfg.b.rows() != n || cfg.b.cols() != n) bad.push_back("system.b must match the state dimension");
    if (cfg.a.size() != n) bad.push_back("system.a must match the state dimension");
    if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) bad.push_back("system.T must be positive and finite");
    if (cfg.b.rows() == n && cfg.b.cols() == n) {
        double scale_n = 1.0;
        for (int i = 0; i < n; ++i) scale_n *= 1.0 + cfg.b.max_abs();
        if (std::fabs(lu_determinant(cfg.b)) <= 1e-12 * scale_n)
            bad.push_back("system.b is degenerate; the control must reach every state direction");
    }
    if (!(cfg.alpha > 0.5 && cfg.alpha < 1.0))
        bad.push_back("weight.alpha must lie strictly inside (0.5, 1): the weight has to vanish at T "
                      "slowly enough that the Gramian inverse stays square integrable");
    if (!(cfg.c > 0.0)) bad.push_back("weight.c must be positive");
    if (cfg.weight_form == WeightForm::plateau && !(cfg.tau > 0.0 && cfg.tau < cfg.T))
        bad.push_back("weight.tau must lie in (0, T) for the plateau form");
    if (cfg.gmatrix.rows() != n || cfg.gmatrix.cols() != n) {
        bad.push_back("gmatrix must be n x n");
    } else {
        try {
            (void)spd_inverse(cfg.gmatrix);
        } catch (const std::exception&) {
            bad.push_back("gmatrix must be symmetric positive definite");
        }
    }
    if (cfg.claim.variant == ClaimVariant::linear_terminal) {
        if (cfg.claim.coeff.rows() != n) bad.push_back("claim.coeff must have one row per state dimension");
        if (cfg.claim.offset.size() != cfg.claim.coeff.rows()) bad.push_back("claim.offset dimension mismatch");
    } else {
        if (n != 1) bad.push_back("markov-terminal-1d claims require a one-dimensional system");
        if (!(cfg.claim.sigma > 0.0)) bad.push_back("claim.diffusion.sigma must be positive");
        if (!(cfg.claim.delta > 0.0) || cfg.claim.delta > 0.5 * cfg.claim.sigma * cfg.claim.sigma)
            bad.push_back("claim.diffusion.delta must satisfy 0 < delta <= sigma^2/2");
        if (cfg.claim.payoff_kind == PayoffKind::tabulated && cfg.claim.h_mode == HMode::analytic)
            bad.push_back("tabulated payoffs have no analytic H; use finite-difference mode");
        if ((cfg.claim.payoff_kind == PayoffKind::square || cfg.claim.payoff_kind == PayoffKind::cosine) &&
            cfg.claim.drift_kind != DriftKind::none)
            bad.push_back("square/cosine claims are supported with zero drift only");
        if (cfg.claim.space_nodes < 5 || cfg.claim.space_nodes % 2 == 0)
            bad.push_back("claim.h_solver.space_nodes must be odd and >= 5");
        if (cfg.claim.time_steps < 2) bad.push_back("claim.h_solver.time_steps must be >= 2");
        if (cfg.claim.width_stddevs < 6.0)
            bad.push_back("claim.h_solver.width_stddevs must be >= 6 standard deviations of y(T)");
    }
    if (cfg.sim.paths < 100) bad.push_back("sim.paths must be >= 100");
    if (cfg.sim.grid_n < 2) bad.push_back("sim.grid_n must be >= 2");
    if (!(cfg.sim.gamma >= 1.0)) bad.push_back("sim.gamma must be >= 1 (no coarsening near T)");
    if (cfg.sim.workers < 0) bad.push_back("sim.workers must be >= 0");
    if (cfg.gramian.nodes < 64) bad.push_back("gramian.nodes must be >= 64");

    if (!bad.empty()) throw config_error(std::move(bad));
    return cfg;
}

std::string emit_config(const ExperimentConfig& cfg) {
    ordered_json j;
    j["id"] = cfg.id;
    j["system"] = {{"A", mat_to_json(cfg.A)}, {"b", mat_to_json(cfg.b)}, {"a", vec_to_json(cfg.a)}, {"T", cfg.T}};
    ordered_json w;
    w["form"] = cfg.weight_form == WeightForm::pure_power ? "pure-power" : "plateau";
    w["alpha"] = cfg.alpha;
    w["c"] = cfg.c;
    if (cfg.weight_form == WeightForm::plateau) w["tau"] = cfg.tau;
    j["weight"] = std::move(w);
    j["gmatrix"] = mat_to_json(cfg.gmatrix);

    ordered_json claim;
    if (cfg.claim.variant == ClaimVariant::linear_terminal) {
        claim["variant"] = "linear-terminal";
        claim["coeff"] = mat_to_json(cfg.claim.coeff);
        claim["offset"] = vec_to_json(cfg.claim.offset);
    } else {
        claim["variant"] = "markov-terminal-1d";
        ordered_json payoff;
        payoff["kind"] = payoff_kind_name(cfg.claim.payoff_kind);
        if (cfg.claim.payoff_kind == PayoffKind::tabulated) {
            payoff["x"] = cfg.claim.payoff_x;
            payoff["f"] = cfg.claim.payoff_f;
        }
        claim["payoff"] = std::move(payoff);
        claim["diffusion"] = {{"drift", cfg.claim.drift_kind == DriftKind::none ? "none" : "linear"},
                              {"kappa", cfg.claim.kappa},
                              {"sigma", cfg.claim.sigma},
                              {"y0", cfg.claim.y0},
                              {"delta", cfg.claim.delta}};
        claim["h_solver"] = {{"mode", cfg.claim.h_mode == HMode::analytic ? "analytic" : "finite-difference"},
                             {"measure", cfg.claim.measure == Measure::physical ? "physical" : "girsanov-q"},
                             {"space_nodes", cfg.claim.space_nodes},
                             {"time_steps", cfg.claim.time_steps},
                             {"gamma", cfg.claim.pde_gamma},
                             {"width_stddevs", cfg.claim.width_stddevs}};
    }
    j["claim"] = std::move(claim);
    j["gramian"] = {{"nodes", cfg.gramian.nodes}};
    j["sim"] = {{"paths", cfg.sim.paths},
                {"grid_n", cfg.sim.grid_n},
                {"gamma", cfg.sim.gamma},
                {"seed", cfg.sim.seed},
                {"workers", cfg.sim.workers}};
    ordered_json th;
    if (cfg.thresholds.max_mean_gap_sq) th["max_mean_gap_sq"] = *cfg.thresholds.max_mean_gap_sq;
    if (cfg.thresholds.cost_se_multiple) th["cost_se_multiple"] = *cfg.thresholds.cost_se_multiple;
    if (cfg.thresholds.cost_rel_tol) th["cost_rel_tol"] = *cfg.thresholds.cost_rel_tol;
    if (!th.empty()) j["thresholds"] = std::move(th);
    j["outputs"] = {{"directory", cfg.outputs.directory}, {"formats", cfg.outputs.formats}};
    return j.dump(2) + "\n";
}

std::shared_ptr<const ControlLaw> build_law(const ExperimentConfig& cfg) {
    SystemSpec sys = SystemSpec::make(cfg.A, cfg.b, cfg.a, cfg.T);
    WeightSpec weight = cfg.weight_form == WeightForm::pure_power
                            ? WeightSpec::pure_power(cfg.alpha, cfg.c, cfg.T)
                            : WeightSpec::plateau(cfg.alpha, cfg.tau, cfg.c, cfg.T);
    GMatrix g(cfg.gmatrix);
    auto gramian = std::make_shared<const GramianTable>(GramianTable::build(sys, weight, g, cfg.gramian.nodes));

    std::shared_ptr<const Claim> claim;
    if (cfg.claim.variant == ClaimVariant::linear_terminal) {
        claim = std::make_shared<const Claim>(Claim::linear(cfg.claim.coeff, cfg.claim.offset));
    } else {
        PayoffSpec payoff;
        switch (cfg.claim.payoff_kind) {
            case PayoffKind::square: payoff = PayoffSpec::square(); break;
            case PayoffKind::cosine: payoff = PayoffSpec::cosine(); break;
            case PayoffKind::identity: payoff = PayoffSpec::identity(); break;
            case PayoffKind::tabulated:
                payoff = PayoffSpec::tabulated(cfg.claim.payoff_x, cfg.claim.payoff_f);
                break;
        }
        DiffusionSpec diff;
        diff.drift_kind = cfg.claim.drift_kind;
        diff.kappa = cfg.claim.kappa;
        diff.sigma = cfg.claim.sigma;
        diff.y0 = cfg.claim.y0;
        diff.delta = cfg.claim.delta;
        HSolverSpec solver;
        solver.mode = cfg.claim.h_mode;
        solver.measure = cfg.claim.measure;
        solver.space_nodes = cfg.claim.space_nodes;
        solver.time_steps = cfg.claim.time_steps;
        solver.gamma = cfg.claim.pde_gamma;
        solver.width_stddevs = cfg.claim.width_stddevs;
        claim = std::make_shared<const Claim>(Claim::markov(payoff, diff, solver, cfg.T));
    }
    return std::make_shared<const ControlLaw>(sys, weight, g, gramian, claim);
}

} // namespace exactrep

#pragma once

#include "exactrep/controller.hpp"
#include "exactrep/grid.hpp"
#include "exactrep/linalg.hpp"
#include "exactrep/rng.hpp"

#include <cstdint>
#include <vector>

namespace exactrep {

/// Per-(law, grid) step tables shared read-only across paths.
struct StepCache {
    TimeGrid grid;
    std::vector<Mat> phi;    // e^{A dt_k}, k = 0..N-1
    std::vector<Mat> psi;    // e^{-A (T - t_{k+1})}
    std::vector<Mat> r;      // R(t_k), k = 0..N (R(T) = 0)
    std::vector<Mat> r_inv;  // R(t_k)^{-1}, k = 0..N-1
    std::vector<Mat> r_diff; // R(t_k) - R(t_{k+1})
    std::vector<Mat> u_map;  // G^{-1} b^T e^{A^T (T - t_k)}
    std::vector<double> g_inv; // 1/g(t_k)

    static StepCache build(const ControlLaw& law, const TimeGrid& grid);
};

struct SimResult {
    Vec terminal_gap; // x(T) - f
    double gap_sq = 0.0;
    double cost = 0.0; // \int u' Gamma u dt, exact under mu frozen per step
    Vec f_realized;
    double l1_cost = 0.0;     // \int |u| dt (left-endpoint discretization)
    double weighted_u2 = 0.0; // \int g |u|^2 dt
    bool aborted = false;
};

/// Full per-path trace for the algebraic replication-identity checks.
struct PathBundle {
    std::vector<Vec> dw;          // per step, driver increments
    std::vector<Vec> claim_state; // per node: w(t_k) (linear) or y(t_k) (markov)
    std::vector<Vec> mu;          // per node
    std::vector<Vec> x;           // per node
    SimResult result;
};

struct McReport {
    std::int64_t n_paths = 0;
    int grid_n = 0;
    double gamma = 1.0;
    std::uint64_t seed = 0;
    int worker_count = 1;
    double mean_gap_sq = 0.0, se_gap_sq = 0.0;
    double mean_cost = 0.0, se_cost = 0.0;
    double closed_form_cost = 0.0;
    double mean_l1_sq = 0.0, se_l1_sq = 0.0;             // E (\int |u| dt)^2
    double mean_weighted_u2 = 0.0, se_weighted_u2 = 0.0; // E \int g |u|^2 dt
    std::int64_t aborted = 0;
    Measure measure = Measure::physical;
};

/// One path of the joint (driver, claim state, mu, x, cost) system.
///
/// The plant step is the exact Gramian increment
///     x_{k+1} = e^{A dt_k} x_k + e^{-A(T-t_{k+1})} (R(t_k) - R(t_{k+1})) mu_k,
/// which integrates e^{A(t_{k+1}-s)} b u(s) ds exactly while mu is frozen at
/// the left endpoint. Pointwise Euler on u would diverge near T, where the
/// control grows like (T-t)^{-alpha}; the R-difference absorbs that growth.
/// The running cost uses the same identity: u' Gamma u = mu' Q mu, so the
/// frozen-mu step adds mu_k' (R(t_k) - R(t_{k+1})) mu_k.
SimResult simulate_path(const ControlLaw& law, const StepCache& cache, RngStream& rng);

PathBundle simulate_bundle(const ControlLaw& law, const StepCache& cache, RngStream& rng);

/// Independent paths on per-path counter streams derived from (seed, index).
/// Results are bit-identical for fixed (seed, n_paths, grid) at any worker
/// count. Aborted paths (NaN guard, PDE-domain exit) are counted and
/// excluded; more than 0.1% aborts fails the run.
McReport monte_carlo(const ControlLaw& law, const TimeGrid& grid, std::int64_t n_paths,
                     std::uint64_t seed, int worker_count);

/// Deterministic perturbation direction, constant on each grid step.
struct StepProfile {
    std::vector<Vec> h; // size N
};

/// Two-piece profile: h_head on steps before the first node >= T/2, then the
/// unique constant tail that keeps \int Q(t) h(t) dt = 0 (replication
/// preserved).
StepProfile balanced_two_piece(const ControlLaw& law, const TimeGrid& grid, const Vec& h_head);

struct PerturbationReport {
    double cost_opt_mean = 0.0, cost_opt_se = 0.0;
    double cost_pert_mean = 0.0, cost_pert_se = 0.0;
    double cross_mean = 0.0, cross_se = 0.0; // 2 sum_k h_k' dR_k mu_k, zero in expectation
    double quad_form_exact = 0.0;            // sum_k h_k' dR_k h_k, the deterministic cost increase
    double gap_sq_opt_mean = 0.0, gap_sq_opt_se = 0.0;
    double gap_sq_pert_mean = 0.0, gap_sq_pert_se = 0.0;
};

/// Simulates the optimal control and the competitor driven by mu + h on the
/// same noise. The profile must satisfy the replication-preserving constraint
/// sum_k (R(t_k) - R(t_{k+1})) h_k = 0 to 1e-8 (relative).
PerturbationReport perturbation_test(const ControlLaw& law, const TimeGrid& grid,
                                     const StepProfile& profile, std::int64_t n_paths,
                                     std::uint64_t seed, int worker_count);

} // namespace exactrep

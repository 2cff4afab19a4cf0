#include "exactrep/simulator.hpp"

#include "exactrep/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <thread>

namespace exactrep {

StepCache StepCache::build(const ControlLaw& law, const TimeGrid& grid) {
    if (grid.T != law.system().T) throw std::invalid_argument("grid horizon differs from the system horizon");
    const int n = law.system().dim();
    const int N = grid.n;
    StepCache c;
    c.grid = grid;
    c.phi.reserve(static_cast<std::size_t>(N));
    c.psi.reserve(static_cast<std::size_t>(N));
    c.r.reserve(static_cast<std::size_t>(N) + 1);
    c.r_inv.reserve(static_cast<std::size_t>(N));
    c.r_diff.reserve(static_cast<std::size_t>(N));
    c.u_map.reserve(static_cast<std::size_t>(N));
    c.g_inv.reserve(static_cast<std::size_t>(N));

    const Mat& A = law.system().A;
    const Mat bt = law.system().b.transpose();
    const Mat at = A.transpose();
    const bool a_zero = A.max_abs() == 0.0;
    const Mat ident = Mat::identity(n);

    for (int k = 0; k <= N; ++k) c.r.push_back(law.gramian().value(grid.nodes[static_cast<std::size_t>(k)]));
    for (int k = 0; k < N; ++k) {
        const double tk = grid.nodes[static_cast<std::size_t>(k)];
        const double tk1 = grid.nodes[static_cast<std::size_t>(k) + 1];
        c.phi.push_back(a_zero ? ident : mat_exp(A, tk1 - tk));
        c.psi.push_back(a_zero ? ident : mat_exp(A, -(grid.T - tk1)));
        c.r_inv.push_back(law.gramian().inverse(tk));
        c.r_diff.push_back(c.r[static_cast<std::size_t>(k)] - c.r[static_cast<std::size_t>(k) + 1]);
        c.u_map.push_back(law.gmatrix().g_inv() * (a_zero ? bt : bt * mat_exp(at, grid.T - tk)));
        c.g_inv.push_back(law.weight().inverse_value(tk));
    }
    return c;
}

namespace {

SimResult run_path(const ControlLaw& law, const StepCache& cache, RngStream& rng,
                   const StepProfile* profile, SimResult* perturbed, PathBundle* bundle) {
    const Claim& claim = law.claim();
    const int n = law.system().dim();
    const int d = claim.driver_dim();
    const int N = cache.grid.n;
    const bool markov = claim.variant() == ClaimVariant::markov_terminal_1d;
    const bool girsanov = markov && claim.measure() == Measure::girsanov_q;

    Vec x = law.system().a;
    Vec x_pert = x;
    Vec mu = law.mu_bar();
    Vec w(d);
    double y = markov ? claim.diffusion().y0 : 0.0;

    Vec dw(d), xi(n), tmp(n), tmp2(n), tmp3(n), mu_eff(n);
    SimResult res;
    res.terminal_gap = Vec(n);
    res.f_realized = Vec(n);

    if (bundle) {
        bundle->dw.reserve(static_cast<std::size_t>(N));
        bundle->claim_state.assign(1, markov ? Vec{y} : w);
        bundle->mu.assign(1, mu);
        bundle->x.assign(1, x);
    }

    for (int k = 0; k < N; ++k) {
        const double tk = cache.grid.nodes[static_cast<std::size_t>(k)];
        const double dt = cache.grid.dt(k);
        const double sqrt_dt = std::sqrt(dt);
        for (int j = 0; j < d; ++j) dw[j] = sqrt_dt * rng.normal();

        // control statistics at the left endpoint (class-U admissibility)
        mat_vec_into(cache.u_map[static_cast<std::size_t>(k)], mu, tmp);
        const double gi = cache.g_inv[static_cast<std::size_t>(k)];
        const double un2 = dot(tmp, tmp);
        res.l1_cost += gi * std::sqrt(un2) * dt;
        res.weighted_u2 += gi * un2 * dt;

        // exact frozen-mu cost and plant step
        res.cost += quad_form(cache.r_diff[static_cast<std::size_t>(k)], mu);
        mat_vec_into(cache.phi[static_cast<std::size_t>(k)], x, tmp);
        mat_vec_into(cache.r_diff[static_cast<std::size_t>(k)], mu, tmp2);
        mat_vec_into(cache.psi[static_cast<std::size_t>(k)], tmp2, tmp3);
        for (int i = 0; i < n; ++i) x[i] = tmp[i] + tmp3[i];

        if (perturbed) {
            const Vec& hk = profile->h[static_cast<std::size_t>(k)];
            for (int i = 0; i < n; ++i) mu_eff[i] = mu[i] + hk[i];
            perturbed->cost += quad_form(cache.r_diff[static_cast<std::size_t>(k)], mu_eff);
            mat_vec_into(cache.u_map[static_cast<std::size_t>(k)], mu_eff, tmp);
            const double un2p = dot(tmp, tmp);
            perturbed->l1_cost += gi * std::sqrt(un2p) * dt;
            perturbed->weighted_u2 += gi * un2p * dt;
            mat_vec_into(cache.phi[static_cast<std::size_t>(k)], x_pert, tmp);
            mat_vec_into(cache.r_diff[static_cast<std::size_t>(k)], mu_eff, tmp2);
            mat_vec_into(cache.psi[static_cast<std::size_t>(k)], tmp2, tmp3);
            for (int i = 0; i < n; ++i) x_pert[i] = tmp[i] + tmp3[i];
        }

        // claim state and martingale update on the same increments
        if (markov) {
            const double drift = claim.diffusion().drift(y, tk);
            const double vol = claim.diffusion().vol(y, tk);
            const double dy = drift * dt + vol * dw[0];
            // kernel dH/dx(y,t) beta against dw, or dH/dx against dy under
            // the girsanov-q measure; throws extrapolation_error off-grid
            const double slope = claim.h().dx(y, tk);
            xi[0] = girsanov ? slope * dy : slope * vol * dw[0];
            y += dy;
        } else {
            w += dw;
            mat_vec_into(claim.coeff(), dw, xi);
        }
        mat_vec_into(cache.r_inv[static_cast<std::size_t>(k)], xi, tmp);
        mu += tmp;

        if (!std::isfinite(res.cost) || !x.is_finite() || !mu.is_finite())
            throw std::overflow_error("path state overflowed");

        if (bundle) {
            bundle->dw.push_back(dw);
            bundle->claim_state.push_back(markov ? Vec{y} : w);
            bundle->mu.push_back(mu);
            bundle->x.push_back(x);
        }
    }

    if (markov) {
        res.f_realized[0] = claim.terminal_value(y);
    } else {
        mat_vec_into(claim.coeff(), w, res.f_realized);
        res.f_realized += claim.offset();
    }
    res.terminal_gap = x - res.f_realized;
    res.gap_sq = dot(res.terminal_gap, res.terminal_gap);

    if (perturbed) {
        perturbed->f_realized = res.f_realized;
        perturbed->terminal_gap = x_pert - res.f_realized;
        perturbed->gap_sq = dot(perturbed->terminal_gap, perturbed->terminal_gap);
    }
    return res;
}

SimResult guarded_path(const ControlLaw& law, const StepCache& cache, RngStream& rng,
                       const StepProfile* profile, SimResult* perturbed) {
    try {
        return run_path(law, cache, rng, profile, perturbed, nullptr);
    } catch (const extrapolation_error&) {
    } catch (const std::overflow_error&) {
    }
    SimResult aborted;
    aborted.aborted = true;
    if (perturbed) perturbed->aborted = true;
    return aborted;
}

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    const auto n = static_cast<double>(v.size());
    if (v.empty()) return {};
    const double mean = pairwise_sum(v) / n;
    if (v.size() < 2) return {mean, 0.0};
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    const double var = pairwise_sum(sq) / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static slot-indexed dispatch: worker j owns a contiguous path range, every
// result lands in its slot, aggregation is order-independent.
template <typename Body>
void parallel_paths(std::int64_t n_paths, int workers, const Body& body) {
    if (workers <= 1) {
        for (std::int64_t p = 0; p < n_paths; ++p) body(p);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int j = 0; j < workers; ++j) {
        const std::int64_t lo = n_paths * j / workers;
        const std::int64_t hi = n_paths * (j + 1) / workers;
        pool.emplace_back([lo, hi, &body] {
            for (std::int64_t p = lo; p < hi; ++p) body(p);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace

SimResult simulate_path(const ControlLaw& law, const StepCache& cache, RngStream& rng) {
    return run_path(law, cache, rng, nullptr, nullptr, nullptr);
}

PathBundle simulate_bundle(const ControlLaw& law, const StepCache& cache, RngStream& rng) {
    PathBundle b;
    b.result = run_path(law, cache, rng, nullptr, nullptr, &b);
    return b;
}

McReport monte_carlo(const ControlLaw& law, const TimeGrid& grid, std::int64_t n_paths,
                     std::uint64_t seed, int worker_count) {
    if (n_paths < 100) throw std::invalid_argument("monte_carlo needs at least 100 paths");
    const StepCache cache = StepCache::build(law, grid);
    const int workers = resolve_workers(worker_count);

    std::vector<double> gap_sq(static_cast<std::size_t>(n_paths)), cost(static_cast<std::size_t>(n_paths)),
        l1_sq(static_cast<std::size_t>(n_paths)), wu2(static_cast<std::size_t>(n_paths));
    std::vector<char> aborted(static_cast<std::size_t>(n_paths), 0);

    parallel_paths(n_paths, workers, [&](std::int64_t p) {
        RngStream rng(seed, static_cast<std::uint64_t>(p));
        const SimResult r = guarded_path(law, cache, rng, nullptr, nullptr);
        const auto i = static_cast<std::size_t>(p);
        aborted[i] = r.aborted ? 1 : 0;
        gap_sq[i] = r.gap_sq;
        cost[i] = r.cost;
        l1_sq[i] = r.l1_cost * r.l1_cost;
        wu2[i] = r.weighted_u2;
    });

    // compact out aborted slots in index order (deterministic)
    std::int64_t n_aborted = 0;
    std::size_t out = 0;
    for (std::size_t i = 0; i < aborted.size(); ++i) {
        if (aborted[i]) {
            ++n_aborted;
            continue;
        }
        gap_sq[out] = gap_sq[i];
        cost[out] = cost[i];
        l1_sq[out] = l1_sq[i];
        wu2[out] = wu2[i];
        ++out;
    }
    gap_sq.resize(out);
    cost.resize(out);
    l1_sq.resize(out);
    wu2.resize(out);

    if (n_aborted * 1000 > n_paths)
        throw std::runtime_error("more than 0.1% of paths aborted (" + std::to_string(n_aborted) +
                                 " of " + std::to_string(n_paths) + ")");

    McReport rep;
    rep.n_paths = n_paths;
    rep.grid_n = grid.n;
    rep.gamma = grid.gamma;
    rep.seed = seed;
    rep.worker_count = workers;
    rep.aborted = n_aborted;
    rep.measure = law.claim().measure();
    const MeanSe g = mean_se(gap_sq), c = mean_se(cost), l = mean_se(l1_sq), w = mean_se(wu2);
    rep.mean_gap_sq = g.mean;
    rep.se_gap_sq = g.se;
    rep.mean_cost = c.mean;
    rep.se_cost = c.se;
    rep.mean_l1_sq = l.mean;
    rep.se_l1_sq = l.se;
    rep.mean_weighted_u2 = w.mean;
    rep.se_weighted_u2 = w.se;
    rep.closed_form_cost = law.closed_form_cost();
    return rep;
}

StepProfile balanced_two_piece(const ControlLaw& law, const TimeGrid& grid, const Vec& h_head) {
    if (h_head.size() != law.system().dim()) throw std::invalid_argument("profile dimension mismatch");
    const double t_star = grid.T / 2.0;
    int k_star = 0;
    while (k_star < grid.n && grid.nodes[static_cast<std::size_t>(k_star)] < t_star) ++k_star;
    if (k_star == 0 || k_star >= grid.n)
        throw std::invalid_argument("grid too coarse for a two-piece profile");

    // tail constant solving (R(0) - R(t*)) h_head + R(t*) h_tail = 0
    const Mat r0 = law.gramian().value(0.0);
    const Mat r_star = law.gramian().value(grid.nodes[static_cast<std::size_t>(k_star)]);
    Vec rhs = (r0 - r_star) * h_head;
    rhs *= -1.0;
    const Vec h_tail = spd_solve(r_star, rhs);

    StepProfile p;
    p.h.reserve(static_cast<std::size_t>(grid.n));
    for (int k = 0; k < grid.n; ++k) p.h.push_back(k < k_star ? h_head : h_tail);
    return p;
}

PerturbationReport perturbation_test(const ControlLaw& law, const TimeGrid& grid,
                                     const StepProfile& profile, std::int64_t n_paths,
                                     std::uint64_t seed, int worker_count) {
    if (static_cast<int>(profile.h.size()) != grid.n)
        throw std::invalid_argument("profile must supply one value per grid step");
    if (n_paths < 100) throw std::invalid_argument("perturbation_test needs at least 100 paths");
    const StepCache cache = StepCache::build(law, grid);
    const int n = law.system().dim();

    // replication-preserving constraint: sum_k dR_k h_k = 0
    Vec constraint(n);
    double h_scale = 0.0;
    double quad = 0.0;
    for (int k = 0; k < grid.n; ++k) {
        const Vec& hk = profile.h[static_cast<std::size_t>(k)];
        constraint += cache.r_diff[static_cast<std::size_t>(k)] * hk;
        h_scale = std::max(h_scale, hk.norm());
        quad += quad_form(cache.r_diff[static_cast<std::size_t>(k)], hk);
    }
    const double scale = cache.r[0].frobenius_norm() * h_scale + 1e-300;
    if (constraint.norm() > 1e-8 * scale)
        throw std::invalid_argument("profile violates the replication-preserving constraint");

    const int workers = resolve_workers(worker_count);
    std::vector<double> cost_opt(static_cast<std::size_t>(n_paths)), cost_pert(static_cast<std::size_t>(n_paths)),
        cross(static_cast<std::size_t>(n_paths)), gap_opt(static_cast<std::size_t>(n_paths)),
        gap_pert(static_cast<std::size_t>(n_paths));
    std::vector<char> aborted(static_cast<std::size_t>(n_paths), 0);

    parallel_paths(n_paths, workers, [&](std::int64_t p) {
        RngStream rng(seed, static_cast<std::uint64_t>(p));
        SimResult pert;
        pert.terminal_gap = Vec(n);
        pert.f_realized = Vec(n);
        const SimResult opt = guarded_path(law, cache, rng, &profile, &pert);
        const auto i = static_cast<std::size_t>(p);
        aborted[i] = opt.aborted ? 1 : 0;
        cost_opt[i] = opt.cost;
        cost_pert[i] = pert.cost;
        cross[i] = pert.cost - opt.cost - quad;
        gap_opt[i] = opt.gap_sq;
        gap_pert[i] = pert.gap_sq;
    });

    std::size_t out = 0;
    for (std::size_t i = 0; i < aborted.size(); ++i) {
        if (aborted[i]) continue;
        cost_opt[out] = cost_opt[i];
        cost_pert[out] = cost_pert[i];
        cross[out] = cross[i];
        gap_opt[out] = gap_opt[i];
        gap_pert[out] = gap_pert[i];
        ++out;
    }
    cost_opt.resize(out);
    cost_pert.resize(out);
    cross.resize(out);
    gap_opt.resize(out);
    gap_pert.resize(out);

    PerturbationReport rep;
    rep.quad_form_exact = quad;
    const MeanSe co = mean_se(cost_opt), cp = mean_se(cost_pert), cr = mean_se(cross),
                 go = mean_se(gap_opt), gp = mean_se(gap_pert);
    rep.cost_opt_mean = co.mean;
    rep.cost_opt_se = co.se;
    rep.cost_pert_mean = cp.mean;
    rep.cost_pert_se = cp.se;
    rep.cross_mean = cr.mean;
    rep.cross_se = cr.se;
    rep.gap_sq_opt_mean = go.mean;
    rep.gap_sq_opt_se = go.se;
    rep.gap_sq_pert_mean = gp.mean;
    rep.gap_sq_pert_se = gp.se;
    return rep;
}

} // namespace exactrep

#include "exactrep/errors.hpp"
#include "exactrep/presets.hpp"
#include "exactrep/simulator.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace exactrep;

namespace {

std::shared_ptr<const ControlLaw> scalar_law(double a0, std::shared_ptr<const Claim> claim) {
    const SystemSpec sys = SystemSpec::make(Mat{{0.0}}, Mat{{1.0}}, Vec{a0}, 1.0);
    const WeightSpec w = WeightSpec::pure_power(0.75, 1.0, 1.0);
    const GMatrix g(Mat{{1.0}});
    auto table = std::make_shared<const GramianTable>(GramianTable::build(sys, w, g, 256));
    return std::make_shared<const ControlLaw>(sys, w, g, table, std::move(claim));
}

std::shared_ptr<const Claim> brownian_claim() {
    return std::make_shared<const Claim>(Claim::linear(Mat{{1.0}}, Vec{0.0}));
}

// recomputes the Abel-summed right-hand side of the discrete replication
// identity from the recorded path
double identity_relative_error(const ControlLaw& law, const StepCache& cache, const PathBundle& b) {
    const Claim& claim = law.claim();
    const int n = law.system().dim();
    const bool girsanov = claim.measure() == Measure::girsanov_q;
    Vec rhs = cache.r[0] * law.mu_bar();
    for (int k = 0; k < cache.grid.n; ++k) {
        const double tk = cache.grid.nodes[static_cast<std::size_t>(k)];
        Vec xi(n);
        if (claim.variant() == ClaimVariant::linear_terminal) {
            xi = claim.kf_at(tk, b.claim_state[static_cast<std::size_t>(k)]) *
                 b.dw[static_cast<std::size_t>(k)];
        } else {
            const Mat kf = claim.kf_at(tk, b.claim_state[static_cast<std::size_t>(k)]);
            const double inc = girsanov ? b.claim_state[static_cast<std::size_t>(k) + 1][0] -
                                              b.claim_state[static_cast<std::size_t>(k)][0]
                                        : b.dw[static_cast<std::size_t>(k)][0];
            xi[0] = kf(0, 0) * inc;
        }
        rhs += cache.r[static_cast<std::size_t>(k) + 1] *
               (cache.r_inv[static_cast<std::size_t>(k)] * xi);
    }
    const Vec lhs = b.x.back() - law.q();
    return (lhs - rhs).norm() / std::max(1.0, rhs.norm());
}

} // namespace

TEST_SUITE("simulator") {

TEST_CASE("time grid layout") {
    const TimeGrid uniform = TimeGrid::build(1.0, 4, 1.0);
    const std::vector<double> expect_u{0.0, 0.25, 0.5, 0.75, 1.0};
    for (int k = 0; k <= 4; ++k) CHECK(uniform.nodes[static_cast<std::size_t>(k)] == expect_u[static_cast<std::size_t>(k)]);

    const TimeGrid clustered = TimeGrid::build(1.0, 4, 2.0);
    const std::vector<double> expect_c{0.0, 0.4375, 0.75, 0.9375, 1.0};
    for (int k = 0; k <= 4; ++k) CHECK(clustered.nodes[static_cast<std::size_t>(k)] == expect_c[static_cast<std::size_t>(k)]);

    CHECK(TimeGrid::build(0.7, 100, 3.0).nodes.back() == 0.7); // bit-exact by construction
    CHECK_THROWS_AS(TimeGrid::build(1.0, 4, 0.99), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid::build(1.0, 1, 1.0), std::invalid_argument);
}

TEST_CASE("deterministic claim equal to the free flow replicates at zero cost, exactly") {
    auto claim = std::make_shared<const Claim>(Claim::linear(Mat{{0.0}}, Vec{1.0}));
    const auto law = scalar_law(1.0, claim); // q = 1 = offset
    const StepCache cache = StepCache::build(*law, TimeGrid::build(1.0, 64, 2.0));
    for (int p = 0; p < 10; ++p) {
        RngStream rng(5, static_cast<std::uint64_t>(p));
        const SimResult r = simulate_path(*law, cache, rng);
        CHECK(r.gap_sq == 0.0);
        CHECK(r.cost == 0.0);
    }
}

TEST_CASE("per-path replication identity holds to 1e-12 on the scalar benchmark") {
    const auto law = scalar_law(0.0, brownian_claim());
    const StepCache cache = StepCache::build(*law, TimeGrid::build(1.0, 512, 2.0));
    for (int p = 0; p < 20; ++p) {
        RngStream rng(11, static_cast<std::uint64_t>(p));
        const PathBundle b = simulate_bundle(*law, cache, rng);
        CHECK(identity_relative_error(*law, cache, b) < 1e-12);
    }
}

TEST_CASE("mu increments and cost increments match their defining relations") {
    const auto law = scalar_law(0.0, brownian_claim());
    const StepCache cache = StepCache::build(*law, TimeGrid::build(1.0, 128, 2.0));
    RngStream rng(17, 3);
    const PathBundle b = simulate_bundle(*law, cache, rng);
    CHECK(b.mu.front() == law->mu_bar());
    for (int k = 0; k < cache.grid.n; ++k) {
        const Vec expected_inc =
            cache.r_inv[static_cast<std::size_t>(k)] *
            (law->claim().kf_at(cache.grid.nodes[static_cast<std::size_t>(k)],
                                b.claim_state[static_cast<std::size_t>(k)]) *
             b.dw[static_cast<std::size_t>(k)]);
        const Vec actual_inc = b.mu[static_cast<std::size_t>(k) + 1] - b.mu[static_cast<std::size_t>(k)];
        CHECK(std::fabs(actual_inc[0] - expected_inc[0]) <= 1e-14 * (1.0 + std::fabs(expected_inc[0])));
        // frozen-mu cost increments are quadratic forms in a PSD difference
        CHECK(quad_form(cache.r_diff[static_cast<std::size_t>(k)], b.mu[static_cast<std::size_t>(k)]) >=
              -1e-15);
    }
}

TEST_CASE("monte carlo: determinism across worker counts and the path-count guard") {
    const auto law = scalar_law(0.0, brownian_claim());
    const TimeGrid grid = TimeGrid::build(1.0, 256, 2.0);
    const McReport r1 = monte_carlo(*law, grid, 2000, 99, 1);
    const McReport r3 = monte_carlo(*law, grid, 2000, 99, 3);
    CHECK(r1.mean_gap_sq == r3.mean_gap_sq);
    CHECK(r1.se_gap_sq == r3.se_gap_sq);
    CHECK(r1.mean_cost == r3.mean_cost);
    CHECK(r1.se_cost == r3.se_cost);
    CHECK(r1.mean_l1_sq == r3.mean_l1_sq);
    CHECK(r1.mean_weighted_u2 == r3.mean_weighted_u2);
    CHECK_THROWS_AS(monte_carlo(*law, grid, 99, 1, 1), std::invalid_argument);

    // sampled cost consistent with the closed form at a loose statistical bar
    CHECK(std::fabs(r1.mean_cost - r1.closed_form_cost) <= 5.0 * r1.se_cost);
}

TEST_CASE("mean-square gap halves (at least) when the grid doubles") {
    const auto law = scalar_law(0.0, brownian_claim());
    double prev = -1.0;
    for (int n : {256, 512, 1024}) {
        const McReport r = monte_carlo(*law, TimeGrid::build(1.0, n, 2.0), 4000, 31, 0);
        if (prev > 0.0) CHECK(r.mean_gap_sq <= 0.7 * prev);
        prev = r.mean_gap_sq;
    }
}

TEST_CASE("admissibility estimates are stable under grid refinement") {
    const auto law = scalar_law(0.0, brownian_claim());
    const McReport a = monte_carlo(*law, TimeGrid::build(1.0, 1024, 2.0), 4000, 7, 0);
    const McReport b = monte_carlo(*law, TimeGrid::build(1.0, 2048, 2.0), 4000, 7, 0);
    CHECK(b.mean_l1_sq / a.mean_l1_sq > 0.8);
    CHECK(b.mean_l1_sq / a.mean_l1_sq < 1.2);
    CHECK(b.mean_weighted_u2 / a.mean_weighted_u2 > 0.8);
    CHECK(b.mean_weighted_u2 / a.mean_weighted_u2 < 1.2);
}

TEST_CASE("overflowing paths abort and trip the run-level guard") {
    auto huge = std::make_shared<const Claim>(Claim::linear(Mat{{1e308}}, Vec{0.0}));
    const auto law = scalar_law(0.0, huge);
    const StepCache cache = StepCache::build(*law, TimeGrid::build(1.0, 64, 2.0));
    RngStream rng(1, 0);
    CHECK_THROWS_AS(simulate_path(*law, cache, rng), std::overflow_error);
    CHECK_THROWS_WITH_AS(monte_carlo(*law, TimeGrid::build(1.0, 64, 2.0), 200, 1, 1),
                         doctest::Contains("0.1%"), std::runtime_error);
}

TEST_CASE("zero perturbation changes nothing, exactly") {
    const auto law = scalar_law(0.0, brownian_claim());
    const TimeGrid grid = TimeGrid::build(1.0, 256, 2.0);
    StepProfile zero;
    zero.h.assign(static_cast<std::size_t>(grid.n), Vec(1));
    const PerturbationReport rep = perturbation_test(*law, grid, zero, 500, 4, 0);
    CHECK(rep.quad_form_exact == 0.0);
    CHECK(rep.cost_pert_mean == rep.cost_opt_mean);
    CHECK(rep.cross_mean == 0.0);
    CHECK(rep.gap_sq_pert_mean == rep.gap_sq_opt_mean);
}

TEST_CASE("balanced two-piece competitor: replication preserved, cost raised by the h-energy") {
    const auto law = scalar_law(0.0, brownian_claim());
    const TimeGrid grid = TimeGrid::build(1.0, 1024, 2.0);
    const StepProfile profile = balanced_two_piece(*law, grid, Vec{1.0});

    // independent oracle for \int h' Q h dt via the analytic antiderivative
    // of (1-t)^{-3/4} and the recorded switch node
    int k_star = 0;
    while (profile.h[static_cast<std::size_t>(k_star)][0] == 1.0) ++k_star;
    const double t_star = grid.nodes[static_cast<std::size_t>(k_star)];
    const double h_tail = profile.h.back()[0];
    const double r_star = 4.0 * std::pow(1.0 - t_star, 0.25);
    const double expected_quad = 1.0 * (4.0 - r_star) + h_tail * h_tail * r_star;
    const PerturbationReport rep = perturbation_test(*law, grid, profile, 20000, 12, 0);
    CHECK(rep.quad_form_exact == doctest::Approx(expected_quad).epsilon(1e-8));
    CHECK(rep.quad_form_exact > 0.0);

    // Monte Carlo: mean cost increase equals the deterministic h-energy
    CHECK(std::fabs(rep.cost_pert_mean - rep.cost_opt_mean - rep.quad_form_exact) <=
          3.0 * rep.cross_se + 1e-12);
    // the cross term is centered
    CHECK(std::fabs(rep.cross_mean) <= 3.0 * rep.cross_se);
    // terminal-gap statistics unchanged
    CHECK(std::fabs(rep.gap_sq_pert_mean - rep.gap_sq_opt_mean) <=
          2.0 * (rep.gap_sq_opt_se + rep.gap_sq_pert_se) + 1e-12);

    // doubling h quadruples the deterministic increase
    StepProfile twice = profile;
    for (auto& h : twice.h) h *= 2.0;
    const PerturbationReport rep2 = perturbation_test(*law, grid, twice, 500, 12, 0);
    CHECK(rep2.quad_form_exact == doctest::Approx(4.0 * rep.quad_form_exact).epsilon(1e-12));

    // an unbalanced profile violates the replication constraint
    StepProfile unbalanced;
    unbalanced.h.assign(static_cast<std::size_t>(grid.n), Vec{1.0});
    CHECK_THROWS_AS(perturbation_test(*law, grid, unbalanced, 500, 4, 0), std::invalid_argument);
}

TEST_CASE("plateau weight: sampled cost tracks its closed form") {
    const SystemSpec sys = SystemSpec::make(Mat{{0.0}}, Mat{{1.0}}, Vec{0.5}, 1.0);
    const WeightSpec w = WeightSpec::plateau(0.6, 0.5, 2.0, 1.0);
    const GMatrix g(Mat{{2.0}});
    auto table = std::make_shared<const GramianTable>(GramianTable::build(sys, w, g, 128));
    auto claim = std::make_shared<const Claim>(Claim::linear(Mat{{1.5}}, Vec{0.25}));
    const auto law = std::make_shared<const ControlLaw>(sys, w, g, table, claim);
    const McReport rep = monte_carlo(*law, TimeGrid::build(1.0, 1024, 2.0), 4000, 15, 0);
    CHECK(rep.mean_gap_sq < 1e-3);
    CHECK(std::fabs(rep.mean_cost - rep.closed_form_cost) <= 5.0 * rep.se_cost);
}

TEST_CASE("girsanov claims replicate through dy-driven increments") {
    ExperimentConfig cfg = preset("girsanov-linear");
    cfg.sim.paths = 1500;
    cfg.sim.grid_n = 1024;
    const auto law = build_law(cfg);
    const TimeGrid grid = TimeGrid::build(cfg.T, cfg.sim.grid_n, cfg.sim.gamma);
    const McReport rep = monte_carlo(*law, grid, cfg.sim.paths, 21, 0);
    CHECK(rep.mean_gap_sq < 1e-3);
    CHECK(rep.measure == Measure::girsanov_q);

    // identity with dy increments
    const StepCache cache = StepCache::build(*law, grid);
    for (int p = 0; p < 10; ++p) {
        RngStream rng(22, static_cast<std::uint64_t>(p));
        const PathBundle b = simulate_bundle(*law, cache, rng);
        CHECK(identity_relative_error(*law, cache, b) < 1e-12);
    }
}

} // TEST_SUITE

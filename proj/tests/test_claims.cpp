#include "exactrep/claims.hpp"
#include "exactrep/errors.hpp"
#include "exactrep/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

using namespace exactrep;

namespace {

DiffusionSpec standard_bm() {
    DiffusionSpec d;
    d.drift_kind = DriftKind::none;
    d.sigma = 1.0;
    d.y0 = 0.0;
    d.delta = 0.25;
    return d;
}

HSolverSpec analytic_spec(Measure m = Measure::physical) {
    HSolverSpec s;
    s.mode = HMode::analytic;
    s.measure = m;
    return s;
}

HSolverSpec fd_spec(int space = 401, int steps = 400, Measure m = Measure::physical) {
    HSolverSpec s;
    s.mode = HMode::finite_difference;
    s.measure = m;
    s.space_nodes = space;
    s.time_steps = steps;
    return s;
}

} // namespace

TEST_SUITE("claims") {

TEST_CASE("claim means: linear offset, squared and cosine terminal moments") {
    const Claim lin = Claim::linear(Mat{{1.0}}, Vec{0.0});
    CHECK(lin.mean()[0] == 0.0);

    const Claim square = Claim::markov(PayoffSpec::square(), standard_bm(), analytic_spec(), 1.0);
    CHECK(square.mean()[0] == doctest::Approx(1.0).epsilon(1e-14)); // E w(1)^2

    const Claim cosine = Claim::markov(PayoffSpec::cosine(), standard_bm(), analytic_spec(), 1.0);
    CHECK(cosine.mean()[0] == doctest::Approx(0.6065306597126334).epsilon(1e-14)); // e^{-1/2}

    const Claim square_fd = Claim::markov(PayoffSpec::square(), standard_bm(), fd_spec(), 1.0);
    CHECK(square_fd.mean()[0] == doctest::Approx(1.0).epsilon(1e-6));
    const Claim cos_fd = Claim::markov(PayoffSpec::cosine(), standard_bm(), fd_spec(), 1.0);
    CHECK(cos_fd.mean()[0] == doctest::Approx(0.6065306597126334).epsilon(2e-4));
}

TEST_CASE("representation kernels at a state") {
    const Claim lin = Claim::linear(Mat{{1.0}}, Vec{0.0});
    CHECK(lin.kf_at(0.123, Vec{0.0})(0, 0) == 1.0);

    const Claim square = Claim::markov(PayoffSpec::square(), standard_bm(), analytic_spec(), 1.0);
    CHECK(square.kf_at(0.4, Vec{0.3})(0, 0) == doctest::Approx(0.6).epsilon(1e-14)); // 2 y beta

    const Claim cosine = Claim::markov(PayoffSpec::cosine(), standard_bm(), analytic_spec(), 1.0);
    CHECK(cosine.kf_at(0.5, Vec{0.0})(0, 0) == 0.0); // sin(0) = 0

    CHECK_THROWS_AS(square.kf_at(1.0, Vec{0.0}), std::domain_error);
    const Claim square_fd = Claim::markov(PayoffSpec::square(), standard_bm(), fd_spec(), 1.0);
    CHECK_THROWS_AS(square_fd.kf_at(0.5, Vec{100.0}), extrapolation_error);
}

TEST_CASE("finite-difference H: interior accuracy against the closed forms") {
    const DiffusionSpec bm = standard_bm();
    const HSolution h = solve_h(PayoffSpec::square(), bm, fd_spec(), 1.0);
    // interior accuracy on the central band at mid-horizon
    for (double x : {-1.5, -0.3, 0.0, 0.7, 2.0})
        CHECK(h.value(x, 0.5) == doctest::Approx(x * x + 0.5).epsilon(1e-3));

    // terminal slice equals F exactly on grid nodes
    const int last = static_cast<int>(h.t_grid().size()) - 1;
    for (std::size_t i = 0; i < h.x_grid().size(); ++i) {
        const double x = h.x_grid()[i];
        CHECK(h.node_value(last, static_cast<int>(i)) == x * x);
    }

    const HSolution hc = solve_h(PayoffSpec::cosine(), bm, fd_spec(), 1.0);
    for (double x : {-2.0, 0.0, 1.0})
        CHECK(std::fabs(hc.value(x, 0.25) - std::exp(-0.375) * std::cos(x)) < 1e-3);
}

TEST_CASE("driftless pricing of a linear payoff is time-invariant") {
    DiffusionSpec d = standard_bm();
    d.drift_kind = DriftKind::linear;
    d.kappa = 0.5;
    const HSolution h = solve_h(PayoffSpec::identity(), d, fd_spec(401, 200, Measure::girsanov_q), 1.0);
    for (double t : {0.0, 0.3, 0.9})
        for (double x : {-1.0, 0.0, 0.8}) {
            CHECK(h.value(x, t) == doctest::Approx(x).epsilon(1e-6));
            CHECK(h.dx(x, t) == doctest::Approx(1.0).epsilon(1e-6));
        }
}

TEST_CASE("girsanov mode with zero drift coincides with the physical solve") {
    const DiffusionSpec bm = standard_bm();
    const HSolution hp = solve_h(PayoffSpec::cosine(), bm, fd_spec(201, 100, Measure::physical), 1.0);
    const HSolution hq = solve_h(PayoffSpec::cosine(), bm, fd_spec(201, 100, Measure::girsanov_q), 1.0);
    for (std::size_t k = 0; k < hp.t_grid().size(); k += 7)
        for (std::size_t i = 0; i < hp.x_grid().size(); i += 11)
            CHECK(std::fabs(hp.node_value(static_cast<int>(k), static_cast<int>(i)) -
                            hq.node_value(static_cast<int>(k), static_cast<int>(i))) <= 1e-12);
}

TEST_CASE("diffusion and grid guards") {
    DiffusionSpec thin = standard_bm();
    thin.sigma = 0.5; // beta^2/2 = 0.125 < delta
    CHECK_THROWS_AS(solve_h(PayoffSpec::square(), thin, fd_spec(), 1.0), std::invalid_argument);

    DiffusionSpec wild = standard_bm();
    wild.drift_kind = DriftKind::linear;
    wild.kappa = 30.0; // advection dominates any practical grid
    CHECK_THROWS_AS(solve_h(PayoffSpec::identity(), wild, fd_spec(401, 100, Measure::physical), 1.0),
                    grid_error);

    CHECK_THROWS_AS(solve_h(PayoffSpec::square(), standard_bm(), fd_spec(400, 100), 1.0),
                    std::invalid_argument); // even node count
    CHECK_THROWS_AS(solve_h(PayoffSpec::tabulated({0.0, 1.0}, {0.0, 1.0}), standard_bm(),
                            analytic_spec(), 1.0),
                    std::invalid_argument);
}

TEST_CASE("PDE solution is probabilistically consistent at the origin") {
    const Claim square_fd = Claim::markov(PayoffSpec::square(), standard_bm(), fd_spec(), 1.0);
    // Monte Carlo E F(y(T)) on driver paths independent of the solver
    const int paths = 20000;
    double sum = 0.0, sum_sq = 0.0;
    for (int p = 0; p < paths; ++p) {
        RngStream rng(777, static_cast<std::uint64_t>(p));
        double y = 0.0;
        const int steps = 64;
        for (int k = 0; k < steps; ++k) y += std::sqrt(1.0 / steps) * rng.normal();
        const double f = y * y;
        sum += f;
        sum_sq += f * f;
    }
    const double mean = sum / paths;
    const double se = std::sqrt((sum_sq - paths * mean * mean) / (paths - 1.0) / paths);
    CHECK(std::fabs(square_fd.mean()[0] - mean) <= 3.0 * se);
}

TEST_CASE("kernel condition diagnostic") {
    const Claim lin = Claim::linear(Mat{{1.0}}, Vec{0.0});
    CHECK(lin.kf_condition_check(0.5, 1000) == 1.0);

    const Claim square = Claim::markov(PayoffSpec::square(), standard_bm(), analytic_spec(), 1.0);
    // E |k_f(t)|^2 = 4t, so the sup over [tau, 1) approaches 4
    CHECK(square.kf_condition_check(0.5, 100000) == doctest::Approx(4.0).epsilon(0.03));

    const Claim cosine = Claim::markov(PayoffSpec::cosine(), standard_bm(), analytic_spec(), 1.0);
    CHECK(cosine.kf_condition_check(0.25, 20000) <= 1.0 + 1e-9);
}

TEST_CASE("kernel second moments: analytic forms") {
    const Claim square = Claim::markov(PayoffSpec::square(), standard_bm(), analytic_spec(), 1.0);
    CHECK(square.second_moment(0.25)(0, 0) == doctest::Approx(1.0).epsilon(1e-14)); // 4t
    const Claim cosine = Claim::markov(PayoffSpec::cosine(), standard_bm(), analytic_spec(), 1.0);
    const double t = 0.5;
    const double expected = std::exp(-(1.0 - t)) * 0.5 * (1.0 - std::exp(-2.0 * t));
    CHECK(cosine.second_moment(t)(0, 0) == doctest::Approx(expected).epsilon(1e-14));
    const Claim lin = Claim::linear(Mat{{1.0, 2.0}, {0.0, 1.0}}, Vec{0.0, 0.0});
    const Mat cc = lin.second_moment(0.3);
    CHECK(cc(0, 0) == doctest::Approx(5.0));
    CHECK(cc(0, 1) == doctest::Approx(2.0));
    CHECK(cc(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("discrete martingale representation converges in mean square") {
    // MSE(N) of f vs Ef + sum k_f dw halves when N doubles on the benchmarks
    const Claim square = Claim::markov(PayoffSpec::square(), standard_bm(), analytic_spec(), 1.0);
    const Claim cosine = Claim::markov(PayoffSpec::cosine(), standard_bm(), analytic_spec(), 1.0);
    for (const Claim* claim : {&square, &cosine}) {
        std::vector<double> mse;
        for (int n : {512, 1024, 2048}) {
            double acc = 0.0;
            const int paths = 4000;
            for (int p = 0; p < paths; ++p) {
                RngStream rng(2024, static_cast<std::uint64_t>(p));
                double y = 0.0;
                double sum = claim->mean()[0];
                const double dt = 1.0 / n;
                for (int k = 0; k < n; ++k) {
                    const double dwk = std::sqrt(dt) * rng.normal();
                    sum += claim->kf_at(k * dt, Vec{y})(0, 0) * dwk;
                    y += dwk;
                }
                const double err = claim->terminal_value(y) - sum;
                acc += err * err;
            }
            mse.push_back(acc / paths);
        }
        CHECK(mse[1] <= 0.7 * mse[0]);
        CHECK(mse[2] <= 0.7 * mse[1]);
    }
}

TEST_CASE("tabulated payoffs: CSV ingestion and the Monte Carlo moment pre-pass") {
    namespace fs = std::filesystem;
    const fs::path csv = fs::temp_directory_path() / "exactrep_payoff_test.csv";
    {
        std::ofstream out(csv);
        out << "x,f\n";
        for (int i = 0; i <= 400; ++i) {
            const double x = -8.0 + 16.0 * i / 400.0;
            out << x << "," << x * x << "\n";
        }
    }
    const PayoffSpec payoff = PayoffSpec::from_csv(csv.string());
    CHECK(payoff(0.5) == doctest::Approx(0.25).epsilon(1e-3));

    CHECK_THROWS_AS(PayoffSpec::tabulated({0.0, 0.0, 1.0}, {0.0, 0.1, 1.0}), std::invalid_argument);

    const Claim tab = Claim::markov(payoff, standard_bm(), fd_spec(201, 200), 1.0);
    // pre-pass second moment should track the analytic 4t of the square claim
    CHECK(tab.second_moment(0.5)(0, 0) == doctest::Approx(2.0).epsilon(0.05));
    fs::remove(csv);
}

} // TEST_SUITE

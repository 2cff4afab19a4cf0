#include "exactrep/errors.hpp"
#include "exactrep/gramian.hpp"
#include "exactrep/quadrature.hpp"
#include "exactrep/system.hpp"
#include "exactrep/weight.hpp"

#include <doctest.h>

#include <cmath>

using namespace exactrep;

namespace {

SystemSpec scalar_system(double a0 = 0.0) {
    return SystemSpec::make(Mat{{0.0}}, Mat{{1.0}}, Vec{a0}, 1.0);
}

SystemSpec nilpotent_system() {
    return SystemSpec::make(Mat{{0.0, 1.0}, {0.0, 0.0}}, Mat::identity(2), Vec{0.0, 0.0}, 1.0);
}

double max_abs_diff(const Mat& a, const Mat& b) {
    double d = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) d = std::max(d, std::fabs(a(i, j) - b(i, j)));
    return d;
}

} // namespace

TEST_SUITE("weight_gramian") {

TEST_CASE("weight values: plateau head is 1, pure power follows the closed form") {
    const WeightSpec plateau = WeightSpec::plateau(0.75, 0.5, 2.0, 1.0);
    CHECK(plateau.value(0.25) == 1.0);
    CHECK(plateau.value(0.75) == doctest::Approx(std::pow(0.25, 0.75)).epsilon(1e-15));

    const WeightSpec power = WeightSpec::pure_power(0.75, 1.0, 1.0);
    CHECK(power.value(0.0) == 1.0);
    CHECK(power.value(0.9375) == doctest::Approx(0.125).epsilon(1e-15)); // 0.0625^{3/4}
    CHECK(power.inverse_value(0.5) == doctest::Approx(std::pow(0.5, -0.75)).epsilon(1e-15));
}

TEST_CASE("weight domain ends at T and the exponent range is enforced") {
    const WeightSpec w = WeightSpec::pure_power(0.75, 1.0, 1.0);
    CHECK_THROWS_AS(w.value(1.0), std::domain_error);
    CHECK_THROWS_AS(w.value(1.5), std::domain_error);
    CHECK_THROWS_AS(w.value(-0.1), std::domain_error);

    CHECK_THROWS_AS(WeightSpec::pure_power(0.5, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(WeightSpec::pure_power(0.4, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(WeightSpec::pure_power(1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(WeightSpec::plateau(0.75, 1.5, 2.0, 1.0), std::invalid_argument);
    // plateau with c = 1 violates g <= c (T-t)^alpha on the head
    CHECK_THROWS_AS(WeightSpec::plateau(0.75, 0.5, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("q_kernel on the scalar benchmark") {
    const SystemSpec sys = scalar_system();
    const WeightSpec w = WeightSpec::pure_power(0.75, 1.0, 1.0);
    const GMatrix g(Mat{{1.0}});
    CHECK(q_kernel(sys, w, g, 0.5)(0, 0) == doctest::Approx(1.6817928305074290).epsilon(1e-14));
    CHECK(q_kernel(sys, w, g, 0.0)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(q_kernel(sys, w, g, 1.0), std::domain_error);
}

TEST_CASE("q_kernel on the nilpotent pair matches the multiplied-out exponential") {
    const SystemSpec sys = nilpotent_system();
    const WeightSpec w = WeightSpec::pure_power(0.75, 1.0, 1.0);
    const GMatrix g(Mat::identity(2));
    for (double t : {0.0, 0.3, 0.8, 0.99}) {
        const double s = 1.0 - t;
        const double gi = std::pow(s, -0.75);
        const Mat expected{{gi * (1.0 + s * s), gi * s}, {gi * s, gi}};
        CHECK(max_abs_diff(q_kernel(sys, w, g, t), expected) < 1e-12 * (1.0 + expected.max_abs()));
    }
}

TEST_CASE("scalar benchmark table matches the analytic antiderivative at every node") {
    const SystemSpec sys = scalar_system();
    const WeightSpec w = WeightSpec::pure_power(0.75, 1.0, 1.0);
    const GMatrix g(Mat{{1.0}});
    // force the quadrature + interpolation path: this is the check that the
    // substitution really removes the endpoint singularity
    const GramianTable table = GramianTable::build(sys, w, g, 256, GramianEval::tabulated);
    REQUIRE_FALSE(table.analytic());
    for (std::size_t j = 0; j < table.grid().size(); ++j) {
        const double s = table.grid()[j];
        const double exact = 4.0 * std::pow(1.0 - s, 0.25);
        CHECK(std::fabs(table.node_values()[j](0, 0) - exact) <= 1e-8);
    }
    CHECK(table.value(1.0)(0, 0) == 0.0);
    // off-node interpolation stays tight
    for (double s : {0.123, 0.5671, 0.9843, 0.99991})
        CHECK(table.value(s)(0, 0) == doctest::Approx(4.0 * std::pow(1.0 - s, 0.25)).epsilon(1e-9));

    const GramianTable analytic = GramianTable::build(sys, w, g, 256);
    REQUIRE(analytic.analytic());
    CHECK(analytic.value(0.0)(0, 0) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("nilpotent R(0) matches brute-force quadrature in the substituted variable") {
    const SystemSpec sys = nilpotent_system();
    const WeightSpec w = WeightSpec::pure_power(0.75, 1.0, 1.0);
    const GMatrix g(Mat::identity(2));
    const GramianTable table = GramianTable::build(sys, w, g, 256);

    // oracle: R(0) = 4 \int_0^1 Qtilde(1 - v^4) dv by a 10^6-node trapezoid;
    // Qtilde(t) = [[1+s^2, s], [s, 1]] with s = 1-t
    const int n_nodes = 1000000;
    Mat acc(2, 2);
    for (int i = 0; i <= n_nodes; ++i) {
        const double v = static_cast<double>(i) / n_nodes;
        const double s = v * v * v * v;
        const double wgt = (i == 0 || i == n_nodes) ? 0.5 : 1.0;
        acc(0, 0) += wgt * (1.0 + s * s);
        acc(0, 1) += wgt * s;
        acc(1, 0) += wgt * s;
        acc(1, 1) += wgt * 1.0;
    }
    acc *= 4.0 / n_nodes;
    CHECK(max_abs_diff(table.value(0.0), acc) < 1e-6);
    // and the exact closed form of that integral
    const Mat exact{{40.0 / 9.0, 0.8}, {0.8, 4.0}};
    CHECK(max_abs_diff(table.value(0.0), exact) < 1e-8);
}

TEST_CASE("gramian inverse: growth at the endpoint and the identity check") {
    const SystemSpec sys = scalar_system();
    const WeightSpec w = WeightSpec::pure_power(0.75, 1.0, 1.0);
    const GMatrix g(Mat{{1.0}});
    const GramianTable table = GramianTable::build(sys, w, g, 256);
    CHECK(table.inverse(0.0)(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(table.inverse(1.0 - 1.0 / 16.0)(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(table.inverse(1.0), std::domain_error);

    const SystemSpec sys2 = nilpotent_system();
    const GramianTable table2 = GramianTable::build(sys2, w, GMatrix(Mat::identity(2)), 256);
    for (std::size_t j = 0; j < table2.grid().size(); j += 17) {
        const double t = table2.grid()[j];
        if (t >= 1.0) continue;
        CHECK(max_abs_diff(table2.value(t) * table2.inverse(t), Mat::identity(2)) < 1e-8);
    }
}

TEST_CASE("Loewner monotonicity and panel additivity") {
    const SystemSpec sys = nilpotent_system();
    const WeightSpec w = WeightSpec::pure_power(0.75, 1.0, 1.0);
    const GramianTable table = GramianTable::build(sys, w, GMatrix(Mat::identity(2)), 128);
    const auto& grid = table.grid();
    const auto& values = table.node_values();
    for (std::size_t i = 0; i < grid.size(); i += 9) {
        for (std::size_t j = i + 1; j < grid.size(); j += 13) {
            CHECK(min_eigenvalue(values[i] - values[j]) >= -1e-10);
        }
    }
    // stored backward accumulation makes adjacent-panel additivity exact
    for (std::size_t i = 0; i + 2 < values.size(); i += 11) {
        const Mat lhs = values[i] - values[i + 2];
        const Mat mid = (values[i] - values[i + 1]) + (values[i + 1] - values[i + 2]);
        CHECK(max_abs_diff(lhs, mid) < 1e-14 * (1.0 + values[i].max_abs()));
    }
    // quadrature over adjacent panels sums to quadrature over the union
    const auto f = [](double t) { return std::cos(3.0 * t) + t * t; };
    const double whole = quad::integrate(f, 0.1, 0.9);
    const double split = quad::integrate(f, 0.1, 0.4) + quad::integrate(f, 0.4, 0.9);
    CHECK(whole == doctest::Approx(split).epsilon(1e-10));
}

TEST_CASE("log-log slope of the inverse norm recovers the growth rate") {
    const SystemSpec sys = scalar_system();
    const WeightSpec w = WeightSpec::pure_power(0.75, 1.0, 1.0);
    const GMatrix g(Mat{{1.0}});
    for (auto eval : {GramianEval::automatic, GramianEval::tabulated}) {
        const GramianTable table = GramianTable::build(sys, w, g, 512, eval);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (int i = 0; i <= 50; ++i) {
            const double t = 0.9 + (0.999 - 0.9) * i / 50.0;
            const double lx = std::log(1.0 - t);
            const double ly = std::log(table.inverse(t).frobenius_norm());
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++m;
        }
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        CHECK(std::fabs(slope - (-(1.0 - 0.75))) < 0.05);
    }
}

TEST_CASE("lemma-1 diagnostic: finite integral with the analytic value, divergence when forced") {
    const SystemSpec sys = scalar_system();
    const GMatrix g(Mat{{1.0}});
    const WeightSpec w = WeightSpec::pure_power(0.75, 1.0, 1.0);
    const GramianTable table = GramianTable::build(sys, w, g, 256);

    const auto diag = table.lemma1_diagnostic(0.5);
    // \int_{1/2}^1 (1/16)(1-t)^{-1/2} dt = sqrt(1/2)/8
    CHECK(std::fabs(diag.integral_value - 0.08838834764831845) < 1e-6);
    // ||R^{-1}|| (T-t)^{1-a} / (1-a) = 1 identically on the scalar benchmark
    CHECK(diag.bound_constant == doctest::Approx(1.0).epsilon(1e-9));

    // vanishing interval
    CHECK(table.lemma1_diagnostic(1.0 - 1e-8).integral_value < 1e-3);
    CHECK_THROWS_AS(table.lemma1_diagnostic(0.0), std::invalid_argument);

    // inadmissible exponent forced through the guard: the tail of
    // ||R^{-1}||^2 ~ (T-t)^{2a-2} stops being integrable at a <= 1/2
    const WeightSpec bad = WeightSpec::unchecked(WeightForm::pure_power, 0.4, 0.0, 1.0, 1.0);
    const GramianTable bad_table = GramianTable::build(sys, bad, g, 128);
    CHECK_THROWS_AS(bad_table.lemma1_diagnostic(0.5), divergence_error);
}

TEST_CASE("plateau table agrees with direct quadrature away from the tail") {
    const SystemSpec sys = scalar_system();
    const WeightSpec w = WeightSpec::plateau(0.75, 0.5, 2.0, 1.0);
    const GMatrix g(Mat{{1.0}});
    const GramianTable table = GramianTable::build(sys, w, g, 256);
    // R(s) = (T - tau - s) + R(T - tau) on the head (g = 1 there)
    const double r_at_head_end = 4.0 * std::pow(0.5, 0.25) - 4.0 * 0.0; // \int_{1/2}^1 (1-t)^{-3/4} dt
    for (double s : {0.0, 0.2, 0.45}) {
        const double exact = (0.5 - s) + r_at_head_end;
        CHECK(table.value(s)(0, 0) == doctest::Approx(exact).epsilon(1e-8));
    }
    CHECK(table.value(1.0)(0, 0) == 0.0);
    // build precondition
    CHECK_THROWS_AS(GramianTable::build(sys, w, g, 32), std::invalid_argument);
}

} // TEST_SUITE

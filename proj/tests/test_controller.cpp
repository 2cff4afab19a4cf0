#include "exactrep/controller.hpp"
#include "exactrep/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace exactrep;

namespace {

struct Bench {
    std::shared_ptr<const ControlLaw> law;
};

// scalar benchmark: A = 0, b = 1, G = 1, g = (1-t)^{3/4}, T = 1
Bench scalar_bench(double a0, std::shared_ptr<const Claim> claim, int nodes = 256) {
    const SystemSpec sys = SystemSpec::make(Mat{{0.0}}, Mat{{1.0}}, Vec{a0}, 1.0);
    const WeightSpec w = WeightSpec::pure_power(0.75, 1.0, 1.0);
    const GMatrix g(Mat{{1.0}});
    auto table = std::make_shared<const GramianTable>(GramianTable::build(sys, w, g, nodes));
    return Bench{std::make_shared<const ControlLaw>(sys, w, g, table, std::move(claim))};
}

std::shared_ptr<const Claim> brownian_claim(double coeff = 1.0) {
    return std::make_shared<const Claim>(Claim::linear(Mat{{coeff}}, Vec{0.0}));
}

std::shared_ptr<const Claim> squared_claim() {
    DiffusionSpec d;
    d.sigma = 1.0;
    d.y0 = 0.0;
    d.delta = 0.25;
    HSolverSpec s;
    s.mode = HMode::analytic;
    return std::make_shared<const Claim>(Claim::markov(PayoffSpec::square(), d, s, 1.0));
}

} // namespace

TEST_SUITE("controller") {

TEST_CASE("mu_bar on the scalar benchmarks") {
    CHECK(scalar_bench(0.0, brownian_claim()).law->mu_bar()[0] == 0.0);
    CHECK(scalar_bench(1.0, brownian_claim()).law->mu_bar()[0] == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(scalar_bench(0.0, squared_claim()).law->mu_bar()[0] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("adjoint is the transposed-exponential costate") {
    const Bench b = scalar_bench(0.0, brownian_claim());
    const Vec mu{0.37};
    CHECK(b.law->adjoint_psi(0.3, mu)[0] == 0.37); // A = 0
    CHECK(b.law->adjoint_psi(1.0, mu)[0] == 0.37); // e^0 = I

    const SystemSpec sys = SystemSpec::make(Mat{{0.0, 1.0}, {0.0, 0.0}}, Mat::identity(2),
                                            Vec{0.0, 0.0}, 1.0);
    const WeightSpec w = WeightSpec::pure_power(0.75, 1.0, 1.0);
    const GMatrix g(Mat::identity(2));
    auto table = std::make_shared<const GramianTable>(GramianTable::build(sys, w, g, 128));
    auto claim = std::make_shared<const Claim>(Claim::linear(Mat::identity(2), Vec{0.0, 0.0}));
    const ControlLaw law(sys, w, g, table, claim);
    const Vec mu2{0.5, -1.0};
    const double t = 0.3;
    const Vec psi = law.adjoint_psi(t, mu2);
    // e^{A'(T-t)} = [[1, 0], [T-t, 1]]
    CHECK(psi[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(psi[1] == doctest::Approx(0.5 * (1.0 - t) - 1.0).epsilon(1e-12));
    // oracle through mat_exp directly
    const Vec psi_oracle = mat_exp(sys.A.transpose(), 1.0 - t) * mu2;
    CHECK(psi[0] == doctest::Approx(psi_oracle[0]).epsilon(1e-14));
    CHECK(psi[1] == doctest::Approx(psi_oracle[1]).epsilon(1e-14));
}

TEST_CASE("control values on the scalar benchmark") {
    const Bench b = scalar_bench(0.0, brownian_claim());
    CHECK(b.law->u_value(0.7, Vec{0.0})[0] == 0.0);
    CHECK(b.law->u_value(0.5, Vec{1.0})[0] == doctest::Approx(1.6817928305074290).epsilon(1e-14));
    CHECK(b.law->u_value(0.0, Vec{-0.25})[0] == doctest::Approx(-0.25).epsilon(1e-14));
    CHECK_THROWS_AS(b.law->u_value(1.0, Vec{1.0}), std::domain_error);
}

TEST_CASE("closed-form optimal costs on the scalar benchmarks") {
    CHECK(scalar_bench(0.0, brownian_claim()).law->closed_form_cost() ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK(scalar_bench(1.0, brownian_claim()).law->closed_form_cost() ==
          doctest::Approx(7.0 / 12.0).epsilon(1e-9));
    // 1/4 + B(2, 3/4) = 1/4 + 16/21 = 85/84
    CHECK(scalar_bench(0.0, squared_claim()).law->closed_form_cost() ==
          doctest::Approx(85.0 / 84.0).epsilon(1e-6));
}

TEST_CASE("deterministic claim matching the free flow costs nothing") {
    // f = e^{AT} a deterministic, k_f = 0
    auto claim = std::make_shared<const Claim>(Claim::linear(Mat{{0.0}}, Vec{1.0}));
    const Bench b = scalar_bench(1.0, claim); // q = a = 1 under A = 0
    CHECK(b.law->mu_bar()[0] == 0.0);
    CHECK(b.law->u_value(0.5, b.law->mu_bar())[0] == 0.0);
    CHECK(b.law->closed_form_cost() == 0.0);
}

TEST_CASE("quadratic homogeneity: doubling the claim quadruples the cost") {
    const double base = scalar_bench(0.0, brownian_claim(1.0)).law->closed_form_cost();
    const double doubled = scalar_bench(0.0, brownian_claim(2.0)).law->closed_form_cost();
    CHECK(doubled == doctest::Approx(4.0 * base).epsilon(1e-10));
    CHECK(scalar_bench(0.0, brownian_claim(2.0)).law->mu_bar()[0] == 0.0);
}

TEST_CASE("u_value is linear in mu") {
    const Bench b = scalar_bench(0.0, brownian_claim());
    const double u1 = b.law->u_value(0.3, Vec{0.4})[0];
    const double u2 = b.law->u_value(0.3, Vec{0.8})[0];
    CHECK(u2 == doctest::Approx(2.0 * u1).epsilon(1e-14));
}

TEST_CASE("Fubini consistency: the weighted mu second-moment route gives the same cost") {
    // \int_0^T g^{-1}(t) E|mu(t)|^2 dt with
    // E|mu(t)|^2 = mu_bar^2 + (1/8)(1 - sqrt(1-t))  (analytic inner antiderivative)
    for (double a0 : {0.0, 1.0}) {
        const Bench b = scalar_bench(a0, brownian_claim());
        const double mb = b.law->mu_bar()[0];
        const double alt = quad::integrate_power_tail(
            [mb](double, double dist) {
                const double e_mu_sq = mb * mb + (1.0 - std::sqrt(dist)) / 8.0;
                return std::pow(dist, -0.75) * e_mu_sq;
            },
            0.0, 1.0, 0.75, 1e-12);
        CHECK(alt == doctest::Approx(b.law->closed_form_cost()).epsilon(1e-6));
    }
}

TEST_CASE("component horizons must agree") {
    const SystemSpec sys = SystemSpec::make(Mat{{0.0}}, Mat{{1.0}}, Vec{0.0}, 2.0);
    const WeightSpec w = WeightSpec::pure_power(0.75, 1.0, 1.0); // T = 1 != 2
    const GMatrix g(Mat{{1.0}});
    const SystemSpec sys1 = SystemSpec::make(Mat{{0.0}}, Mat{{1.0}}, Vec{0.0}, 1.0);
    auto table = std::make_shared<const GramianTable>(GramianTable::build(sys1, w, g, 128));
    CHECK_THROWS_AS(ControlLaw(sys, w, g, table, brownian_claim()), std::invalid_argument);
}

} // TEST_SUITE

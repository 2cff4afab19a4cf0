#pragma once

#include "exactrep/linalg.hpp"

#include <memory>
#include <string>
#include <vector>

namespace exactrep {

enum class Measure { physical, girsanov_q };
enum class HMode { analytic, finite_difference };
enum class PayoffKind { square, cosine, identity, tabulated };

/// Terminal payoff F for Markov claims f = F(y(T)).
struct PayoffSpec {
    PayoffKind kind = PayoffKind::square;
    std::vector<double> xs;     // tabulated abscissae, strictly increasing
    std::vector<double> values; // tabulated F(x)

    double operator()(double x) const;

    static PayoffSpec square() { return {PayoffKind::square, {}, {}}; }
    static PayoffSpec cosine() { return {PayoffKind::cosine, {}, {}}; }
    static PayoffSpec identity() { return {PayoffKind::identity, {}, {}}; }
    static PayoffSpec tabulated(std::vector<double> xs, std::vector<double> values);
    /// Two-column CSV (x, F(x)), strictly increasing x.
    static PayoffSpec from_csv(const std::string& path);
};

enum class DriftKind { none, linear };

/// Scalar diffusion dy = a(y,t) dt + beta(y,t) dw with a(x,t) = kappa x and
/// constant beta = sigma. The ellipticity floor delta must stay below
/// sigma^2 / 2.
struct DiffusionSpec {
    DriftKind drift_kind = DriftKind::none;
    double kappa = 0.0;
    double sigma = 1.0;
    double y0 = 0.0;
    double delta = 0.25;

    double drift(double x, double t) const;
    double vol(double x, double t) const;
    void validate() const;

    /// Standard deviation of y(T) under the physical measure.
    double terminal_std(double T) const;
};

struct HSolverSpec {
    HMode mode = HMode::analytic;
    Measure measure = Measure::physical;
    int space_nodes = 401; // odd, so y0 sits on a grid node
    int time_steps = 400;
    double gamma = 2.0; // time-grid clustering, same family the simulator uses
    double width_stddevs = 6.0;
};

/// Solution H(x,t) of the backward Cauchy problem
///     dH/dt + b(x,t) d2H/dx2 + a(x,t) dH/dx = 0,   H(x,T) = F(x),
/// with b = beta^2/2. Under the girsanov_q measure the drift term is dropped:
/// H then prices F(y(T)) as if y were a martingale.
class HSolution {
public:
    double value(double x, double t) const;
    double dx(double x, double t) const;

    Measure measure() const { return measure_; }
    HMode mode() const { return mode_; }
    double T() const { return T_; }

    // finite-difference internals (error tables, tests)
    const std::vector<double>& x_grid() const { return xs_; }
    const std::vector<double>& t_grid() const { return ts_; }
    double node_value(int k, int i) const;
    double node_dx(int k, int i) const;

private:
    friend HSolution solve_h(const PayoffSpec&, const DiffusionSpec&, const HSolverSpec&, double T);

    HMode mode_ = HMode::analytic;
    Measure measure_ = Measure::physical;
    double T_ = 1.0;

    // analytic closures
    PayoffKind kind_ = PayoffKind::square;
    double sigma_ = 1.0;

    // finite-difference grids
    std::vector<double> xs_, ts_;
    std::vector<double> h_, hx_; // (time, space) row-major
};

/// Builds H per the solver spec: validated closed forms in analytic mode,
/// Crank-Nicolson on the truncated domain otherwise.
HSolution solve_h(const PayoffSpec& payoff, const DiffusionSpec& diff, const HSolverSpec& spec,
                  double T);

enum class ClaimVariant { linear_terminal, markov_terminal_1d };

/// A terminal claim f together with its mean and martingale-representation
/// kernel. Two variants:
///   linear:  f = c w(T) + d0 with constant kernel c,
///   markov:  f = F(y(T)) with kernel dH/dx(y(t),t) beta(y(t),t).
class Claim {
public:
    static Claim linear(Mat coeff, Vec offset);
    static Claim markov(PayoffSpec payoff, DiffusionSpec diff, HSolverSpec solver, double T);

    ClaimVariant variant() const { return variant_; }
    int value_dim() const;
    int driver_dim() const;
    Measure measure() const;

    /// E f; H(y0, 0) for the markov variant (a Q-expectation in girsanov mode).
    Vec mean() const;

    /// Representation kernel at (t, state). The state is w(t) for linear
    /// claims (unused) and y(t) for markov claims. In girsanov mode the
    /// returned dH/dx is meant to multiply dy rather than dw.
    Mat kf_at(double t, const Vec& state) const;

    /// E[k_f(t) k_f(t)^T], analytic for the built-in payoffs and a Monte
    /// Carlo pre-pass table for tabulated ones.
    Mat second_moment(double t) const;

    /// Monte Carlo estimate of sup over a grid of t in [tau, T) of E|k_f(t)|^2.
    double kf_condition_check(double tau, int samples) const;

    // markov accessors
    const DiffusionSpec& diffusion() const;
    const HSolution& h() const;
    const PayoffSpec& payoff() const;
    double terminal_value(double y) const;
    double T() const;

    // linear accessors
    const Mat& coeff() const;
    const Vec& offset() const;

private:
    Claim() = default;

    ClaimVariant variant_ = ClaimVariant::linear_terminal;
    Mat coeff_;
    Vec offset_;

    PayoffSpec payoff_;
    DiffusionSpec diff_;
    HSolverSpec solver_;
    double T_ = 1.0;
    std::shared_ptr<const HSolution> h_;

    // second-moment pre-pass for tabulated payoffs
    std::vector<double> sm_ts_, sm_values_;
    void build_second_moment_table();
};

} // namespace exactrep

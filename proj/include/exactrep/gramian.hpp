#pragma once

#include "exactrep/linalg.hpp"
#include "exactrep/system.hpp"
#include "exactrep/weight.hpp"

#include <vector>

namespace exactrep {

namespace detail {

/// Fritsch-Carlson shape-preserving cubic through (x, y) samples.
struct Pchip {
    std::vector<double> x, y, d;
    double eval(double xq) const;
};

Pchip make_pchip(std::vector<double> xs, std::vector<double> ys);

} // namespace detail

/// Kernel Q(t) = e^{A(T-t)} b Gamma(t)^{-1} b^T e^{A^T(T-t)} with
/// Gamma(t) = g(t) G. Symmetric positive definite for t < T and blows up
/// like (T-t)^{-alpha} as t -> T.
Mat q_kernel(const SystemSpec& sys, const WeightSpec& w, const GMatrix& g, double t);

enum class GramianEval {
    automatic, ///< closed form when available (scalar, A = 0, pure power), else tabulated
    tabulated  ///< force quadrature + interpolation even when a closed form exists
};

struct Lemma1Diagnostic {
    double integral_value; ///< \int_tau^T ||R(t)^{-1}||_F^2 dt
    double bound_constant; ///< smallest C with ||R(t)^{-1}||_F <= C (1-alpha) (T-t)^{alpha-1}
};

/// Controllability-style Gramian R(s) = \int_s^T Q(t) dt tabulated on a grid
/// clustered at T. The integrable endpoint singularity of Q is removed by the
/// substitution t = T - v^{1/(1-alpha)}: in the v variable the pure-power
/// integrand is polynomially smooth. Node values are accumulated backward
/// from R(T) = 0 so panel sums are additive by construction.
class GramianTable {
public:
    static GramianTable build(const SystemSpec& sys, const WeightSpec& w, const GMatrix& g,
                              int nodes, GramianEval eval = GramianEval::automatic);

    /// R(t) for t in [0, T]; R(T) is the zero matrix.
    Mat value(double t) const;

    /// R(t)^{-1} for t in [0, T). R(T) is singular, so t >= T is a domain error.
    Mat inverse(double t) const;

    /// Same evaluations keyed by the distance s = T - t. Quadrature on the
    /// singular tail carries the distance exactly where T - t would cancel.
    Mat value_at_distance(double dist) const;
    Mat inverse_at_distance(double dist) const;

    double T() const { return T_; }
    double alpha() const { return alpha_; }
    int dim() const { return dim_; }
    bool analytic() const { return analytic_; }

    const std::vector<double>& grid() const { return t_nodes_; }
    const std::vector<Mat>& node_values() const { return r_nodes_; }

    /// Integrates ||R(t)^{-1}||_F^2 over [tau, T] by dyadic shells toward T
    /// with a geometric-tail completion, and reports the smallest empirical
    /// constant in the inverse growth bound. Throws divergence_error when the
    /// shell contributions fail to decay (alpha <= 0.5 territory).
    Lemma1Diagnostic lemma1_diagnostic(double tau) const;

private:
    GramianTable() = default;

    Mat interpolated(double t) const;

    double T_ = 0.0;
    double alpha_ = 0.0;
    double tail_start_ = 0.0; // weight plateau boundary; 0 for pure power
    int dim_ = 0;
    bool analytic_ = false;
    double analytic_coef_ = 0.0; // R(t) = coef * (T-t)^{1-alpha} in analytic mode

    std::vector<double> t_nodes_;
    std::vector<Mat> r_nodes_;
    int head_count_ = 0; // nodes 0..head_count_ lie in the plateau zone

    // Per-entry monotone cubic interpolants; head zone keyed by t, tail zone
    // keyed by v = (T-t)^{1-alpha}.
    std::vector<detail::Pchip> head_splines_; // dim*dim entries, empty for pure power
    std::vector<detail::Pchip> tail_splines_;
};

} // namespace exactrep

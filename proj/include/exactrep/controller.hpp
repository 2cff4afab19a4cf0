#pragma once

#include "exactrep/claims.hpp"
#include "exactrep/gramian.hpp"
#include "exactrep/linalg.hpp"
#include "exactrep/system.hpp"
#include "exactrep/weight.hpp"

#include <functional>
#include <memory>

namespace exactrep {

/// The explicit optimal law: u(t) = Gamma(t)^{-1} b^T e^{A^T(T-t)} mu(t),
/// where mu is the martingale started at mu_bar = R(0)^{-1}(E f - e^{AT} a)
/// and driven by R(t)^{-1} k_f(t) dw(t). Immutable shared state; per-path mu
/// lives with the simulator.
class ControlLaw {
public:
    ControlLaw(SystemSpec sys, WeightSpec weight, GMatrix gmatrix,
               std::shared_ptr<const GramianTable> gramian, std::shared_ptr<const Claim> claim);

    const SystemSpec& system() const { return sys_; }
    const WeightSpec& weight() const { return weight_; }
    const GMatrix& gmatrix() const { return gmatrix_; }
    const GramianTable& gramian() const { return *gramian_; }
    const Claim& claim() const { return *claim_; }

    /// e^{AT} a, the control-free terminal point.
    const Vec& q() const { return q_; }

    const Vec& mu_bar() const { return mu_bar_; }

    /// Costate e^{A^T(T-t)} mu for t in [0, T].
    Vec adjoint_psi(double t, const Vec& mu) const;

    /// Control value g(t)^{-1} G^{-1} b^T psi(t); the weight degenerates at T,
    /// so t >= T is a domain error.
    Vec u_value(double t, const Vec& mu) const;

    struct CostBreakdown {
        double mean_term = 0.0;   // (Ef - q)' R(0)^{-1} (Ef - q)
        double kernel_term = 0.0; // \int_0^T tr(R(t)^{-1} E[k_f k_f']) dt
        double total() const { return mean_term + kernel_term; }
    };

    /// Optimal value of E \int u' Gamma u dt:
    ///   (Ef - q)' R(0)^{-1} (Ef - q) + \int_0^T tr(R(t)^{-1} E[k_f k_f']) dt,
    /// with the singular tail integrated in the substituted variable.
    double closed_form_cost() const;

    /// Same, with a caller-supplied kernel second-moment function.
    double closed_form_cost(const std::function<Mat(double)>& kf_second_moment) const;

    CostBreakdown closed_form_cost_parts() const;

private:
    SystemSpec sys_;
    WeightSpec weight_;
    GMatrix gmatrix_;
    std::shared_ptr<const GramianTable> gramian_;
    std::shared_ptr<const Claim> claim_;
    Vec q_;
    Vec mu_bar_;
};

} // namespace exactrep

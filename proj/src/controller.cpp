#include "exactrep/controller.hpp"

#include "exactrep/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace exactrep {

ControlLaw::ControlLaw(SystemSpec sys, WeightSpec weight, GMatrix gmatrix,
                       std::shared_ptr<const GramianTable> gramian,
                       std::shared_ptr<const Claim> claim)
    : sys_(std::move(sys)),
      weight_(std::move(weight)),
      gmatrix_(std::move(gmatrix)),
      gramian_(std::move(gramian)),
      claim_(std::move(claim)) {
    if (!gramian_ || !claim_) throw std::invalid_argument("control law needs a gramian table and a claim");
    const int n = sys_.dim();
    if (gmatrix_.dim() != n || gramian_->dim() != n || claim_->value_dim() != n)
        throw std::invalid_argument("control law component dimensions disagree");
    if (sys_.T != weight_.T() || sys_.T != gramian_->T())
        throw std::invalid_argument("control law components span different horizons");
    if (claim_->variant() == ClaimVariant::markov_terminal_1d && claim_->T() != sys_.T)
        throw std::invalid_argument("claim horizon differs from the system horizon");

    q_ = mat_exp(sys_.A, sys_.T) * sys_.a;
    mu_bar_ = spd_solve(gramian_->value(0.0), claim_->mean() - q_);
}

Vec ControlLaw::adjoint_psi(double t, const Vec& mu) const {
    if (!(t >= 0.0 && t <= sys_.T)) throw std::domain_error("adjoint defined on [0, T]");
    return mat_exp(sys_.A.transpose(), sys_.T - t) * mu;
}

Vec ControlLaw::u_value(double t, const Vec& mu) const {
    if (!(t >= 0.0 && t < sys_.T)) throw std::domain_error("control defined on [0, T); Gamma degenerates at T");
    Vec u = gmatrix_.g_inv() * (sys_.b.transpose() * adjoint_psi(t, mu));
    u *= weight_.inverse_value(t);
    return u;
}

double ControlLaw::closed_form_cost() const {
    return closed_form_cost_parts().total();
}

double ControlLaw::closed_form_cost(const std::function<Mat(double)>& kf_second_moment) const {
    const Vec diff = claim_->mean() - q_;
    const double mean_term = dot(diff, spd_solve(gramian_->value(0.0), diff));

    // ||R(t)^{-1}|| grows like (T-t)^{alpha-1}; the plateau head (if any) is
    // smooth and the power tail goes through the substituted quadrature with
    // the distance to T carried exactly.
    const double split = weight_.tail_start();
    double kernel_term = 0.0;
    if (split > 0.0)
        kernel_term += quad::integrate(
            [&](double t) { return (gramian_->inverse(t) * kf_second_moment(t)).trace(); }, 0.0,
            split, 1e-11);
    kernel_term += quad::integrate_power_tail(
        [&](double t, double dist) {
            return (gramian_->inverse_at_distance(dist) * kf_second_moment(t)).trace();
        },
        split, sys_.T, 1.0 - weight_.alpha(), 1e-11);
    return mean_term + kernel_term;
}

ControlLaw::CostBreakdown ControlLaw::closed_form_cost_parts() const {
    const Vec diff = claim_->mean() - q_;
    CostBreakdown parts;
    parts.mean_term = dot(diff, spd_solve(gramian_->value(0.0), diff));
    parts.kernel_term = closed_form_cost([this](double t) { return claim_->second_moment(t); }) - parts.mean_term;
    return parts;
}

} // namespace exactrep

#include "exactrep/weight.hpp"

#include <cmath>
#include <stdexcept>

namespace exactrep {

WeightSpec WeightSpec::pure_power(double alpha, double c, double T) {
    WeightSpec w(WeightForm::pure_power, alpha, 0.0, c, T);
    w.validate();
    return w;
}

WeightSpec WeightSpec::plateau(double alpha, double tau, double c, double T) {
    WeightSpec w(WeightForm::plateau, alpha, tau, c, T);
    w.validate();
    return w;
}

WeightSpec WeightSpec::unchecked(WeightForm form, double alpha, double tau, double c, double T) {
    return WeightSpec(form, alpha, tau, c, T);
}

double WeightSpec::tail_start() const {
    return form_ == WeightForm::plateau ? T_ - tau_ : 0.0;
}

double WeightSpec::value(double t) const {
    if (!(t >= 0.0 && t < T_)) throw std::domain_error("weight defined on [0, T) only");
    if (form_ == WeightForm::plateau && t < T_ - tau_) return 1.0;
    return std::pow(T_ - t, alpha_);
}

double WeightSpec::inverse_value(double t) const {
    if (!(t >= 0.0 && t < T_)) throw std::domain_error("weight defined on [0, T) only");
    if (form_ == WeightForm::plateau && t < T_ - tau_) return 1.0;
    return std::pow(T_ - t, -alpha_);
}

void WeightSpec::validate() const {
    if (!(T_ > 0.0) || !std::isfinite(T_)) throw std::invalid_argument("weight horizon T must be positive");
    if (!(alpha_ > 0.5 && alpha_ < 1.0))
        throw std::invalid_argument("weight exponent alpha must lie strictly inside (0.5, 1)");
    if (!(c_ > 0.0) || !std::isfinite(c_)) throw std::invalid_argument("weight envelope constant c must be positive");
    if (form_ == WeightForm::plateau && !(tau_ > 0.0 && tau_ < T_))
        throw std::invalid_argument("plateau threshold tau must lie in (0, T)");

    // Spot-check the two envelopes on a dense grid; g is config-defined, so
    // the constant c is verified numerically rather than symbolically.
    constexpr int kGridPoints = 10000;
    for (int i = 0; i < kGridPoints; ++i) {
        const double t = T_ * static_cast<double>(i) / kGridPoints;
        const double g = form_ == WeightForm::plateau && t < T_ - tau_ ? 1.0 : std::pow(T_ - t, alpha_);
        const double envelope = c_ * std::pow(T_ - t, alpha_);
        if (!(g > 0.0) || g > envelope * (1.0 + 1e-12))
            throw std::invalid_argument("weight violates the upper envelope c (T-t)^alpha");
        const double inv_envelope = c_ * (1.0 + std::pow(T_ - t, -alpha_));
        if (1.0 / g > inv_envelope * (1.0 + 1e-12))
            throw std::invalid_argument("weight inverse violates the envelope c (1 + (T-t)^{-alpha})");
    }
}

GMatrix::GMatrix(Mat g) : g_(std::move(g)), g_inv_(spd_inverse(g_)) {}

} // namespace exactrep

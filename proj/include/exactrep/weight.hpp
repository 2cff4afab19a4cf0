#pragma once

#include "exactrep/linalg.hpp"

namespace exactrep {

enum class WeightForm { pure_power, plateau };

/// The scalar cost weight g(t) on [0, T). It vanishes at T like (T-t)^alpha
/// with alpha in (0.5, 1), pinned between the envelopes
///     0 < g(t) <= c (T-t)^alpha,   1/g(t) <= c (1 + (T-t)^{-alpha}).
/// Two shapes: a pure power over the whole horizon, or a plateau equal to 1
/// until T - tau and the power from there on.
class WeightSpec {
public:
    static WeightSpec pure_power(double alpha, double c, double T);
    static WeightSpec plateau(double alpha, double tau, double c, double T);

    /// Skips every admissibility check. Exists so negative tests can push an
    /// inadmissible exponent through the Gramian pipeline.
    static WeightSpec unchecked(WeightForm form, double alpha, double tau, double c, double T);

    double value(double t) const;
    double inverse_value(double t) const;

    WeightForm form() const { return form_; }
    double alpha() const { return alpha_; }
    double tau() const { return tau_; }
    double c() const { return c_; }
    double T() const { return T_; }

    /// Start of the power-decay zone: 0 for pure power, T - tau for plateau.
    double tail_start() const;

private:
    WeightSpec(WeightForm form, double alpha, double tau, double c, double T)
        : form_(form), alpha_(alpha), tau_(tau), c_(c), T_(T) {}
    void validate() const;

    WeightForm form_;
    double alpha_;
    double tau_;
    double c_;
    double T_;
};

/// Constant SPD weight matrix G with its inverse cached; the matrix part of
/// the cost weight Gamma(t) = g(t) G.
class GMatrix {
public:
    explicit GMatrix(Mat g);

    const Mat& g() const { return g_; }
    const Mat& g_inv() const { return g_inv_; }
    int dim() const { return g_.rows(); }

private:
    Mat g_;
    Mat g_inv_;
};

} // namespace exactrep

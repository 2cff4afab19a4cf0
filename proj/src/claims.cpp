#include "exactrep/claims.hpp"

#include "exactrep/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace exactrep {

Claim Claim::linear(Mat coeff, Vec offset) {
    if (coeff.rows() < 1 || coeff.cols() < 1) throw std::invalid_argument("linear claim needs a coefficient matrix");
    if (!coeff.is_finite() || !offset.is_finite()) throw std::invalid_argument("linear claim entries must be finite");
    if (offset.size() != coeff.rows()) throw std::invalid_argument("linear claim offset dimension mismatch");
    Claim c;
    c.variant_ = ClaimVariant::linear_terminal;
    c.coeff_ = std::move(coeff);
    c.offset_ = std::move(offset);
    return c;
}

Claim Claim::markov(PayoffSpec payoff, DiffusionSpec diff, HSolverSpec solver, double T) {
    diff.validate();
    if ((payoff.kind == PayoffKind::square || payoff.kind == PayoffKind::cosine) &&
        diff.drift_kind != DriftKind::none)
        throw std::invalid_argument("square/cosine markov claims are supported with zero drift only");
    Claim c;
    c.variant_ = ClaimVariant::markov_terminal_1d;
    c.payoff_ = std::move(payoff);
    c.diff_ = diff;
    c.solver_ = solver;
    c.T_ = T;
    c.h_ = std::make_shared<const HSolution>(solve_h(c.payoff_, c.diff_, c.solver_, T));
    if (c.payoff_.kind == PayoffKind::tabulated) c.build_second_moment_table();
    return c;
}

int Claim::value_dim() const {
    return variant_ == ClaimVariant::linear_terminal ? coeff_.rows() : 1;
}

int Claim::driver_dim() const {
    return variant_ == ClaimVariant::linear_terminal ? coeff_.cols() : 1;
}

Measure Claim::measure() const {
    return variant_ == ClaimVariant::linear_terminal ? Measure::physical : solver_.measure;
}

Vec Claim::mean() const {
    if (variant_ == ClaimVariant::linear_terminal) return offset_;
    Vec m(1);
    m[0] = h_->value(diff_.y0, 0.0);
    return m;
}

Mat Claim::kf_at(double t, const Vec& state) const {
    if (variant_ == ClaimVariant::linear_terminal) {
        if (!(t >= 0.0) || !std::isfinite(t)) throw std::domain_error("kernel time must be finite and nonnegative");
        return coeff_;
    }
    if (!(t >= 0.0 && t < T_)) throw std::domain_error("kernel defined on [0, T) only");
    if (state.size() != 1) throw std::invalid_argument("markov claim state is scalar");
    Mat k(1, 1);
    const double slope = h_->dx(state[0], t);
    k(0, 0) = solver_.measure == Measure::girsanov_q ? slope : slope * diff_.vol(state[0], t);
    return k;
}

Mat Claim::second_moment(double t) const {
    if (variant_ == ClaimVariant::linear_terminal) return coeff_ * coeff_.transpose();
    Mat m(1, 1);
    const double s2 = diff_.sigma * diff_.sigma;
    switch (payoff_.kind) {
        case PayoffKind::square:
            // k = 2 sigma y_t with y_t ~ N(y0, sigma^2 t)
            m(0, 0) = 4.0 * s2 * (diff_.y0 * diff_.y0 + s2 * t);
            return m;
        case PayoffKind::cosine:
            // k = -sigma e^{-sigma^2 (T-t)/2} sin y_t
            m(0, 0) = s2 * std::exp(-s2 * (T_ - t)) *
                      0.5 * (1.0 - std::cos(2.0 * diff_.y0) * std::exp(-2.0 * s2 * t));
            return m;
        case PayoffKind::identity:
            if (solver_.measure == Measure::physical && diff_.drift_kind == DriftKind::linear)
                m(0, 0) = s2 * std::exp(2.0 * diff_.kappa * (T_ - t));
            else
                m(0, 0) = s2;
            return m;
        case PayoffKind::tabulated: {
            // pre-pass Monte Carlo table, linear in t
            const auto& ts = sm_ts_;
            const auto it = std::upper_bound(ts.begin(), ts.end(), t);
            std::size_t i = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
            i = std::min(i, ts.size() - 2);
            const double w = std::clamp((t - ts[i]) / (ts[i + 1] - ts[i]), 0.0, 1.0);
            m(0, 0) = sm_values_[i] * (1.0 - w) + sm_values_[i + 1] * w;
            return m;
        }
    }
    throw std::logic_error("unreachable payoff kind");
}

namespace {

// Simulates markov claim paths on a refined grid that hits every diagnostic
// node exactly, accumulating E|k_f|^2 there.
std::vector<double> kernel_second_moment_mc(const Claim& claim, const std::vector<double>& probe_ts,
                                            int samples, bool driftless, std::uint64_t seed) {
    const auto& diff = claim.diffusion();
    const double T = claim.T();
    // union of probe nodes and a uniform refinement
    std::vector<double> steps;
    const int base = 512;
    for (int i = 0; i <= base; ++i) steps.push_back(T * static_cast<double>(i) / base);
    steps.insert(steps.end(), probe_ts.begin(), probe_ts.end());
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());

    const bool fd = claim.h().mode() == HMode::finite_difference;
    const double x_lo = fd ? claim.h().x_grid().front() : 0.0;
    const double x_hi = fd ? claim.h().x_grid().back() : 0.0;

    std::vector<double> acc(probe_ts.size(), 0.0);
    for (int s = 0; s < samples; ++s) {
        RngStream rng(seed, static_cast<std::uint64_t>(s));
        double y = diff.y0;
        std::size_t probe = 0;
        for (std::size_t k = 0; k + 1 <= steps.size(); ++k) {
            const double t = steps[k];
            while (probe < probe_ts.size() && probe_ts[probe] == t) {
                // rare excursions past the tabulated domain are clamped here;
                // this is a diagnostic, not the replication path
                Vec state{fd ? std::clamp(y, x_lo, x_hi) : y};
                const Mat kf = claim.kf_at(t, state);
                acc[probe] += kf.frobenius_norm() * kf.frobenius_norm();
                ++probe;
            }
            if (k + 1 == steps.size()) break;
            const double dt = steps[k + 1] - steps[k];
            const double dw = std::sqrt(dt) * rng.normal();
            const double a = driftless ? 0.0 : diff.drift(y, t);
            y += a * dt + diff.vol(y, t) * dw;
        }
    }
    for (double& v : acc) v /= samples;
    return acc;
}

} // namespace

double Claim::kf_condition_check(double tau, int samples) const {
    if (variant_ == ClaimVariant::linear_terminal) {
        const double f = coeff_.frobenius_norm();
        return f * f;
    }
    if (!(tau > 0.0 && tau < T_)) throw std::invalid_argument("tau must lie in (0, T)");
    if (samples < 100) throw std::invalid_argument("kf_condition_check needs >= 100 samples");
    constexpr int kProbes = 32;
    std::vector<double> probes;
    for (int i = 0; i <= kProbes; ++i) {
        double t = tau + (T_ - tau) * static_cast<double>(i) / kProbes;
        t = std::min(t, T_ * (1.0 - 1e-9));
        probes.push_back(t);
    }
    std::sort(probes.begin(), probes.end());
    probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
    const auto est = kernel_second_moment_mc(*this, probes, samples, /*driftless=*/false,
                                             0x6b66636865636bULL);
    return *std::max_element(est.begin(), est.end());
}

void Claim::build_second_moment_table() {
    constexpr int kNodes = 64;
    sm_ts_.clear();
    for (int i = 0; i <= kNodes; ++i) {
        double t = T_ * static_cast<double>(i) / kNodes;
        if (i == kNodes) t = T_ * (1.0 - 1e-9);
        sm_ts_.push_back(t);
    }
    const bool driftless = solver_.measure == Measure::girsanov_q;
    sm_values_ = kernel_second_moment_mc(*this, sm_ts_, 100000, driftless, 0x736d5f7461626cULL);
}

const DiffusionSpec& Claim::diffusion() const {
    if (variant_ != ClaimVariant::markov_terminal_1d) throw std::logic_error("linear claims have no diffusion");
    return diff_;
}

const HSolution& Claim::h() const {
    if (variant_ != ClaimVariant::markov_terminal_1d) throw std::logic_error("linear claims have no PDE solution");
    return *h_;
}

const PayoffSpec& Claim::payoff() const {
    if (variant_ != ClaimVariant::markov_terminal_1d) throw std::logic_error("linear claims have no payoff");
    return payoff_;
}

double Claim::terminal_value(double y) const {
    if (variant_ != ClaimVariant::markov_terminal_1d) throw std::logic_error("linear claims have no payoff");
    return payoff_(y);
}

double Claim::T() const {
    if (variant_ != ClaimVariant::markov_terminal_1d) throw std::logic_error("linear claims carry no horizon");
    return T_;
}

const Mat& Claim::coeff() const {
    if (variant_ != ClaimVariant::linear_terminal) throw std::logic_error("markov claims have no linear coefficients");
    return coeff_;
}

const Vec& Claim::offset() const {
    if (variant_ != ClaimVariant::linear_terminal) throw std::logic_error("markov claims have no linear offset");
    return offset_;
}

} // namespace exactrep

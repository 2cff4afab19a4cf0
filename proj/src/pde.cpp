#include "exactrep/claims.hpp"

#include "exactrep/errors.hpp"
#include "exactrep/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace exactrep {

double PayoffSpec::operator()(double x) const {
    switch (kind) {
        case PayoffKind::square: return x * x;
        case PayoffKind::cosine: return std::cos(x);
        case PayoffKind::identity: return x;
        case PayoffKind::tabulated: break;
    }
    // tabulated: piecewise linear, extrapolated with the end slopes
    const auto& a = xs;
    const auto& v = values;
    const std::size_t n = a.size();
    if (x <= a.front()) {
        const double s = (v[1] - v[0]) / (a[1] - a[0]);
        return v[0] + s * (x - a[0]);
    }
    if (x >= a.back()) {
        const double s = (v[n - 1] - v[n - 2]) / (a[n - 1] - a[n - 2]);
        return v[n - 1] + s * (x - a[n - 1]);
    }
    const auto it = std::upper_bound(a.begin(), a.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - a.begin()) - 1;
    const double w = (x - a[i]) / (a[i + 1] - a[i]);
    return v[i] + w * (v[i + 1] - v[i]);
}

PayoffSpec PayoffSpec::tabulated(std::vector<double> xs, std::vector<double> values) {
    if (xs.size() < 2 || xs.size() != values.size())
        throw std::invalid_argument("tabulated payoff needs >= 2 matching (x, F) pairs");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw std::invalid_argument("tabulated payoff abscissae must be strictly increasing");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("tabulated payoff values must be finite");
    PayoffSpec p;
    p.kind = PayoffKind::tabulated;
    p.xs = std::move(xs);
    p.values = std::move(values);
    return p;
}

PayoffSpec PayoffSpec::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open payoff file: " + path);
    std::vector<double> xs, vals;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double x, v;
        if (!(row >> x >> v)) {
            if (first) { // tolerate a header line
                first = false;
                continue;
            }
            throw std::runtime_error("malformed payoff row in " + path + ": " + line);
        }
        first = false;
        xs.push_back(x);
        vals.push_back(v);
    }
    return tabulated(std::move(xs), std::move(vals));
}

double DiffusionSpec::drift(double x, double) const {
    return drift_kind == DriftKind::linear ? kappa * x : 0.0;
}

double DiffusionSpec::vol(double, double) const { return sigma; }

void DiffusionSpec::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("diffusion needs sigma > 0");
    if (!(delta > 0.0)) throw std::invalid_argument("ellipticity floor delta must be positive");
    if (!(0.5 * sigma * sigma >= delta))
        throw std::invalid_argument("diffusion violates its ellipticity floor: beta^2/2 < delta");
    if (!std::isfinite(kappa) || !std::isfinite(y0)) throw std::invalid_argument("diffusion parameters must be finite");
}

double DiffusionSpec::terminal_std(double T) const {
    if (drift_kind == DriftKind::linear && kappa != 0.0)
        return sigma * std::sqrt((std::exp(2.0 * kappa * T) - 1.0) / (2.0 * kappa));
    return sigma * std::sqrt(T);
}

namespace {

int locate(const std::vector<double>& grid, double x) {
    // index i with grid[i] <= x <= grid[i+1], clamped to valid brackets
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    int i = static_cast<int>(it - grid.begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(grid.size()) - 2);
    return i;
}

} // namespace

double HSolution::node_value(int k, int i) const {
    return h_[static_cast<std::size_t>(k) * xs_.size() + static_cast<std::size_t>(i)];
}

double HSolution::node_dx(int k, int i) const {
    return hx_[static_cast<std::size_t>(k) * xs_.size() + static_cast<std::size_t>(i)];
}

double HSolution::value(double x, double t) const {
    if (mode_ == HMode::analytic) {
        switch (kind_) {
            case PayoffKind::square: return x * x + sigma_ * sigma_ * (T_ - t);
            case PayoffKind::cosine: return std::exp(-0.5 * sigma_ * sigma_ * (T_ - t)) * std::cos(x);
            case PayoffKind::identity: return x;
            case PayoffKind::tabulated: break;
        }
        throw std::logic_error("analytic H has no closed form for this payoff");
    }
    if (!(t >= -1e-9 && t <= T_ * (1.0 + 1e-12) + 1e-12)) throw std::domain_error("H(x,t) defined on [0, T]");
    if (x < xs_.front() || x > xs_.back())
        throw extrapolation_error("state left the tabulated PDE domain");
    const double tc = std::clamp(t, 0.0, T_);
    const int k = locate(ts_, tc);
    const int i = locate(xs_, x);
    const double wt = (tc - ts_[static_cast<std::size_t>(k)]) /
                      (ts_[static_cast<std::size_t>(k) + 1] - ts_[static_cast<std::size_t>(k)]);
    const double wx = (x - xs_[static_cast<std::size_t>(i)]) /
                      (xs_[static_cast<std::size_t>(i) + 1] - xs_[static_cast<std::size_t>(i)]);
    const double lo = node_value(k, i) * (1.0 - wx) + node_value(k, i + 1) * wx;
    const double hi = node_value(k + 1, i) * (1.0 - wx) + node_value(k + 1, i + 1) * wx;
    return lo * (1.0 - wt) + hi * wt;
}

double HSolution::dx(double x, double t) const {
    if (mode_ == HMode::analytic) {
        switch (kind_) {
            case PayoffKind::square: return 2.0 * x;
            case PayoffKind::cosine: return -std::exp(-0.5 * sigma_ * sigma_ * (T_ - t)) * std::sin(x);
            case PayoffKind::identity: return 1.0;
            case PayoffKind::tabulated: break;
        }
        throw std::logic_error("analytic H has no closed form for this payoff");
    }
    if (!(t >= -1e-9 && t <= T_ * (1.0 + 1e-12) + 1e-12)) throw std::domain_error("H(x,t) defined on [0, T]");
    if (x < xs_.front() || x > xs_.back())
        throw extrapolation_error("state left the tabulated PDE domain");
    const double tc = std::clamp(t, 0.0, T_);
    const int k = locate(ts_, tc);
    const int i = locate(xs_, x);
    const double wt = (tc - ts_[static_cast<std::size_t>(k)]) /
                      (ts_[static_cast<std::size_t>(k) + 1] - ts_[static_cast<std::size_t>(k)]);
    const double wx = (x - xs_[static_cast<std::size_t>(i)]) /
                      (xs_[static_cast<std::size_t>(i) + 1] - xs_[static_cast<std::size_t>(i)]);
    const double lo = node_dx(k, i) * (1.0 - wx) + node_dx(k, i + 1) * wx;
    const double hi = node_dx(k + 1, i) * (1.0 - wx) + node_dx(k + 1, i + 1) * wx;
    return lo * (1.0 - wt) + hi * wt;
}

namespace {

void thomas_solve(std::vector<double>& sub, std::vector<double>& diag, std::vector<double>& sup,
                  std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

void check_analytic_supported(const PayoffSpec& payoff, const DiffusionSpec& diff, Measure measure) {
    if (payoff.kind == PayoffKind::tabulated)
        throw std::invalid_argument("tabulated payoffs have no analytic H; use finite differences");
    if ((payoff.kind == PayoffKind::square || payoff.kind == PayoffKind::cosine) &&
        diff.drift_kind != DriftKind::none)
        throw std::invalid_argument("analytic H for this payoff requires zero drift");
    if (payoff.kind == PayoffKind::identity && measure != Measure::girsanov_q &&
        diff.drift_kind != DriftKind::none)
        throw std::invalid_argument("analytic identity H under drift requires the girsanov-q measure");
}

} // namespace

HSolution solve_h(const PayoffSpec& payoff, const DiffusionSpec& diff, const HSolverSpec& spec,
                  double T) {
    diff.validate();
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("PDE horizon T must be positive");
    if (spec.mode == HMode::analytic) {
        check_analytic_supported(payoff, diff, spec.measure);
        HSolution h;
        h.mode_ = HMode::analytic;
        h.measure_ = spec.measure;
        h.T_ = T;
        h.kind_ = payoff.kind;
        h.sigma_ = diff.sigma;
        return h;
    }

    if (spec.space_nodes < 5 || spec.space_nodes % 2 == 0)
        throw std::invalid_argument("space_nodes must be odd and >= 5 so y0 is a grid node");
    if (spec.time_steps < 2) throw std::invalid_argument("time_steps must be >= 2");
    if (spec.width_stddevs < 6.0)
        throw std::invalid_argument("spatial domain must span at least 6 standard deviations of y(T)");

    const double half_width = spec.width_stddevs * std::max(diff.terminal_std(T), 1e-8);
    const int J = spec.space_nodes - 1;
    const double dx = 2.0 * half_width / J;

    HSolution h;
    h.mode_ = HMode::finite_difference;
    h.measure_ = spec.measure;
    h.T_ = T;
    h.xs_.resize(static_cast<std::size_t>(J) + 1);
    for (int i = 0; i <= J; ++i) h.xs_[static_cast<std::size_t>(i)] = diff.y0 - half_width + i * dx;
    h.xs_[static_cast<std::size_t>(J / 2)] = diff.y0; // exact center node

    const TimeGrid tg = TimeGrid::build(T, spec.time_steps, spec.gamma);
    h.ts_ = tg.nodes;
    const int K = spec.time_steps;

    // Cell-Peclet guard: centered advection differencing must stay resolved.
    {
        double max_adv = 0.0, min_b = 1e300;
        for (int i = 0; i <= J; ++i) {
            const double x = h.xs_[static_cast<std::size_t>(i)];
            if (spec.measure == Measure::physical)
                max_adv = std::max(max_adv, std::fabs(diff.drift(x, 0.0)));
            min_b = std::min(min_b, 0.5 * diff.vol(x, 0.0) * diff.vol(x, 0.0));
        }
        if (max_adv * dx > 2.0 * min_b)
            throw grid_error("advection-dominated space grid; refine space_nodes");
    }

    h.h_.assign(static_cast<std::size_t>(K + 1) * (static_cast<std::size_t>(J) + 1), 0.0);
    auto H = [&](int k, int i) -> double& {
        return h.h_[static_cast<std::size_t>(k) * (static_cast<std::size_t>(J) + 1) + static_cast<std::size_t>(i)];
    };
    for (int i = 0; i <= J; ++i) H(K, i) = payoff(h.xs_[static_cast<std::size_t>(i)]);
    const double bc_lo = H(K, 0), bc_hi = H(K, J); // Dirichlet H = F at the truncation

    std::vector<double> sub(static_cast<std::size_t>(J) - 1), dia(static_cast<std::size_t>(J) - 1),
        sup(static_cast<std::size_t>(J) - 1), rhs(static_cast<std::size_t>(J) - 1);

    for (int k = K - 1; k >= 0; --k) {
        const double dt = h.ts_[static_cast<std::size_t>(k) + 1] - h.ts_[static_cast<std::size_t>(k)];
        const double tmid = 0.5 * (h.ts_[static_cast<std::size_t>(k)] + h.ts_[static_cast<std::size_t>(k) + 1]);
        for (int i = 1; i < J; ++i) {
            const double x = h.xs_[static_cast<std::size_t>(i)];
            const double b = 0.5 * diff.vol(x, tmid) * diff.vol(x, tmid);
            const double adv = spec.measure == Measure::physical ? diff.drift(x, tmid) : 0.0;
            const double lam = b / (dx * dx);
            const double mu = adv / (2.0 * dx);
            const std::size_t j = static_cast<std::size_t>(i - 1);
            sub[j] = -0.5 * dt * (lam - mu);
            dia[j] = 1.0 + dt * lam;
            sup[j] = -0.5 * dt * (lam + mu);
            const double lh = lam * (H(k + 1, i + 1) - 2.0 * H(k + 1, i) + H(k + 1, i - 1)) +
                              mu * (H(k + 1, i + 1) - H(k + 1, i - 1));
            rhs[j] = H(k + 1, i) + 0.5 * dt * lh;
        }
        rhs.front() -= sub.front() * bc_lo;
        rhs.back() -= sup.back() * bc_hi;
        thomas_solve(sub, dia, sup, rhs);
        H(k, 0) = bc_lo;
        for (int i = 1; i < J; ++i) H(k, i) = rhs[static_cast<std::size_t>(i - 1)];
        H(k, J) = bc_hi;
    }

    // dH/dx by central differences, one-sided second order at the edges
    h.hx_.assign(h.h_.size(), 0.0);
    for (int k = 0; k <= K; ++k) {
        auto HX = [&](int i) -> double& {
            return h.hx_[static_cast<std::size_t>(k) * (static_cast<std::size_t>(J) + 1) + static_cast<std::size_t>(i)];
        };
        for (int i = 1; i < J; ++i) HX(i) = (H(k, i + 1) - H(k, i - 1)) / (2.0 * dx);
        HX(0) = (-3.0 * H(k, 0) + 4.0 * H(k, 1) - H(k, 2)) / (2.0 * dx);
        HX(J) = (3.0 * H(k, J) - 4.0 * H(k, J - 1) + H(k, J - 2)) / (2.0 * dx);
    }
    return h;
}

} // namespace exactrep

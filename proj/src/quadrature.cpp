#include "exactrep/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace exactrep::quad {

namespace {

// 16-point Gauss-Legendre abscissae/weights on [-1, 1].
constexpr int kGlOrder = 16;
constexpr double kGlX[kGlOrder / 2] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
constexpr double kGlW[kGlOrder / 2] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

double gl16(const ScalarFn& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < kGlOrder / 2; ++i) {
        const double dx = half * kGlX[i];
        sum += kGlW[i] * (f(mid - dx) + f(mid + dx));
    }
    return sum * half;
}

Mat gl16_mat(const MatrixFn& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    Mat sum;
    bool first = true;
    for (int i = 0; i < kGlOrder / 2; ++i) {
        const double dx = half * kGlX[i];
        Mat term = f(mid - dx) + f(mid + dx);
        term *= kGlW[i];
        if (first) {
            sum = std::move(term);
            first = false;
        } else {
            sum += term;
        }
    }
    sum *= half;
    return sum;
}

void check_interval(double a, double b) {
    if (!(std::isfinite(a) && std::isfinite(b)) || b < a)
        throw std::invalid_argument("bad integration interval");
}

} // namespace

double integrate(const ScalarFn& f, double a, double b, double rel_tol, int max_doublings) {
    check_interval(a, b);
    if (a == b) return 0.0;
    int panels = 1;
    double prev = gl16(f, a, b);
    for (int pass = 0; pass < max_doublings; ++pass) {
        panels *= 2;
        const double h = (b - a) / panels;
        double cur = 0.0;
        for (int i = 0; i < panels; ++i) cur += gl16(f, a + i * h, a + (i + 1) * h);
        if (std::fabs(cur - prev) <= rel_tol * (std::fabs(cur) + 1e-300)) return cur;
        prev = cur;
    }
    return prev;
}

Mat integrate_matrix(const MatrixFn& f, double a, double b, double rel_tol, int max_doublings) {
    check_interval(a, b);
    int panels = 1;
    Mat prev = gl16_mat(f, a, b);
    if (a == b) return Mat::zero(prev.rows(), prev.cols());
    for (int pass = 0; pass < max_doublings; ++pass) {
        panels *= 2;
        const double h = (b - a) / panels;
        Mat cur = Mat::zero(prev.rows(), prev.cols());
        for (int i = 0; i < panels; ++i) cur += gl16_mat(f, a + i * h, a + (i + 1) * h);
        if ((cur - prev).frobenius_norm() <= rel_tol * (cur.frobenius_norm() + 1e-300)) return cur;
        prev = cur;
    }
    return prev;
}

namespace {

// Shared substitution t = T - v^{1/(1-p)}. The distance T - t is kept as
// dist = v^{1/(1-p)} so singular factors never see the cancelled difference.
struct TailMap {
    double T;
    double q; // 1 / (1 - p)
    double dist(double v) const { return std::pow(v, q); }
    double jac(double v) const { return q * std::pow(v, q - 1.0); }
};

} // namespace

double integrate_power_tail(const TailScalarFn& f, double a, double T, double p, double rel_tol) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("power_tail exponent must be in (0,1)");
    check_interval(a, T);
    if (a == T) return 0.0;
    const TailMap map{T, 1.0 / (1.0 - p)};
    const double v_hi = std::pow(T - a, 1.0 - p);
    return integrate(
        [&](double v) {
            const double dist = map.dist(v);
            return f(T - dist, dist) * map.jac(v);
        },
        0.0, v_hi, rel_tol);
}

Mat integrate_matrix_power_tail(const TailMatrixFn& f, double a, double T, double p, double rel_tol) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("power_tail exponent must be in (0,1)");
    check_interval(a, T);
    const TailMap map{T, 1.0 / (1.0 - p)};
    const double v_hi = std::pow(T - a, 1.0 - p);
    return integrate_matrix(
        [&](double v) {
            const double dist = map.dist(v);
            Mat m = f(T - dist, dist);
            m *= map.jac(v);
            return m;
        },
        0.0, v_hi, rel_tol);
}

} // namespace exactrep::quad

#pragma once

#include "exactrep/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace exactrep {

/// The linear plant dx/dt = A x + b u driven from x(0) = a up to time T.
/// b must be non-degenerate: the control has to reach every direction.
struct SystemSpec {
    Mat A;
    Mat b;
    Vec a;
    double T = 1.0;

    int dim() const { return A.rows(); }

    static SystemSpec make(Mat A, Mat b, Vec a, double T) {
        const int n = A.rows();
        if (n < 1 || A.cols() != n) throw std::invalid_argument("A must be square");
        if (b.rows() != n || b.cols() != n) throw std::invalid_argument("b must match the state dimension");
        if (a.size() != n) throw std::invalid_argument("initial state dimension mismatch");
        if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("T must be positive and finite");
        if (!A.is_finite() || !b.is_finite() || !a.is_finite())
            throw std::invalid_argument("system entries must be finite");
        const double det = lu_determinant(b);
        double scale = 1.0 + b.max_abs();
        double scale_n = 1.0;
        for (int i = 0; i < n; ++i) scale_n *= scale;
        if (std::fabs(det) <= 1e-12 * scale_n) throw std::invalid_argument("b must be non-degenerate");
        return SystemSpec{std::move(A), std::move(b), std::move(a), T};
    }
};

} // namespace exactrep

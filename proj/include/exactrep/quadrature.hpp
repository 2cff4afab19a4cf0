#pragma once

#include "exactrep/linalg.hpp"

#include <functional>

namespace exactrep::quad {

using ScalarFn = std::function<double(double)>;
using MatrixFn = std::function<Mat(double)>;

/// Integrands on a singular tail receive both the node t and the exact
/// distance T - t. Near T the distance is computed in the substituted
/// variable and stays accurate long after T - t would cancel to zero in
/// double precision; singular factors must be evaluated from it.
using TailScalarFn = std::function<double(double t, double dist)>;
using TailMatrixFn = std::function<Mat(double t, double dist)>;

/// Composite 16-point Gauss-Legendre with panel doubling until two successive
/// refinements agree to rel_tol. Intended for integrands that are smooth on
/// [a, b]; singular endpoints go through the substituted variants below.
double integrate(const ScalarFn& f, double a, double b, double rel_tol = 1e-12,
                 int max_doublings = 12);

Mat integrate_matrix(const MatrixFn& f, double a, double b, double rel_tol = 1e-12,
                     int max_doublings = 12);

/// Integral of f over [a, T] where f(t) ~ (T-t)^{-p} near T with p in (0, 1).
/// The substitution v = (T-t)^{1-p} absorbs the singularity: the transformed
/// integrand f * (T-t)^p is bounded, and exactly polynomially smooth when f
/// is a pure power times an analytic factor.
double integrate_power_tail(const TailScalarFn& f, double a, double T, double p,
                            double rel_tol = 1e-12);

Mat integrate_matrix_power_tail(const TailMatrixFn& f, double a, double T, double p,
                                double rel_tol = 1e-12);

} // namespace exactrep::quad

#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace exactrep {

/// Dense real vector. Dimensions in this project stay small (n <= ~16),
/// so everything is plain contiguous storage with value semantics.
class Vec {
public:
    Vec() = default;
    explicit Vec(int n) : v_(static_cast<std::size_t>(n), 0.0) {}
    Vec(std::initializer_list<double> init) : v_(init) {}

    int size() const { return static_cast<int>(v_.size()); }
    double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }

    double norm() const;
    bool is_finite() const;

    Vec& operator+=(const Vec& o);
    Vec& operator-=(const Vec& o);
    Vec& operator*=(double s);

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator*(Vec a, double s) { return a *= s; }
    friend bool operator==(const Vec&, const Vec&) = default;

    const std::vector<double>& data() const { return v_; }

private:
    std::vector<double> v_;
};

double dot(const Vec& a, const Vec& b);

/// Dense real matrix, row-major.
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols) : rows_(rows), cols_(cols), e_(static_cast<std::size_t>(rows * cols), 0.0) {}
    Mat(std::initializer_list<std::initializer_list<double>> init);

    static Mat identity(int n);
    static Mat zero(int rows, int cols) { return Mat(rows, cols); }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return e_[static_cast<std::size_t>(i * cols_ + j)]; }
    double operator()(int i, int j) const { return e_[static_cast<std::size_t>(i * cols_ + j)]; }

    Mat transpose() const;
    double trace() const;
    double frobenius_norm() const;
    double max_abs() const;
    bool is_finite() const;

    Mat& operator+=(const Mat& o);
    Mat& operator-=(const Mat& o);
    Mat& operator*=(double s);

    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(double s, Mat a) { return a *= s; }
    friend Mat operator*(Mat a, double s) { return a *= s; }
    friend bool operator==(const Mat&, const Mat&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> e_;
};

Mat operator*(const Mat& a, const Mat& b);
Vec operator*(const Mat& a, const Vec& x);

/// out = a x without allocating; out must not alias x.
void mat_vec_into(const Mat& a, const Vec& x, Vec& out);

/// v' m v
double quad_form(const Mat& m, const Vec& v);

/// Matrix exponential e^{M t} by scaling-and-squaring with a 13/13 Pade
/// approximant. Exact (to rounding) for M = 0 and nilpotent M.
Mat mat_exp(const Mat& m, double t);

/// Inverse of a symmetric positive definite matrix via Cholesky.
/// Throws std::invalid_argument on asymmetry, not_positive_definite otherwise.
Mat spd_inverse(const Mat& m);

/// Solve M x = rhs for SPD M.
Vec spd_solve(const Mat& m, const Vec& rhs);

/// Smallest eigenvalue of a symmetric matrix (tridiagonalization + implicit QL).
double min_eigenvalue(const Mat& m);

/// All eigenvalues of a symmetric matrix, ascending.
std::vector<double> symmetric_eigenvalues(const Mat& m);

/// Determinant via LU with partial pivoting; used for non-degeneracy checks.
double lu_determinant(const Mat& m);

bool is_symmetric(const Mat& m, double rel_tol = 1e-10);

} // namespace exactrep

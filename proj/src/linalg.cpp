#include "exactrep/linalg.hpp"

#include "exactrep/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace exactrep {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

} // namespace

double Vec::norm() const {
    double s = 0.0;
    for (double x : v_) s += x * x;
    return std::sqrt(s);
}

bool Vec::is_finite() const {
    for (double x : v_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

Vec& Vec::operator+=(const Vec& o) {
    require(size() == o.size(), "vector size mismatch");
    for (int i = 0; i < size(); ++i) v_[static_cast<std::size_t>(i)] += o[i];
    return *this;
}

Vec& Vec::operator-=(const Vec& o) {
    require(size() == o.size(), "vector size mismatch");
    for (int i = 0; i < size(); ++i) v_[static_cast<std::size_t>(i)] -= o[i];
    return *this;
}

Vec& Vec::operator*=(double s) {
    for (double& x : v_) x *= s;
    return *this;
}

double dot(const Vec& a, const Vec& b) {
    require(a.size() == b.size(), "vector size mismatch");
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = static_cast<int>(init.size());
    cols_ = rows_ > 0 ? static_cast<int>(init.begin()->size()) : 0;
    e_.reserve(static_cast<std::size_t>(rows_ * cols_));
    for (const auto& row : init) {
        require(static_cast<int>(row.size()) == cols_, "ragged matrix initializer");
        e_.insert(e_.end(), row.begin(), row.end());
    }
}

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::transpose() const {
    Mat t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

double Mat::trace() const {
    double s = 0.0;
    for (int i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
    return s;
}

double Mat::frobenius_norm() const {
    double s = 0.0;
    for (double x : e_) s += x * x;
    return std::sqrt(s);
}

double Mat::max_abs() const {
    double m = 0.0;
    for (double x : e_) m = std::max(m, std::fabs(x));
    return m;
}

bool Mat::is_finite() const {
    for (double x : e_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

Mat& Mat::operator+=(const Mat& o) {
    require(rows_ == o.rows_ && cols_ == o.cols_, "matrix shape mismatch");
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] += o.e_[i];
    return *this;
}

Mat& Mat::operator-=(const Mat& o) {
    require(rows_ == o.rows_ && cols_ == o.cols_, "matrix shape mismatch");
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] -= o.e_[i];
    return *this;
}

Mat& Mat::operator*=(double s) {
    for (double& x : e_) x *= s;
    return *this;
}

Mat operator*(const Mat& a, const Mat& b) {
    require(a.cols() == b.rows(), "matrix product shape mismatch");
    Mat c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

Vec operator*(const Mat& a, const Vec& x) {
    require(a.cols() == x.size(), "matrix-vector shape mismatch");
    Vec y(a.rows());
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

void mat_vec_into(const Mat& a, const Vec& x, Vec& out) {
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        out[i] = s;
    }
}

double quad_form(const Mat& m, const Vec& v) {
    double s = 0.0;
    for (int i = 0; i < m.rows(); ++i) {
        double row = 0.0;
        for (int j = 0; j < m.cols(); ++j) row += m(i, j) * v[j];
        s += v[i] * row;
    }
    return s;
}

bool is_symmetric(const Mat& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = 1.0 + m.max_abs();
    for (int i = 0; i < m.rows(); ++i)
        for (int j = i + 1; j < m.cols(); ++j)
            if (std::fabs(m(i, j) - m(j, i)) > rel_tol * scale) return false;
    return true;
}

namespace {

// Gaussian elimination with partial pivoting on an augmented system; solves
// in place and reports the pivot sign/magnitude product for determinants.
struct LuResult {
    Mat lu;
    std::vector<int> perm;
    double det;
};

LuResult lu_factor(const Mat& m) {
    const int n = m.rows();
    LuResult r{m, std::vector<int>(static_cast<std::size_t>(n)), 1.0};
    for (int i = 0; i < n; ++i) r.perm[static_cast<std::size_t>(i)] = i;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::fabs(r.lu(col, col));
        for (int row = col + 1; row < n; ++row) {
            const double v = std::fabs(r.lu(row, col));
            if (v > best) {
                best = v;
                pivot = row;
            }
        }
        if (pivot != col) {
            for (int j = 0; j < n; ++j) std::swap(r.lu(col, j), r.lu(pivot, j));
            std::swap(r.perm[static_cast<std::size_t>(col)], r.perm[static_cast<std::size_t>(pivot)]);
            r.det = -r.det;
        }
        const double d = r.lu(col, col);
        r.det *= d;
        if (d == 0.0) return r; // singular; det = 0
        for (int row = col + 1; row < n; ++row) {
            const double f = r.lu(row, col) / d;
            r.lu(row, col) = f;
            for (int j = col + 1; j < n; ++j) r.lu(row, j) -= f * r.lu(col, j);
        }
    }
    return r;
}

Vec lu_solve(const LuResult& f, const Vec& rhs) {
    const int n = f.lu.rows();
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = rhs[f.perm[static_cast<std::size_t>(i)]];
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
        x[i] /= f.lu(i, i);
    }
    return x;
}

Mat lu_solve_matrix(const LuResult& f, const Mat& rhs) {
    const int n = f.lu.rows();
    Mat x(n, rhs.cols());
    for (int c = 0; c < rhs.cols(); ++c) {
        Vec col(n);
        for (int i = 0; i < n; ++i) col[i] = rhs(i, c);
        Vec sol = lu_solve(f, col);
        for (int i = 0; i < n; ++i) x(i, c) = sol[i];
    }
    return x;
}

} // namespace

double lu_determinant(const Mat& m) {
    require(m.rows() == m.cols(), "determinant needs a square matrix");
    require(m.is_finite(), "determinant needs finite entries");
    return lu_factor(m).det;
}

Mat mat_exp(const Mat& m, double t) {
    require(m.rows() == m.cols(), "mat_exp needs a square matrix");
    require(m.is_finite() && std::isfinite(t), "mat_exp needs finite input");
    const int n = m.rows();

    Mat a = m;
    a *= t;

    // 1-norm based scaling; theta_13 from the standard double-precision table.
    double norm1 = 0.0;
    for (int j = 0; j < n; ++j) {
        double col = 0.0;
        for (int i = 0; i < n; ++i) col += std::fabs(a(i, j));
        norm1 = std::max(norm1, col);
    }
    constexpr double theta13 = 5.371920351148152;
    int squarings = 0;
    if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
        a *= std::ldexp(1.0, -squarings);
    }

    static constexpr double b[14] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0,  129060195264000.0,   10559470521600.0,
        670442572800.0,      33522128640.0,       1323241920.0,
        40840800.0,          960960.0,            16380.0,
        182.0,               1.0};

    const Mat ident = Mat::identity(n);
    const Mat a2 = a * a;
    const Mat a4 = a2 * a2;
    const Mat a6 = a2 * a4;

    Mat u_inner = b[13] * a6 + b[11] * a4 + b[9] * a2;
    Mat u = a * (a6 * u_inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
    Mat v_inner = b[12] * a6 + b[10] * a4 + b[8] * a2;
    Mat v = a6 * v_inner + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;

    Mat num = v + u;
    Mat den = v - u;
    Mat r = lu_solve_matrix(lu_factor(den), num);

    for (int s = 0; s < squarings; ++s) r = r * r;
    return r;
}

namespace {

struct Cholesky {
    Mat l; // lower triangular
};

Cholesky cholesky_factor(const Mat& m) {
    if (!is_symmetric(m)) throw std::invalid_argument("matrix is not symmetric within tolerance");
    const int n = m.rows();
    Cholesky c{Mat(n, n)};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = m(i, j);
            for (int k = 0; k < j; ++k) s -= c.l(i, k) * c.l(j, k);
            if (i == j) {
                if (s <= 0.0) throw not_positive_definite("non-positive pivot in symmetric factorization");
                c.l(i, i) = std::sqrt(s);
            } else {
                c.l(i, j) = s / c.l(j, j);
            }
        }
    }
    return c;
}

Vec cholesky_solve(const Cholesky& c, Vec x) {
    const int n = c.l.rows();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) x[i] -= c.l(i, j) * x[j];
        x[i] /= c.l(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) x[i] -= c.l(j, i) * x[j];
        x[i] /= c.l(i, i);
    }
    return x;
}

} // namespace

Mat spd_inverse(const Mat& m) {
    const Cholesky c = cholesky_factor(m);
    const int n = m.rows();
    Mat inv(n, n);
    for (int col = 0; col < n; ++col) {
        Vec e(n);
        e[col] = 1.0;
        Vec x = cholesky_solve(c, e);
        for (int i = 0; i < n; ++i) inv(i, col) = x[i];
    }
    // Symmetrize away the last rounding asymmetry.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = v;
            inv(j, i) = v;
        }
    return inv;
}

Vec spd_solve(const Mat& m, const Vec& rhs) {
    require(m.rows() == rhs.size(), "spd_solve shape mismatch");
    return cholesky_solve(cholesky_factor(m), rhs);
}

namespace {

// Householder reduction of a symmetric matrix to tridiagonal form (diagonal d,
// off-diagonal e), eigenvalues only.
void tridiagonalize(Mat a, std::vector<double>& d, std::vector<double>& e) {
    const int n = a.rows();
    d.assign(static_cast<std::size_t>(n), 0.0);
    e.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = n - 1; i > 0; --i) {
        const int l = i - 1;
        double h = 0.0;
        if (l > 0) {
            double scale = 0.0;
            for (int k = 0; k <= l; ++k) scale += std::fabs(a(i, k));
            if (scale == 0.0) {
                e[static_cast<std::size_t>(i)] = a(i, l);
            } else {
                for (int k = 0; k <= l; ++k) {
                    a(i, k) /= scale;
                    h += a(i, k) * a(i, k);
                }
                double f = a(i, l);
                double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
                e[static_cast<std::size_t>(i)] = scale * g;
                h -= f * g;
                a(i, l) = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
                    for (int k = j + 1; k <= l; ++k) g += a(k, j) * a(i, k);
                    e[static_cast<std::size_t>(j)] = g / h;
                    f += e[static_cast<std::size_t>(j)] * a(i, j);
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = a(i, j);
                    g = e[static_cast<std::size_t>(j)] - hh * f;
                    e[static_cast<std::size_t>(j)] = g;
                    for (int k = 0; k <= j; ++k) a(j, k) -= f * e[static_cast<std::size_t>(k)] + g * a(i, k);
                }
            }
        } else {
            e[static_cast<std::size_t>(i)] = a(i, l);
        }
        d[static_cast<std::size_t>(i)] = h;
    }
    for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = a(i, i);
}

// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
void ql_eigenvalues(std::vector<double>& d, std::vector<double>& e) {
    const int n = static_cast<int>(d.size());
    if (n == 1) return;
    for (int i = 1; i < n; ++i) e[static_cast<std::size_t>(i - 1)] = e[static_cast<std::size_t>(i)];
    e[static_cast<std::size_t>(n - 1)] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::fabs(d[static_cast<std::size_t>(m)]) + std::fabs(d[static_cast<std::size_t>(m + 1)]);
                if (std::fabs(e[static_cast<std::size_t>(m)]) <= 1e-300 + 2.3e-16 * dd) break;
            }
            if (m != l) {
                if (++iter == 50) throw std::runtime_error("eigenvalue iteration failed to converge");
                double g = (d[static_cast<std::size_t>(l + 1)] - d[static_cast<std::size_t>(l)]) / (2.0 * e[static_cast<std::size_t>(l)]);
                double r = std::hypot(g, 1.0);
                g = d[static_cast<std::size_t>(m)] - d[static_cast<std::size_t>(l)] +
                    e[static_cast<std::size_t>(l)] / (g + (g >= 0.0 ? std::fabs(r) : -std::fabs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[static_cast<std::size_t>(i)];
                    const double b = c * e[static_cast<std::size_t>(i)];
                    r = std::hypot(f, g);
                    e[static_cast<std::size_t>(i + 1)] = r;
                    if (r == 0.0) {
                        d[static_cast<std::size_t>(i + 1)] -= p;
                        e[static_cast<std::size_t>(m)] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[static_cast<std::size_t>(i + 1)] - p;
                    r = (d[static_cast<std::size_t>(i)] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[static_cast<std::size_t>(i + 1)] = g + p;
                    g = c * r - b;
                }
                if (r == 0.0 && m - 1 >= l) continue;
                d[static_cast<std::size_t>(l)] -= p;
                e[static_cast<std::size_t>(l)] = g;
                e[static_cast<std::size_t>(m)] = 0.0;
            }
        } while (m != l);
    }
}

} // namespace

std::vector<double> symmetric_eigenvalues(const Mat& m) {
    require(m.rows() == m.cols(), "eigenvalues need a square matrix");
    require(m.is_finite(), "eigenvalues need finite entries");
    if (!is_symmetric(m)) throw std::invalid_argument("matrix is not symmetric within tolerance");
    std::vector<double> d, e;
    tridiagonalize(m, d, e);
    ql_eigenvalues(d, e);
    std::sort(d.begin(), d.end());
    return d;
}

double min_eigenvalue(const Mat& m) {
    return symmetric_eigenvalues(m).front();
}

} // namespace exactrep

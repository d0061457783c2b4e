#include "nae/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace nae {

namespace {

void check_same_len(const Vector &a, const Vector &b, const char *op) {
    if (a.size() != b.size())
        throw std::invalid_argument(std::string(op) + ": length mismatch " +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()));
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

bool Matrix::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

void Matrix::require_finite(const char *what) const {
    if (!all_finite())
        throw std::runtime_error(std::string(what) + " contains a non-finite value");
}

bool all_finite(const Vector &v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Blocked ikj product: the inner j loop runs over contiguous memory in both
// B and C, so it vectorizes; blocking keeps the B panel in cache. No BLAS.
Matrix matmul(const Matrix &a, const Matrix &b) {
    if (a.cols != b.rows)
        throw std::invalid_argument("matmul: inner dimensions differ, " +
                                    a.shape_str() + " * " + b.shape_str());
    Matrix c(a.rows, b.cols);
    constexpr std::size_t kBlock = 64;
    for (std::size_t kk = 0; kk < a.cols; kk += kBlock) {
        const std::size_t kend = std::min(a.cols, kk + kBlock);
        for (std::size_t i = 0; i < a.rows; ++i) {
            const double *arow = a.row_ptr(i);
            double *crow = c.row_ptr(i);
            for (std::size_t k = kk; k < kend; ++k) {
                const double av = arow[k];
                const double *brow = b.row_ptr(k);
                for (std::size_t j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
            }
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix &a, const Matrix &b) {
    if (a.cols != b.cols)
        throw std::invalid_argument("matmul_nt: inner dimensions differ, " +
                                    a.shape_str() + " * " + b.shape_str() + "^T");
    Matrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double *arow = a.row_ptr(i);
        double *crow = c.row_ptr(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double *brow = b.row_ptr(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
            crow[j] = s;
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix &a, const Matrix &b) {
    if (a.rows != b.rows)
        throw std::invalid_argument("matmul_tn: inner dimensions differ, " +
                                    a.shape_str() + "^T * " + b.shape_str());
    Matrix c(a.cols, b.cols);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double *arow = a.row_ptr(k);
        const double *brow = b.row_ptr(k);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double av = arow[i];
            double *crow = c.row_ptr(i);
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

Matrix transpose(const Matrix &a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

Vector matvec(const Matrix &m, const Vector &x) {
    if (m.cols != x.size())
        throw std::invalid_argument("matvec: " + m.shape_str() + " * vector of length " +
                                    std::to_string(x.size()));
    Vector y(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double *row = m.row_ptr(i);
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) s += row[j] * x[j];
        y[i] = s;
    }
    return y;
}

Vector matvec_t(const Matrix &m, const Vector &x) {
    if (m.rows != x.size())
        throw std::invalid_argument("matvec_t: " + m.shape_str() + "^T * vector of length " +
                                    std::to_string(x.size()));
    Vector y(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double *row = m.row_ptr(i);
        const double xi = x[i];
        for (std::size_t j = 0; j < m.cols; ++j) y[j] += xi * row[j];
    }
    return y;
}

double dot(const Vector &a, const Vector &b) {
    check_same_len(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double squared_norm(const Vector &v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

double col_squared_norm(const Matrix &m, std::size_t j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) s += m(i, j) * m(i, j);
    return s;
}

double row_squared_norm(const Matrix &m, std::size_t i) {
    const double *row = m.row_ptr(i);
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) s += row[j] * row[j];
    return s;
}

double frobenius_squared(const Matrix &m) {
    double s = 0.0;
    for (double v : m.data) s += v * v;
    return s;
}

void axpy(double alpha, const Vector &x, Vector &y) {
    check_same_len(x, y, "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void axpy(double alpha, const Matrix &x, Matrix &y) {
    if (x.rows != y.rows || x.cols != y.cols)
        throw std::invalid_argument("axpy: shape mismatch " + x.shape_str() + " vs " +
                                    y.shape_str());
    for (std::size_t i = 0; i < x.data.size(); ++i) y.data[i] += alpha * x.data[i];
}

void scale_in_place(Matrix &m, double alpha) {
    for (double &v : m.data) v *= alpha;
}

void scale_in_place(Vector &v, double alpha) {
    for (double &x : v) x *= alpha;
}

SymEig sym_eig(const Matrix &a) {
    if (a.rows != a.cols)
        throw std::invalid_argument("sym_eig: matrix not square, " + a.shape_str());
    const std::size_t n = a.rows;
    Matrix d = a;  // working copy, driven to diagonal form
    Matrix v = Matrix::identity(n);

    // Cyclic Jacobi sweeps. Converges quadratically; n here is at most a few
    // hundred (activation covariance matrices), so no pivot search is needed.
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += d(p, q) * d(p, q);
        if (off < 1e-26 * (1.0 + frobenius_squared(d))) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = d(p, q);
                if (apq == 0.0) continue;
                const double app = d(p, p);
                const double aqq = d(q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0)
                                     ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                     : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double dkp = d(k, p), dkq = d(k, q);
                    d(k, p) = c * dkp - s * dkq;
                    d(k, q) = s * dkp + c * dkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double dpk = d(p, k), dqk = d(q, k);
                    d(p, k) = c * dpk - s * dqk;
                    d(q, k) = s * dpk + c * dqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    SymEig out;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = d(i, i);

    // Sort descending, permuting eigenvector columns alongside.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::size_t best = i;
        for (std::size_t j = i + 1; j < n; ++j)
            if (out.values[order[j]] > out.values[order[best]]) best = j;
        std::swap(order[i], order[best]);
    }
    SymEig sorted;
    sorted.values.resize(n);
    sorted.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        sorted.values[k] = out.values[order[k]];
        for (std::size_t i = 0; i < n; ++i) sorted.vectors(i, k) = v(i, order[k]);
    }
    return sorted;
}

}  // namespace nae

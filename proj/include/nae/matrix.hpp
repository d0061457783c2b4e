#ifndef NAE_MATRIX_HPP
#define NAE_MATRIX_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace nae {

/// Real values are 64-bit floating point throughout the library; the
/// verification oracles (finite differences, Monte Carlo vs analytic
/// penalties) need headroom below 32-bit rounding noise.
using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Rows index the first dimension.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double &operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double *row_ptr(std::size_t i) { return data.data() + i * cols; }
    const double *row_ptr(std::size_t i) const { return data.data() + i * cols; }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    static Matrix identity(std::size_t n);

    /// Shape as "RxC", for error messages.
    std::string shape_str() const;

    bool all_finite() const;
    /// Throws std::runtime_error naming `what` if any entry is NaN/Inf.
    void require_finite(const char *what) const;
};

bool all_finite(const Vector &v);

/// C = A * B. Dimension mismatch throws std::invalid_argument with both shapes.
Matrix matmul(const Matrix &a, const Matrix &b);
/// C = A * B^T (B given untransposed).
Matrix matmul_nt(const Matrix &a, const Matrix &b);
/// C = A^T * B.
Matrix matmul_tn(const Matrix &a, const Matrix &b);

Matrix transpose(const Matrix &a);

/// y = M * x.
Vector matvec(const Matrix &m, const Vector &x);
/// y = M^T * x.
Vector matvec_t(const Matrix &m, const Vector &x);

double dot(const Vector &a, const Vector &b);
double squared_norm(const Vector &v);
/// Squared L2 norm of column j.
double col_squared_norm(const Matrix &m, std::size_t j);
double row_squared_norm(const Matrix &m, std::size_t i);
double frobenius_squared(const Matrix &m);

void axpy(double alpha, const Vector &x, Vector &y);     // y += alpha*x
void axpy(double alpha, const Matrix &x, Matrix &y);
void scale_in_place(Matrix &m, double alpha);
void scale_in_place(Vector &v, double alpha);

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues are returned in descending order with matching columns of
/// `vectors` (vectors[:,k] is the k-th eigenvector).
struct SymEig {
    Vector values;
    Matrix vectors;
};
SymEig sym_eig(const Matrix &a);

}  // namespace nae

#endif

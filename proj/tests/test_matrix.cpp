#include "doctest.h"

#include <stdexcept>
#include <cmath>

#include "nae/matrix.hpp"
#include "nae/rng.hpp"

using namespace nae;

namespace {

// Independent naive triple-loop reference, kept deliberately different from
// the blocked production kernel.
Matrix matmul_reference(const Matrix &a, const Matrix &b) {
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.cols; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

Matrix random_matrix(Rng &rng, std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (double &v : m.data) v = 2.0 * rng.next_double() - 1.0;
    return m;
}

}  // namespace

TEST_CASE("matmul: identity leaves a matrix unchanged") {
    Rng rng(1);
    const Matrix a = random_matrix(rng, 3, 4);
    const Matrix c = matmul(Matrix::identity(3), a);
    CHECK(c.data == a.data);  // exact
}

TEST_CASE("matmul: hand-computed 2x2 by 2x1") {
    Matrix a(2, 2);
    a(0, 0) = 1; a(0, 1) = 2; a(1, 0) = 3; a(1, 1) = 4;
    Matrix b(2, 1);
    b(0, 0) = 0; b(1, 0) = 1;
    const Matrix c = matmul(a, b);
    CHECK(c(0, 0) == 2.0);
    CHECK(c(1, 0) == 4.0);
}

TEST_CASE("matmul: matches the triple-loop reference within 1e-12") {
    Rng rng(7);
    const Matrix a = random_matrix(rng, 5, 7);
    const Matrix b = random_matrix(rng, 7, 3);
    const Matrix got = matmul(a, b);
    const Matrix want = matmul_reference(a, b);
    for (std::size_t i = 0; i < got.data.size(); ++i)
        CHECK(std::abs(got.data[i] - want.data[i]) < 1e-12);
}

TEST_CASE("matmul: dimension mismatch names both shapes") {
    const Matrix a(2, 3), b(4, 2);
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("2x3"),
                         std::invalid_argument);
}

TEST_CASE("matmul: associativity on random conformable triples") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = random_matrix(rng, 4, 6);
        const Matrix b = random_matrix(rng, 6, 5);
        const Matrix c = random_matrix(rng, 5, 3);
        const Matrix left = matmul(matmul(a, b), c);
        const Matrix right = matmul(a, matmul(b, c));
        for (std::size_t i = 0; i < left.data.size(); ++i) {
            const double denom = std::max(1.0, std::abs(right.data[i]));
            CHECK(std::abs(left.data[i] - right.data[i]) / denom < 1e-10);
        }
    }
}

TEST_CASE("matmul_nt / matmul_tn / matvec agree with explicit transposes") {
    Rng rng(13);
    const Matrix a = random_matrix(rng, 4, 6);
    const Matrix b = random_matrix(rng, 5, 6);
    const Matrix nt = matmul_nt(a, b);
    const Matrix nt_ref = matmul(a, transpose(b));
    for (std::size_t i = 0; i < nt.data.size(); ++i)
        CHECK(nt.data[i] == doctest::Approx(nt_ref.data[i]).epsilon(1e-12));

    const Matrix c = random_matrix(rng, 6, 3);
    const Matrix d = random_matrix(rng, 6, 4);
    const Matrix tn = matmul_tn(c, d);
    const Matrix tn_ref = matmul(transpose(c), d);
    for (std::size_t i = 0; i < tn.data.size(); ++i)
        CHECK(tn.data[i] == doctest::Approx(tn_ref.data[i]).epsilon(1e-12));

    Vector x(6);
    for (double &v : x) v = rng.next_double();
    const Vector y = matvec(a, x);
    const Matrix xm(6, 1);
    Matrix xcol(6, 1);
    for (std::size_t i = 0; i < 6; ++i) xcol(i, 0) = x[i];
    const Matrix ym = matmul(a, xcol);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(y[i] == doctest::Approx(ym(i, 0)).epsilon(1e-12));
}

TEST_CASE("sym_eig: recovers a constructed spectrum") {
    // A = Q diag(5,2,1) Q^T for an explicit rotation Q.
    Rng rng(17);
    Matrix q = Matrix::identity(3);
    // Compose a couple of Givens rotations.
    auto rotate = [&](std::size_t i, std::size_t j, double angle) {
        const double c = std::cos(angle), s = std::sin(angle);
        for (std::size_t k = 0; k < 3; ++k) {
            const double qi = q(k, i), qj = q(k, j);
            q(k, i) = c * qi - s * qj;
            q(k, j) = s * qi + c * qj;
        }
    };
    rotate(0, 1, 0.7);
    rotate(1, 2, -1.2);
    Matrix lam(3, 3);
    lam(0, 0) = 5; lam(1, 1) = 2; lam(2, 2) = 1;
    const Matrix a = matmul(matmul(q, lam), transpose(q));
    const SymEig eig = sym_eig(a);
    CHECK(eig.values[0] == doctest::Approx(5).epsilon(1e-10));
    CHECK(eig.values[1] == doctest::Approx(2).epsilon(1e-10));
    CHECK(eig.values[2] == doctest::Approx(1).epsilon(1e-10));
    // Eigenvectors reproduce A.
    Matrix recon(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k)
                recon(i, j) += eig.vectors(i, k) * eig.values[k] * eig.vectors(j, k);
    for (std::size_t i = 0; i < 9; ++i)
        CHECK(recon.data[i] == doctest::Approx(a.data[i]).epsilon(1e-9));
}

TEST_CASE("finite checks flag NaN") {
    Matrix m(2, 2, 1.0);
    CHECK(m.all_finite());
    m(1, 1) = std::nan("");
    CHECK_FALSE(m.all_finite());
    CHECK_THROWS_AS(m.require_finite("test matrix"), std::runtime_error);
}

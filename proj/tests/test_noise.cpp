#include "doctest.h"

#include <stdexcept>

#include <cmath>

#include "nae/noise.hpp"

using namespace nae;

TEST_CASE("sample: all kinds none gives empty (identity) sites") {
    NoiseSpec spec;
    Rng rng(1);
    const NoiseSample s = sample(spec, rng, 4, 3);
    CHECK(s.eps_i.empty());
    CHECK(s.eps_z.empty());
    CHECK(s.eps_h.empty());
}

TEST_CASE("sample: dropout p=1 yields an all-ones mask") {
    NoiseSpec spec;
    spec.activation = NoiseDist::dropout(1.0);
    Rng rng(2);
    const NoiseSample s = sample(spec, rng, 4, 3);
    CHECK(s.eps_h == Vector{1.0, 1.0, 1.0});
    CHECK(s.mode_h == CombineMode::multiplicative);
}

TEST_CASE("sample: poisson-like variance tracks the clean activation") {
    NoiseSpec spec;
    spec.activation = NoiseDist::poisson_like();
    const Vector clean_h = {0.25, 1.0};
    Rng rng(3);
    const std::size_t n = 100000;
    Vector sum(2, 0.0), sumsq(2, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const NoiseSample s = sample(spec, rng, 0, 2, &clean_h);
        for (int i = 0; i < 2; ++i) {
            sum[i] += s.eps_h[i];
            sumsq[i] += s.eps_h[i] * s.eps_h[i];
        }
    }
    for (int i = 0; i < 2; ++i) {
        const double mean = sum[i] / n;
        const double var = sumsq[i] / n - mean * mean;
        CHECK(std::abs(var - clean_h[i]) / clean_h[i] < 0.03);
    }
}

TEST_CASE("sample: poisson-like without clean_h throws") {
    NoiseSpec spec;
    spec.activation = NoiseDist::poisson_like();
    Rng rng(4);
    CHECK_THROWS_AS(sample(spec, rng, 4, 3), std::invalid_argument);
}

TEST_CASE("sample: poisson-like outside the activation site is rejected") {
    NoiseSpec spec;
    spec.input = NoiseDist::poisson_like();
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("apply: identities and hand-computed dropout") {
    const Vector v = {2.0, 3.0};
    CHECK(apply(v, {0.0, 0.0}, CombineMode::additive) == v);
    CHECK(apply(v, {1.0, 1.0}, CombineMode::multiplicative) == v);
    CHECK(apply(v, {0.0, 1.0}, CombineMode::multiplicative) == Vector{0.0, 3.0});
    CHECK_THROWS_AS(apply(v, {1.0}, CombineMode::additive), std::invalid_argument);
}

TEST_CASE("equivalent_hidden_noise_from_prenoise: forced values") {
    Matrix w(2, 2);
    w(0, 0) = 1.0;
    w(1, 1) = 1.0;
    const Vector x = {0.0, 0.0};

    SUBCASE("var_z = 0 gives the zero vector") {
        const Vector v = equivalent_hidden_noise_from_prenoise(
            w, x, NoiseDist::additive_gaussian(0.0), Nonlin::sigmoid);
        CHECK(v == Vector{0.0, 0.0});
    }
    SUBCASE("sigmoid slope 1/4 at z=0") {
        const Vector v = equivalent_hidden_noise_from_prenoise(
            w, x, NoiseDist::additive_gaussian(0.04), Nonlin::sigmoid);
        CHECK(v[0] == doctest::Approx(0.0025).epsilon(1e-12));
        CHECK(v[1] == doctest::Approx(0.0025).epsilon(1e-12));
    }
    SUBCASE("non-Gaussian pre-activation noise is unsupported") {
        CHECK_THROWS_AS(equivalent_hidden_noise_from_prenoise(
                            w, x, NoiseDist::dropout(0.5), Nonlin::sigmoid),
                        std::invalid_argument);
    }
}

TEST_CASE("equivalent_prenoise_covariance_from_input: definition cases") {
    Rng rng(9);
    Matrix w(3, 4);
    for (double &v : w.data) v = 2.0 * rng.next_double() - 1.0;

    SUBCASE("zero covariance maps to zero") {
        const Matrix c = equivalent_prenoise_covariance_from_input(w, Matrix(4, 4));
        for (double v : c.data) CHECK(v == 0.0);
    }
    SUBCASE("scalar covariance gives sigma^2 W W^T entrywise") {
        const double s2 = 0.3;
        const Matrix c = equivalent_prenoise_covariance_from_input(w, s2);
        const Matrix ref = matmul_nt(w, w);
        for (std::size_t i = 0; i < c.data.size(); ++i)
            CHECK(c.data[i] == doctest::Approx(s2 * ref.data[i]).epsilon(1e-12));
        // Full-matrix route agrees.
        Matrix sigma(4, 4);
        for (std::size_t i = 0; i < 4; ++i) sigma(i, i) = s2;
        const Matrix c2 = equivalent_prenoise_covariance_from_input(w, sigma);
        for (std::size_t i = 0; i < c.data.size(); ++i)
            CHECK(c2.data[i] == doctest::Approx(c.data[i]).epsilon(1e-12));
    }
    SUBCASE("non-PSD covariance is rejected") {
        Matrix sigma(4, 4);
        sigma(0, 0) = -1.0;
        CHECK_THROWS_AS(equivalent_prenoise_covariance_from_input(w, sigma),
                        std::invalid_argument);
    }
    SUBCASE("asymmetric covariance is rejected") {
        Matrix sigma(4, 4, 0.0);
        sigma(0, 1) = 0.5;  // not mirrored
        for (std::size_t i = 0; i < 4; ++i) sigma(i, i) = 1.0;
        CHECK_THROWS_AS(equivalent_prenoise_covariance_from_input(w, sigma),
                        std::invalid_argument);
    }
}

TEST_CASE("taylor transform error shrinks as var_z shrinks") {
    // Fixed random (W, x); common random numbers across the grid.
    Rng setup(21);
    Matrix w(4, 3);
    for (double &v : w.data) v = 2.0 * setup.next_double() - 1.0;
    Vector x(3);
    for (double &v : x) v = 2.0 * setup.next_double() - 1.0;
    const Vector z = matvec(w, x);

    std::vector<double> errs;
    for (const double var : {1e-2, 1e-3, 1e-4}) {
        const Vector pred = equivalent_hidden_noise_from_prenoise(
            w, x, NoiseDist::additive_gaussian(var), Nonlin::sigmoid);
        Rng mc(99);
        const std::size_t draws = 200000;
        const double sd = std::sqrt(var);
        double worst = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            double sum = 0.0, sumsq = 0.0;
            for (std::size_t k = 0; k < draws; ++k) {
                const double dh = sigmoid(z[i] + sd * mc.gaussian()) - sigmoid(z[i]);
                sum += dh;
                sumsq += dh * dh;
            }
            const double mean = sum / draws;
            const double mc_var = sumsq / draws - mean * mean;
            worst = std::max(worst, std::abs(mc_var - pred[i]) / pred[i]);
        }
        errs.push_back(worst);
    }
    CHECK(errs[0] > errs[1]);
    CHECK(errs[1] > errs[2]);
}

TEST_CASE("noise dist text form round-trips") {
    for (const std::string text :
         {"none", "gaussian:0.1", "gaussian_mult:0.25", "dropout:0.5", "poisson"}) {
        const NoiseDist d = NoiseDist::parse(text);
        CHECK(NoiseDist::parse(d.to_string()).kind == d.kind);
    }
    CHECK_THROWS_AS(NoiseDist::parse("gaussian"), std::invalid_argument);
    CHECK_THROWS_AS(NoiseDist::parse("blur:0.5"), std::invalid_argument);
    CHECK_THROWS_AS(NoiseDist::parse("dropout:1.5"), std::invalid_argument);
    CHECK_THROWS_AS(NoiseDist::parse("poisson:0.1"), std::invalid_argument);
}

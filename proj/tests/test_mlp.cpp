#include "doctest.h"

#include <stdexcept>

#include <cmath>

#include "nae/mlp.hpp"

using namespace nae;

TEST_CASE("softmax rows sum to 1 within 1e-12 and order logits") {
    Matrix logits(2, 3);
    logits(0, 0) = 1.0;
    logits(0, 1) = 2.0;
    logits(0, 2) = 3.0;
    logits(1, 0) = 100.0;  // overflow-safe
    logits(1, 1) = 0.0;
    logits(1, 2) = -100.0;
    const Matrix p = softmax_rows(logits);
    for (std::size_t i = 0; i < 2; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 3; ++j) sum += p(i, j);
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    CHECK(p(0, 2) > p(0, 1));
    CHECK(p(0, 1) > p(0, 0));
    CHECK(p(1, 0) > 0.999);
}

TEST_CASE("mlp_predict applies expectation scaling for dropout") {
    Rng rng(1);
    MlpParams mlp = init_mlp(rng, 4, {5}, 3, Nonlin::sigmoid);
    Matrix x(2, 4);
    for (double &v : x.data) v = rng.next_double();

    NoiseSpec spec;
    spec.activation = NoiseDist::dropout(0.5);
    const Matrix scaled = mlp_predict(mlp, x, spec);

    // Reference: explicit forward with hidden activations halved.
    Matrix a = matmul_nt(x, mlp.layers[0].W);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) {
            a(i, j) += mlp.layers[0].b[j];
            a(i, j) = 0.5 * sigmoid(a(i, j));
        }
    Matrix logits = matmul_nt(a, mlp.layers[1].W);
    for (std::size_t i = 0; i < logits.rows; ++i)
        for (std::size_t j = 0; j < logits.cols; ++j) logits(i, j) += mlp.layers[1].b[j];
    const Matrix want = softmax_rows(logits);
    for (std::size_t i = 0; i < want.data.size(); ++i)
        CHECK(scaled.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
}

TEST_CASE("mlp forward replay reproduces the noisy forward exactly") {
    Rng rng(2);
    MlpParams mlp = init_mlp(rng, 5, {4, 3}, 2, Nonlin::relu);
    Matrix x(3, 5);
    for (double &v : x.data) v = rng.next_double();
    NoiseSpec spec;
    spec.input = NoiseDist::additive_gaussian(0.1);
    spec.activation = NoiseDist::dropout(0.5);
    std::vector<std::size_t> ids = {0, 1, 2};
    const MlpTrace t = mlp_forward_noisy(mlp, x, spec, Rng(7), ids, 3);
    const MlpTrace r = mlp_forward_replay(mlp, t.input, t.eps_a, t.mode_a);
    CHECK(r.probs.data == t.probs.data);
}

TEST_CASE("pre-activation noise is rejected in supervised nets") {
    Rng rng(3);
    MlpParams mlp = init_mlp(rng, 4, {3}, 2, Nonlin::relu);
    Matrix x(1, 4, 0.5);
    NoiseSpec spec;
    spec.pre_activation = NoiseDist::additive_gaussian(0.1);
    CHECK_THROWS_AS(mlp_predict(mlp, x, spec), std::invalid_argument);
}

TEST_CASE("mlp gradients respect frozen layers") {
    Rng rng(4);
    MlpParams mlp = init_mlp(rng, 4, {3}, 2, Nonlin::sigmoid);
    Matrix x(2, 4);
    for (double &v : x.data) v = rng.next_double();
    std::vector<std::size_t> ids = {0, 1};
    const MlpTrace t = mlp_forward_noisy(mlp, x, NoiseSpec{}, Rng(0), ids, 1);
    const std::vector<int> labels = {0, 1};
    const MlpGradients g = mlp_gradients(mlp, t, labels, 1);
    for (double v : g.dW[0].data) CHECK(v == 0.0);
    for (double v : g.db[0]) CHECK(v == 0.0);
    bool any_nonzero = false;
    for (double v : g.dW[1].data) any_nonzero |= v != 0.0;
    CHECK(any_nonzero);
}

TEST_CASE("label validation") {
    Rng rng(5);
    MlpParams mlp = init_mlp(rng, 4, {}, 3, Nonlin::relu);
    Matrix probs(2, 3, 1.0 / 3.0);
    CHECK_THROWS_AS(softmax_cross_entropy(probs, {0, 3}), std::invalid_argument);
    CHECK_THROWS_AS(softmax_cross_entropy(probs, {0}), std::invalid_argument);
}

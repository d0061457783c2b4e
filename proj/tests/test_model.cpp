#include "doctest.h"

#include <stdexcept>

#include <cmath>

#include "nae/model.hpp"

using namespace nae;

namespace {

NaeParams small_model(Rng &rng, std::size_t nin, std::size_t nh, Nonlin enc,
                      Nonlin dec, bool tied) {
    NaeParams p;
    p.enc_nonlin = enc;
    p.dec_nonlin = dec;
    p.tied = tied;
    p.W = Matrix(nh, nin);
    for (double &v : p.W.data) v = 2.0 * rng.next_double() - 1.0;
    p.b.resize(nh);
    for (double &v : p.b) v = 0.5 * (2.0 * rng.next_double() - 1.0);
    if (!tied) {
        p.Wdec = Matrix(nin, nh);
        for (double &v : p.Wdec.data) v = 2.0 * rng.next_double() - 1.0;
    }
    p.d.resize(nin);
    for (double &v : p.d) v = 0.5 * (2.0 * rng.next_double() - 1.0);
    return p;
}

Vector random_x(Rng &rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    Vector x(n);
    for (double &v : x) v = lo + (hi - lo) * rng.next_double();
    return x;
}

}  // namespace

TEST_CASE("encode_noisy: identity noise reduces to the clean encoder") {
    Rng rng(1);
    const NaeParams p = small_model(rng, 4, 3, Nonlin::sigmoid, Nonlin::linear, false);
    const Vector x = random_x(rng, 4);
    const ForwardTrace t = encode_noisy(p, x, NoiseSample::none());
    const Vector clean = encode_deterministic(p, x, NoiseSpec{});
    CHECK(t.h_tilde == clean);  // bit-identical
    CHECK(t.x_tilde == x);
}

TEST_CASE("encode_noisy: dropout mask zeroes exactly the masked units") {
    Rng rng(2);
    const NaeParams p = small_model(rng, 4, 3, Nonlin::sigmoid, Nonlin::linear, false);
    const Vector x = random_x(rng, 4);
    NoiseSample s;
    s.eps_h = {1.0, 0.0, 1.0};
    s.mode_h = CombineMode::multiplicative;
    const ForwardTrace t = encode_noisy(p, x, s);
    CHECK(t.h_tilde[1] == 0.0);
    CHECK(t.h_tilde[0] > 0.0);
}

TEST_CASE("encode_noisy: additive pre-activation delta moves one unit only") {
    Rng rng(3);
    const NaeParams p = small_model(rng, 4, 3, Nonlin::sigmoid, Nonlin::linear, false);
    const Vector x = random_x(rng, 4);
    const double delta = 0.37;
    NoiseSample s;
    s.eps_z = {delta, 0.0, 0.0};
    s.mode_z = CombineMode::additive;
    const ForwardTrace t = encode_noisy(p, x, s);
    const Vector clean_z = [&] {
        Vector z = matvec(p.W, x);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += p.b[i];
        return z;
    }();
    CHECK(t.h_tilde[0] == doctest::Approx(sigmoid(clean_z[0] + delta)).epsilon(1e-15));
    CHECK(t.h_tilde[1] == doctest::Approx(sigmoid(clean_z[1])).epsilon(1e-15));
    CHECK(t.h_tilde[2] == doctest::Approx(sigmoid(clean_z[2])).epsilon(1e-15));
}

TEST_CASE("reconstruct: linear decoder basics") {
    Rng rng(4);
    NaeParams p = small_model(rng, 3, 3, Nonlin::sigmoid, Nonlin::linear, false);

    SUBCASE("h = 0 returns the bias") {
        const Vector r = reconstruct(p, Vector(3, 0.0));
        CHECK(r == p.d);
    }
    SUBCASE("identity decoder passes h through") {
        p.Wdec = Matrix::identity(3);
        p.d.assign(3, 0.0);
        const Vector h = {0.2, -0.4, 0.9};
        CHECK(reconstruct(p, h) == h);
    }
    SUBCASE("sigmoid decoder output lies in (0,1)") {
        p.dec_nonlin = Nonlin::sigmoid;
        const Vector r = reconstruct(p, {0.5, 0.5, 0.5});
        for (double v : r) {
            CHECK(v > 0.0);
            CHECK(v < 1.0);
        }
    }
}

TEST_CASE("loss: hand-computed values") {
    CHECK(loss({1.0, 0.0}, {1.0, 0.0}, LossKind::squared) == 0.0);
    CHECK(loss({1.0, 0.0}, {0.0, 1.0}, LossKind::squared) == 2.0);
    CHECK(loss({1.0, 0.0}, {0.5, 0.5}, LossKind::cross_entropy) ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    // Saturated reconstruction is clamped, never NaN.
    const double l = loss({1.0, 0.0}, {0.0, 1.0}, LossKind::cross_entropy);
    CHECK(std::isfinite(l));
    CHECK(l > 0.0);
    CHECK_THROWS_AS(loss({1.0}, {0.5, 0.5}, LossKind::squared), std::invalid_argument);
}

TEST_CASE("gradients: zero at a perfect-reconstruction stationary point") {
    // Identity-ish construction: d := x - W'h makes r == x exactly.
    Rng rng(5);
    NaeParams p = small_model(rng, 3, 4, Nonlin::sigmoid, Nonlin::linear, false);
    const Vector x = random_x(rng, 3);
    const Vector h = encode_deterministic(p, x, NoiseSpec{});
    const Vector wh = p.dec_apply(h);
    for (std::size_t i = 0; i < 3; ++i) p.d[i] = x[i] - wh[i];
    const ForwardTrace t = forward_noisy(p, x, NoiseSample::none());
    CHECK(loss(x, t.r, LossKind::squared) == doctest::Approx(0.0));
    const Gradients g = gradients(p, t, x, LossKind::squared);
    for (double v : g.dW.data) CHECK(std::abs(v) < 1e-12);
    for (double v : g.dWdec.data) CHECK(std::abs(v) < 1e-12);
    for (double v : g.db) CHECK(std::abs(v) < 1e-12);
    for (double v : g.dd) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("gradients: dropout-masked units block gradient flow") {
    Rng rng(6);
    const NaeParams p = small_model(rng, 4, 3, Nonlin::sigmoid, Nonlin::linear, false);
    const Vector x = random_x(rng, 4);
    NoiseSample s;
    s.eps_h = {1.0, 0.0, 1.0};
    s.mode_h = CombineMode::multiplicative;
    const ForwardTrace t = forward_noisy(p, x, s);
    const Gradients g = gradients(p, t, x, LossKind::squared);
    // Encoder row 1 feeds only the masked unit; its gradient must vanish.
    for (std::size_t j = 0; j < 4; ++j) CHECK(g.dW(1, j) == 0.0);
    CHECK(g.db[1] == 0.0);
    // Decoder column 1 multiplies h~_1 = 0, so its gradient vanishes too.
    for (std::size_t i = 0; i < 4; ++i) CHECK(g.dWdec(i, 1) == 0.0);
}

TEST_CASE("gradients: finite-difference agreement on a random model") {
    Rng rng(7);
    NaeParams p = small_model(rng, 3, 5, Nonlin::sigmoid, Nonlin::linear, false);
    const Vector x = random_x(rng, 3);
    NoiseSpec spec;
    spec.input = NoiseDist::additive_gaussian(0.1);
    spec.activation = NoiseDist::dropout(0.5);
    Rng nrng(8);
    const Vector clean_h = encode_deterministic(p, x, NoiseSpec{});
    const NoiseSample noise = sample(spec, nrng, 3, 5, &clean_h);
    const ForwardTrace t = forward_noisy(p, x, noise);
    const Gradients g = gradients(p, t, x, LossKind::squared);

    auto eval = [&]() { return loss(x, forward_noisy(p, x, noise).r, LossKind::squared); };
    const double step = 1e-5;
    auto check_slot = [&](double &slot, double analytic) {
        const double orig = slot;
        slot = orig + step;
        const double up = eval();
        slot = orig - step;
        const double dn = eval();
        slot = orig;
        const double numeric = (up - dn) / (2.0 * step);
        const double abs_err = std::abs(analytic - numeric);
        const double rel = abs_err / std::max({1e-300, std::abs(analytic), std::abs(numeric)});
        CHECK((abs_err <= 1e-6 || rel <= 1e-5));
    };
    for (std::size_t i = 0; i < p.W.data.size(); ++i) check_slot(p.W.data[i], g.dW.data[i]);
    for (std::size_t i = 0; i < p.b.size(); ++i) check_slot(p.b[i], g.db[i]);
    for (std::size_t i = 0; i < p.Wdec.data.size(); ++i)
        check_slot(p.Wdec.data[i], g.dWdec.data[i]);
    for (std::size_t i = 0; i < p.d.size(); ++i) check_slot(p.d[i], g.dd[i]);
}

TEST_CASE("gradients: tied model equals dW + dWdec^T of the untied computation") {
    Rng rng(9);
    NaeParams tied = small_model(rng, 4, 3, Nonlin::sigmoid, Nonlin::linear, true);
    NaeParams untied = tied;
    untied.tied = false;
    untied.Wdec = transpose(tied.W);
    const Vector x = random_x(rng, 4);
    const ForwardTrace tt = forward_noisy(tied, x, NoiseSample::none());
    const ForwardTrace tu = forward_noisy(untied, x, NoiseSample::none());
    const Gradients gt = gradients(tied, tt, x, LossKind::squared);
    const Gradients gu = gradients(untied, tu, x, LossKind::squared);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(gt.dW(i, j) ==
                  doctest::Approx(gu.dW(i, j) + gu.dWdec(j, i)).epsilon(1e-12));
}

TEST_CASE("encode_deterministic: expectation scaling") {
    Rng rng(10);
    const NaeParams p = small_model(rng, 4, 3, Nonlin::sigmoid, Nonlin::linear, false);
    const Vector x = random_x(rng, 4);
    const Vector clean = encode_deterministic(p, x, NoiseSpec{});

    SUBCASE("mean-preserving noise needs no scaling") {
        NoiseSpec spec;
        spec.input = NoiseDist::additive_gaussian(0.3);
        spec.pre_activation = NoiseDist::additive_gaussian(0.1);
        spec.activation = NoiseDist::multiplicative_gaussian(0.2);
        CHECK(encode_deterministic(p, x, spec) == clean);
    }
    SUBCASE("dropout at the activations scales h by p") {
        NoiseSpec spec;
        spec.activation = NoiseDist::dropout(0.25);
        const Vector h = encode_deterministic(p, x, spec);
        for (std::size_t i = 0; i < h.size(); ++i)
            CHECK(h[i] == doctest::Approx(0.25 * clean[i]).epsilon(1e-15));
    }
    SUBCASE("dropout at the input scales x before the encoder") {
        NoiseSpec spec;
        spec.input = NoiseDist::dropout(0.5);
        Vector xs = x;
        scale_in_place(xs, 0.5);
        CHECK(encode_deterministic(p, x, spec) ==
              encode_deterministic(p, xs, NoiseSpec{}));
    }
}

TEST_CASE("expectation consistency: mean noisy reconstruction matches the "
          "deterministic one (linear decoder)") {
    Rng rng(11);
    const NaeParams p = small_model(rng, 4, 3, Nonlin::sigmoid, Nonlin::linear, false);
    const Vector x = random_x(rng, 4);
    const std::size_t draws = 100000;

    auto run = [&](const NoiseSpec &spec) {
        Rng nrng(12);
        const Vector clean_h = encode_deterministic(p, x, NoiseSpec{});
        Vector mean(4, 0.0), m2(4, 0.0);
        for (std::size_t k = 0; k < draws; ++k) {
            const NoiseSample s = sample(spec, nrng, 4, 3, &clean_h);
            const ForwardTrace t = forward_noisy(p, x, s);
            for (std::size_t i = 0; i < 4; ++i) {
                const double delta = t.r[i] - mean[i];
                mean[i] += delta / static_cast<double>(k + 1);
                m2[i] += delta * (t.r[i] - mean[i]);
            }
        }
        const Vector expected = reconstruct(p, encode_deterministic(p, x, spec));
        for (std::size_t i = 0; i < 4; ++i) {
            const double se = std::sqrt(m2[i] / draws / draws);
            CHECK(std::abs(mean[i] - expected[i]) < 5.0 * std::max(se, 1e-12));
        }
    };

    SUBCASE("dropout at the activations") {
        NoiseSpec spec;
        spec.activation = NoiseDist::dropout(0.5);
        run(spec);
    }
    SUBCASE("additive gaussian at the activations") {
        NoiseSpec spec;
        spec.activation = NoiseDist::additive_gaussian(0.2);
        run(spec);
    }
    SUBCASE("multiplicative gaussian at the activations") {
        NoiseSpec spec;
        spec.activation = NoiseDist::multiplicative_gaussian(0.2);
        run(spec);
    }
}

TEST_CASE("batched forward/gradients agree with the per-sample path") {
    Rng rng(13);
    const NaeParams p = small_model(rng, 5, 4, Nonlin::sigmoid, Nonlin::linear, false);
    const std::size_t batch = 6;
    Matrix x(batch, 5);
    for (double &v : x.data) v = 2.0 * rng.next_double() - 1.0;

    NoiseSpec spec;
    spec.input = NoiseDist::additive_gaussian(0.1);
    spec.activation = NoiseDist::dropout(0.5);
    std::vector<std::size_t> ids = {3, 1, 4, 0, 5, 2};
    const Rng base(99);
    const BatchNoise bn = sample_batch(spec, base, ids, 7, x, p);
    const BatchTrace bt = forward_noisy_batch(p, x, bn);
    const Gradients bg = gradients_batch(p, bt, x, bn, LossKind::squared);

    Gradients acc;
    acc.dW = Matrix(4, 5);
    acc.db.assign(4, 0.0);
    acc.dWdec = Matrix(5, 4);
    acc.dd.assign(5, 0.0);
    double loss_acc = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
        const Vector xi(x.row_ptr(i), x.row_ptr(i) + 5);
        const NoiseSample s = bn.row(i);
        const ForwardTrace t = forward_noisy(p, xi, s);
        for (std::size_t j = 0; j < 5; ++j)
            CHECK(bt.r(i, j) == doctest::Approx(t.r[j]).epsilon(1e-12));
        loss_acc += loss(xi, t.r, LossKind::squared);
        Gradients g = gradients(p, t, xi, LossKind::squared);
        acc.accumulate(g);
    }
    acc.scale(1.0 / batch);
    loss_acc /= batch;
    CHECK(loss_batch(x, bt.r, LossKind::squared) == doctest::Approx(loss_acc).epsilon(1e-12));
    for (std::size_t i = 0; i < acc.dW.data.size(); ++i)
        CHECK(bg.dW.data[i] == doctest::Approx(acc.dW.data[i]).epsilon(1e-10));
    for (std::size_t i = 0; i < acc.dWdec.data.size(); ++i)
        CHECK(bg.dWdec.data[i] == doctest::Approx(acc.dWdec.data[i]).epsilon(1e-10));
}

TEST_CASE("batch noise is independent of batch composition") {
    Rng rng(14);
    const NaeParams p = small_model(rng, 3, 2, Nonlin::sigmoid, Nonlin::linear, false);
    NoiseSpec spec;
    spec.input = NoiseDist::additive_gaussian(0.2);
    const Rng base(5);
    Matrix x2(2, 3, 0.1);
    Matrix x1(1, 3, 0.1);
    const BatchNoise joint = sample_batch(spec, base, {10, 11}, 3, x2, p);
    const BatchNoise alone = sample_batch(spec, base, {11}, 3, x1, p);
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(joint.eps_i(1, j) == alone.eps_i(0, j));
}

#ifndef NAE_MODEL_HPP
#define NAE_MODEL_HPP

#include <cstdint>

#include "nae/matrix.hpp"
#include "nae/noise.hpp"
#include "nae/nonlinearity.hpp"
#include "nae/rng.hpp"

namespace nae {

enum class LossKind { squared, cross_entropy };

/// Autoencoder parameters. W maps inputs to hidden pre-activations
/// (hidden x input); the decoder weight is input x hidden. With tied
/// weights the decoder is W^T and no separate storage exists, so the
/// constraint holds at all times by construction.
struct NaeParams {
    Matrix W;       // hidden x input
    Vector b;       // hidden
    Matrix Wdec;    // input x hidden; empty when tied
    Vector d;       // input
    Nonlin enc_nonlin = Nonlin::sigmoid;
    Nonlin dec_nonlin = Nonlin::linear;
    bool tied = false;

    /// Bumped by every parameter update; traces remember the version they
    /// were computed against so stale-trace misuse is caught in debug builds.
    std::uint64_t version = 0;

    std::size_t hidden_dim() const { return W.rows; }
    std::size_t input_dim() const { return W.cols; }

    double dec_weight(std::size_t i, std::size_t j) const {
        return tied ? W(j, i) : Wdec(i, j);
    }
    /// ||w'_j||^2, the squared norm of decoder column j (projective field of
    /// hidden unit j).
    double dec_col_sq_norm(std::size_t j) const {
        return tied ? row_squared_norm(W, j) : col_squared_norm(Wdec, j);
    }
    /// W' h (no bias, no nonlinearity).
    Vector dec_apply(const Vector &h) const {
        return tied ? matvec_t(W, h) : matvec(Wdec, h);
    }
    /// W'^T v.
    Vector dec_apply_t(const Vector &v) const {
        return tied ? matvec(W, v) : matvec_t(Wdec, v);
    }

    void bump_version() { ++version; }
    void require_finite() const;
};

/// Weights uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero.
NaeParams init_nae_params(Rng &rng, std::size_t input_dim, std::size_t hidden_dim,
                          Nonlin enc, Nonlin dec, bool tied);

/// Intermediates of one noisy forward pass:
///   x_tilde = x (.) eps_I
///   z       = (W x_tilde + b) (.) eps_Z
///   h_tilde = s_f(z) (.) eps_H
///   r       = s_g(W' h_tilde + d)
struct ForwardTrace {
    Vector x_tilde;
    Vector z;
    Vector h_tilde;
    Vector r;
    NoiseSample noise;
    std::uint64_t params_version = 0;
};

/// Noisy encode; fills everything in the trace except r.
ForwardTrace encode_noisy(const NaeParams &params, const Vector &x,
                          const NoiseSample &noise);

/// s_g(W' h + d).
Vector reconstruct(const NaeParams &params, const Vector &h);

/// Noisy encode + reconstruct; the returned trace has r set.
ForwardTrace forward_noisy(const NaeParams &params, const Vector &x,
                           const NoiseSample &noise);

/// squared: sum_i (x_i - r_i)^2.
/// cross_entropy: -sum_i [x_i log r_i + (1-x_i) log(1-r_i)], with r clamped
/// into [1e-12, 1-1e-12] so saturated sigmoids never produce NaN.
double loss(const Vector &x, const Vector &r, LossKind kind);

struct Gradients {
    Matrix dW;
    Vector db;
    Matrix dWdec;  // empty for tied models (dW holds the combined gradient)
    Vector dd;

    void scale(double alpha);
    void accumulate(const Gradients &other);
    bool all_finite() const;
};

/// Exact gradients of the per-sample noisy loss, treating the realized noise
/// sample as a constant. Multiplicative noise factors enter the chain rule;
/// dropout zeros block gradient flow through masked units. Tied models get
/// the combined encoder+decoder gradient in dW.
Gradients gradients(const NaeParams &params, const ForwardTrace &trace,
                    const Vector &x, LossKind kind);

/// Deterministic test-time encoding: each noise site is replaced by its
/// expectation, i.e. dropout scales the site's value by p and every
/// mean-preserving kind contributes nothing.
Vector encode_deterministic(const NaeParams &params, const Vector &x,
                            const NoiseSpec &spec);

// ---- batched variants used by the trainers ----------------------------

/// Per-row noise for a minibatch; empty matrices mark inactive sites.
struct BatchNoise {
    Matrix eps_i, eps_z, eps_h;
    CombineMode mode_i = CombineMode::additive;
    CombineMode mode_z = CombineMode::additive;
    CombineMode mode_h = CombineMode::additive;

    NoiseSample row(std::size_t i) const;
};

/// Draws one noise realization per row of a batch, splitting the stream per
/// example so results do not depend on batch boundaries.
BatchNoise sample_batch(const NoiseSpec &spec, const Rng &base,
                        const std::vector<std::size_t> &example_ids,
                        std::uint64_t epoch, const Matrix &x,
                        const NaeParams &params);

struct BatchTrace {
    Matrix x_tilde;  // B x input
    Matrix z;        // B x hidden (post eps_Z)
    Matrix h_tilde;  // B x hidden (post eps_H)
    Matrix r;        // B x input
    std::uint64_t params_version = 0;
};

BatchTrace forward_noisy_batch(const NaeParams &params, const Matrix &x,
                               const BatchNoise &noise);

/// Mean per-sample loss over the batch.
double loss_batch(const Matrix &x, const Matrix &r, LossKind kind);

/// Gradients of the batch-mean loss.
Gradients gradients_batch(const NaeParams &params, const BatchTrace &trace,
                          const Matrix &x, const BatchNoise &noise, LossKind kind);

Matrix encode_deterministic_batch(const NaeParams &params, const Matrix &x,
                                  const NoiseSpec &spec);
Matrix reconstruct_batch(const NaeParams &params, const Matrix &h);

}  // namespace nae

#endif

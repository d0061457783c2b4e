#ifndef NAE_NOISE_HPP
#define NAE_NOISE_HPP

#include <optional>
#include <string>

#include "nae/matrix.hpp"
#include "nae/nonlinearity.hpp"
#include "nae/rng.hpp"

namespace nae {

/// Where a noise source attaches in the encoder.
enum class NoiseSite { input, pre_activation, activation };

enum class NoiseKind {
    none,
    additive_gaussian,        // x + N(0, var)
    multiplicative_gaussian,  // x * N(1, var); the mean is fixed at 1
    dropout,                  // x * Bernoulli(p)
    poisson_like,             // x + N(0, clean activation); activation site only
};

enum class CombineMode { additive, multiplicative };

/// One noise source. The combination mode is a fixed property of the kind:
/// Gaussian noise is additive unless declared multiplicative_gaussian,
/// dropout is multiplicative, poisson_like is additive.
struct NoiseDist {
    NoiseKind kind = NoiseKind::none;
    double var = 0.0;  // gaussian kinds
    double p = 1.0;    // dropout inclusion probability

    static NoiseDist none() { return {}; }
    static NoiseDist additive_gaussian(double var);
    static NoiseDist multiplicative_gaussian(double var);
    static NoiseDist dropout(double p);
    static NoiseDist poisson_like();

    CombineMode mode() const;
    bool active() const { return kind != NoiseKind::none; }
    /// Every kind except dropout satisfies E[x~ | x] = x.
    bool mean_preserving() const { return kind != NoiseKind::dropout; }
    /// Factor the site's value is scaled by at test time (expectation of the
    /// multiplicative corruption; 1 for mean-preserving kinds).
    double expectation_scale() const { return kind == NoiseKind::dropout ? p : 1.0; }

    std::string to_string() const;                        // e.g. "gaussian:0.1"
    static NoiseDist parse(const std::string &text);      // inverse of to_string
};

/// The noise tuple (eps_I, eps_Z, eps_H) attached to input, pre-nonlinearity
/// hidden inputs, and hidden activations.
struct NoiseSpec {
    NoiseDist input;
    NoiseDist pre_activation;
    NoiseDist activation;

    bool any_active() const {
        return input.active() || pre_activation.active() || activation.active();
    }
    /// poisson_like is only valid at the activation site; throws otherwise.
    void validate() const;
};

/// One joint realization of the tuple. Inactive sites carry empty vectors
/// and are skipped entirely when applied, so an all-none sample leaves the
/// forward pass bit-identical to a vanilla autoencoder's.
struct NoiseSample {
    Vector eps_i, eps_z, eps_h;
    CombineMode mode_i = CombineMode::additive;
    CombineMode mode_z = CombineMode::additive;
    CombineMode mode_h = CombineMode::additive;

    static NoiseSample none() { return {}; }
};

/// Draws one joint noise realization. clean_h must be supplied iff the
/// activation kind is poisson_like (its per-unit variance equals the clean
/// activation, clamped at 0 for negative activations).
NoiseSample sample(const NoiseSpec &spec, Rng &rng, std::size_t input_dim,
                   std::size_t hidden_dim,
                   const Vector *clean_h = nullptr);

/// Elementwise value+eps or value*eps. Lengths must match.
Vector apply(const Vector &value, const Vector &eps, CombineMode mode);

/// First-order Taylor transform of additive Gaussian pre-nonlinearity noise
/// into per-unit hidden activation noise variance:
///   Var(eps_H,i) ~= s_f'(w_i.x)^2 * var_z.
/// Only additive Gaussian dist_z is supported.
Vector equivalent_hidden_noise_from_prenoise(const Matrix &w, const Vector &x,
                                             const NoiseDist &dist_z, Nonlin f);

/// Gaussian input noise with covariance sigma propagates through the linear
/// encoder part to pre-nonlinearity noise with covariance W Sigma W^T.
/// sigma_in must be symmetric positive semidefinite.
Matrix equivalent_prenoise_covariance_from_input(const Matrix &w, const Matrix &sigma_in);
Matrix equivalent_prenoise_covariance_from_input(const Matrix &w, double sigma_sq);

}  // namespace nae

#endif

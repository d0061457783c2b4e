#ifndef NAE_PENALTIES_HPP
#define NAE_PENALTIES_HPP

#include <vector>

#include "nae/model.hpp"
#include "nae/noise.hpp"

namespace nae {

/// Analytic marginalized-noise penalties. Each one is the (exact or
/// small-variance) expected excess reconstruction loss caused by a noise
/// source, expressed as a deterministic function of the parameters, so the
/// noisy training objective can be replaced by clean loss + penalty.
///
/// Notation: z = Wx + b, h = s_f(z), w_i = i-th encoder row, w'_i = i-th
/// decoder column, c_i = ||w'_i||^2.

/// Exact marginalization of hidden-activation noise with per-unit
/// conditional variances var_h (linear decoder only):
///   sum_i var_h[i] * ||w'_i||^2.
double penalty_hidden(const NaeParams &params, const Vector &var_h);

/// Additive Gaussian pre-nonlinearity noise, first order:
///   var_z * sum_i (s_f'(z_i) ||w'_i||)^2.
double penalty_prenoise(const NaeParams &params, const Vector &x, double var_z);

/// Isotropic Gaussian input noise, first order:
///   var_x * || W W^T diag(s_f'(z)) ||_F^2.
/// The variance enters linearly: the marginalized excess loss is first order
/// in var_x, which the small-variance Monte Carlo oracle confirms.
double penalty_input(const NaeParams &params, const Vector &x, double var_x);

/// Tied-weights specialization of the input-noise penalty:
///   var_x * sum_ij (w_i.w_j)^2 s_f'(z_i)^2.
/// Encourages hidden units to learn orthogonal representations.
double penalty_tied_gaussian(const NaeParams &params, const Vector &x, double var_x);

/// Squared Frobenius norm of the encoder Jacobian:
///   sum_i s_f'(z_i)^2 ||w_i||^2   (encoder rows).
double penalty_contractive(const NaeParams &params, const Vector &x);

/// Dropout projective-field penalty: p(1-p) * sum_i (h_i ||w'_i||)^2.
double penalty_dropout_pf(const NaeParams &params, const Vector &h, double p);

/// Poisson-like sparsity penalty: sum_i h_i ||w'_i||^2. Requires h >= 0.
double penalty_poisson_sparse(const NaeParams &params, const Vector &h);

/// Per-unit conditional variance Var[h~_i | h_i] for an activation-site
/// noise distribution (the var_h argument of penalty_hidden).
Vector hidden_variance_profile(const NoiseDist &dist, const Vector &h);

enum class PenaltyKind {
    hidden,
    prenoise,
    input,
    tied_gaussian,
    contractive,
    dropout_pf,
    poisson_sparse,
};

struct PenaltyTerm {
    PenaltyKind kind;
    double weight = 1.0;
    // Parameters the formula needs: hidden uses the full activation
    // distribution; prenoise/input/tied_gaussian read .var; dropout_pf
    // reads .p.
    NoiseDist noise;
};

struct PenaltyConfig {
    std::vector<PenaltyTerm> terms;

    bool empty() const;  // no term with positive weight
    /// Checks weights are non-negative and each term is applicable to the
    /// model (linear decoder, tied weights where required).
    void validate(const NaeParams &params) const;
};

/// Weighted sum of the configured penalties at (x, h = s_f(Wx+b)).
double penalty_total(const PenaltyConfig &config, const NaeParams &params,
                     const Vector &x, const Vector &h);

/// Exact gradients of the weighted penalty sum w.r.t. all parameters,
/// including the chain through h(W, b, x).
Gradients penalty_gradients(const PenaltyConfig &config, const NaeParams &params,
                            const Vector &x, const Vector &h);

}  // namespace nae

#endif

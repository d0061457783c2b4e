#ifndef NAE_MLP_HPP
#define NAE_MLP_HPP

#include <cstdint>
#include <vector>

#include "nae/matrix.hpp"
#include "nae/noise.hpp"
#include "nae/nonlinearity.hpp"
#include "nae/rng.hpp"

namespace nae {

struct MlpLayer {
    Matrix W;  // out x in
    Vector b;  // out
    Nonlin act = Nonlin::relu;
};

/// Feedforward classifier: hidden layers followed by a softmax output
/// layer over the class count.
struct MlpParams {
    std::vector<MlpLayer> layers;
    std::uint64_t version = 0;

    std::size_t input_dim() const { return layers.front().W.cols; }
    std::size_t output_dim() const { return layers.back().W.rows; }
    std::size_t n_hidden_layers() const { return layers.size() - 1; }
    void bump_version() { ++version; }
    void require_finite() const;
};

/// Hidden layers of the given widths (possibly empty -> plain softmax
/// regression) and a softmax layer over `classes`. Weights uniform on
/// [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero.
MlpParams init_mlp(Rng &rng, std::size_t input_dim,
                   const std::vector<std::size_t> &widths, std::size_t classes,
                   Nonlin hidden_act);

/// Per-row softmax of logits.
Matrix softmax_rows(const Matrix &logits);

/// Class probabilities with test-time expectation scaling for `spec`
/// (input scaled by the input site's expectation, every hidden activation
/// by the activation site's). Mean-preserving noise changes nothing.
Matrix mlp_predict(const MlpParams &mlp, const Matrix &x, const NoiseSpec &spec);

/// Mean cross-entropy of predicted probabilities vs integer labels.
double softmax_cross_entropy(const Matrix &probs, const std::vector<int> &labels);

/// Training-time noisy forward state. MLP noise uses the input site (once)
/// and the activation site (each hidden layer); pre-activation noise is not
/// supported in the supervised nets.
struct MlpTrace {
    Matrix input;                // post input-noise
    std::vector<Matrix> z;       // pre-activations per layer
    std::vector<Matrix> a;       // post-noise activations per hidden layer
    Matrix probs;                // softmax output
    std::vector<Matrix> eps_a;   // per hidden layer; empty when inactive
    CombineMode mode_a = CombineMode::additive;
    std::uint64_t params_version = 0;
};

/// Noisy forward with per-example noise streams split from `base` (keyed by
/// epoch and example id, so noise is independent of batch order).
MlpTrace mlp_forward_noisy(const MlpParams &mlp, const Matrix &x,
                           const NoiseSpec &spec, const Rng &base,
                           const std::vector<std::size_t> &example_ids,
                           std::uint64_t epoch);

/// Re-runs the forward pass with a previously recorded noise realization
/// (noisy input and per-layer activation noise) held fixed. This is the
/// function the analytic gradients differentiate, so finite differences of
/// it validate them even for activation-dependent (poisson) noise.
MlpTrace mlp_forward_replay(const MlpParams &mlp, const Matrix &noisy_input,
                            const std::vector<Matrix> &eps_a, CombineMode mode_a);

struct MlpGradients {
    std::vector<Matrix> dW;
    std::vector<Vector> db;
    void scale(double alpha);
    bool all_finite() const;
};

/// Gradients of the batch-mean cross-entropy, realized noise held constant.
/// If `first_trainable` > 0, layers below it get zero gradients (frozen).
MlpGradients mlp_gradients(const MlpParams &mlp, const MlpTrace &trace,
                           const std::vector<int> &labels,
                           std::size_t first_trainable = 0);

}  // namespace nae

#endif

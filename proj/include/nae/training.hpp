#ifndef NAE_TRAINING_HPP
#define NAE_TRAINING_HPP

#include <string>
#include <utility>
#include <vector>

#include "nae/data_io.hpp"
#include "nae/mlp.hpp"
#include "nae/model.hpp"
#include "nae/penalties.hpp"

namespace nae {

enum class Objective { stochastic, analytic, both };

struct TrainConfig {
    double learning_rate = 0.1;
    double momentum = 0.9;      // classical momentum; the paper found it critical
    bool nesterov = false;
    double lr_decay = 1.0;      // multiplicative per epoch
    std::size_t batch_size = 20;
    std::size_t epochs = 10;
    std::uint64_t seed = 0;
    bool shuffle = true;
    NoiseSpec noise;
    PenaltyConfig penalties;
    Objective objective = Objective::stochastic;
    LossKind loss = LossKind::squared;
    // Training aborts (keeping the last epoch-end parameters) if the epoch
    // loss goes non-finite or exceeds divergence_factor x the first epoch's.
    double divergence_factor = 10.0;
    // Fine-tuning only: epochs of head-only training before joint training.
    std::size_t head_epochs = 0;

    void validate() const;
};

struct EpochStats {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double penalty = 0.0;
    double val_metric = 0.0;  // NaN when no validation set was given
    double seconds = 0.0;
};

struct TrainLog {
    std::vector<EpochStats> epochs;
    bool diverged = false;

    /// CSV columns: epoch,loss,penalty,val_metric,seconds
    void to_csv(const std::string &path) const;
};

/// v <- mu*v - lr*g; theta <- theta + v (classical momentum).
/// Nesterov variant applies theta <- theta + mu*v_new - lr*g.
void sgd_momentum_step(Matrix &theta, const Matrix &grad, Matrix &velocity,
                       double lr, double mu, bool nesterov = false);
void sgd_momentum_step(Vector &theta, const Vector &grad, Vector &velocity,
                       double lr, double mu, bool nesterov = false);

/// Minibatch SGD on the autoencoder objective. Stochastic mode draws fresh
/// noise per example per presentation; analytic mode trains the clean
/// reconstruction plus the weighted penalties of Eq.-style marginalization;
/// `both` sums the two. Deterministic given config.seed.
/// val (optional) reports the clean reconstruction loss per epoch.
std::pair<NaeParams, TrainLog> train_nae(const Dataset &data, NaeParams init,
                                         const TrainConfig &config,
                                         const Dataset *val = nullptr);

/// Builds [encoder from `features`, softmax head] and trains it with
/// cross-entropy. config.noise (input + activation sites) is injected during
/// training; evaluation always uses expectation scaling. config.head_epochs
/// of head-only training run before the config.epochs joint epochs.
/// val_metric is the misclassification fraction on `val`.
std::pair<MlpParams, TrainLog> fine_tune_classifier(const NaeParams &features,
                                                    const Dataset &data,
                                                    std::size_t classes,
                                                    const TrainConfig &config,
                                                    const Dataset *val = nullptr);

/// Purely supervised network with relu hidden layers of the given widths
/// (empty -> softmax regression) and noise at the input and every hidden
/// activation.
std::pair<MlpParams, TrainLog> train_supervised_deep(
    const Dataset &data, const std::vector<std::size_t> &widths,
    const NoiseSpec &noise, const TrainConfig &config,
    const Dataset *val = nullptr);

/// Generic MLP trainer behind the two supervised entry points.
std::pair<MlpParams, TrainLog> train_mlp(MlpParams mlp, const Dataset &data,
                                         const TrainConfig &config,
                                         const Dataset *val = nullptr);

}  // namespace nae

#endif

#include "nae/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace nae {

namespace {

// Independent stream salts so that consuming one stream (e.g. noise draws)
// never shifts another (shuffling, init); dropout with p=1 then follows the
// exact trajectory of a no-noise run.
constexpr std::uint64_t kShuffleSalt = 0x5348554646ULL;  // "SHUFF"
constexpr std::uint64_t kNoiseSalt = 0x4E4F495345ULL;    // "NOISE"
constexpr std::uint64_t kHeadSalt = 0x48454144ULL;       // "HEAD"

std::vector<std::size_t> epoch_order(std::size_t n, bool shuffle, const Rng &base,
                                     std::uint64_t epoch) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    if (shuffle) {
        Rng r = base.split(kShuffleSalt).split(epoch);
        for (std::size_t i = n; i > 1; --i)
            std::swap(order[i - 1], order[r.uniform_index(i)]);
    }
    return order;
}

Matrix gather_rows(const Matrix &m, const std::vector<std::size_t> &ids,
                   std::size_t begin, std::size_t end) {
    Matrix out(end - begin, m.cols);
    for (std::size_t k = begin; k < end; ++k)
        std::copy(m.row_ptr(ids[k]), m.row_ptr(ids[k]) + m.cols,
                  out.row_ptr(k - begin));
    return out;
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

void TrainConfig::validate() const {
    if (learning_rate <= 0.0)
        throw std::invalid_argument("learning_rate must be positive");
    if (momentum < 0.0 || momentum >= 1.0)
        throw std::invalid_argument("momentum must be in [0,1)");
    if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
    if (lr_decay <= 0.0) throw std::invalid_argument("lr_decay must be positive");
    noise.validate();
}

void TrainLog::to_csv(const std::string &path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "epoch,loss,penalty,val_metric,seconds\n";
    for (const EpochStats &e : epochs)
        out << e.epoch << "," << e.train_loss << "," << e.penalty << ","
            << e.val_metric << "," << e.seconds << "\n";
}

void sgd_momentum_step(Matrix &theta, const Matrix &grad, Matrix &velocity,
                       double lr, double mu, bool nesterov) {
    if (theta.rows != grad.rows || theta.cols != grad.cols)
        throw std::invalid_argument("sgd step: shape mismatch");
    if (velocity.empty()) velocity = Matrix(theta.rows, theta.cols);
    for (std::size_t i = 0; i < theta.data.size(); ++i) {
        velocity.data[i] = mu * velocity.data[i] - lr * grad.data[i];
        theta.data[i] += nesterov ? mu * velocity.data[i] - lr * grad.data[i]
                                  : velocity.data[i];
    }
}

void sgd_momentum_step(Vector &theta, const Vector &grad, Vector &velocity,
                       double lr, double mu, bool nesterov) {
    if (theta.size() != grad.size())
        throw std::invalid_argument("sgd step: length mismatch");
    if (velocity.empty()) velocity.assign(theta.size(), 0.0);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        velocity[i] = mu * velocity[i] - lr * grad[i];
        theta[i] += nesterov ? mu * velocity[i] - lr * grad[i] : velocity[i];
    }
}

std::pair<NaeParams, TrainLog> train_nae(const Dataset &data, NaeParams init,
                                         const TrainConfig &config,
                                         const Dataset *val) {
    config.validate();
    if (data.size() == 0) throw std::invalid_argument("train_nae: empty dataset");
    if (data.dim() != init.input_dim())
        throw std::invalid_argument("train_nae: data dim " + std::to_string(data.dim()) +
                                    " does not match model input " +
                                    std::to_string(init.input_dim()));
    const bool stochastic = config.objective != Objective::analytic;
    const bool analytic = config.objective != Objective::stochastic;
    const bool has_penalties = analytic && !config.penalties.empty();
    if (has_penalties) config.penalties.validate(init);

    NaeParams params = std::move(init);
    TrainLog log;
    const Rng base(config.seed);
    const Rng noise_base = base.split(kNoiseSalt);
    const NoiseSpec no_noise;

    Gradients velocity;
    velocity.dW = Matrix(params.hidden_dim(), params.input_dim());
    velocity.db.assign(params.hidden_dim(), 0.0);
    if (!params.tied) velocity.dWdec = Matrix(params.input_dim(), params.hidden_dim());
    velocity.dd.assign(params.input_dim(), 0.0);

    NaeParams last_good = params;
    double first_epoch_loss = std::numeric_limits<double>::quiet_NaN();
    double lr = config.learning_rate;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const double t0 = now_seconds();
        const std::vector<std::size_t> order =
            epoch_order(data.size(), config.shuffle, base, epoch);
        double loss_sum = 0.0;
        double penalty_sum = 0.0;
        std::size_t batches = 0;
        bool bad = false;

        for (std::size_t begin = 0; begin < order.size() && !bad;
             begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            const std::vector<std::size_t> ids(order.begin() + begin,
                                               order.begin() + end);
            const Matrix x = gather_rows(data.samples, ids, 0, ids.size());

            BatchNoise bn;
            if (stochastic && config.noise.any_active())
                bn = sample_batch(config.noise, noise_base, ids, epoch, x, params);
            // Analytic mode never samples noise, so this forward is clean there.
            const BatchTrace trace = forward_noisy_batch(params, x, bn);
            double batch_loss = loss_batch(x, trace.r, config.loss);
            Gradients g = gradients_batch(params, trace, x, bn, config.loss);

            if (has_penalties) {
                // Penalties act on the clean activations h = s_f(Wx + b).
                Matrix h_clean = encode_deterministic_batch(params, x, no_noise);
                double pen = 0.0;
                for (std::size_t r = 0; r < x.rows; ++r) {
                    const Vector xr(x.row_ptr(r), x.row_ptr(r) + x.cols);
                    const Vector hr(h_clean.row_ptr(r), h_clean.row_ptr(r) + h_clean.cols);
                    pen += penalty_total(config.penalties, params, xr, hr);
                    Gradients pg = penalty_gradients(config.penalties, params, xr, hr);
                    pg.scale(1.0 / static_cast<double>(x.rows));
                    g.accumulate(pg);
                }
                pen /= static_cast<double>(x.rows);
                penalty_sum += pen;
                batch_loss += pen;
            }

            if (!std::isfinite(batch_loss) || !g.all_finite()) {
                bad = true;
                break;
            }
            loss_sum += batch_loss;
            ++batches;

            sgd_momentum_step(params.W, g.dW, velocity.dW, lr, config.momentum,
                              config.nesterov);
            sgd_momentum_step(params.b, g.db, velocity.db, lr, config.momentum,
                              config.nesterov);
            if (!params.tied)
                sgd_momentum_step(params.Wdec, g.dWdec, velocity.dWdec, lr,
                                  config.momentum, config.nesterov);
            sgd_momentum_step(params.d, g.dd, velocity.dd, lr, config.momentum,
                              config.nesterov);
            params.bump_version();
        }

        const double epoch_loss =
            batches > 0 ? loss_sum / static_cast<double>(batches)
                        : std::numeric_limits<double>::quiet_NaN();
        if (std::isnan(first_epoch_loss) && std::isfinite(epoch_loss))
            first_epoch_loss = epoch_loss;
        if (bad || !std::isfinite(epoch_loss) ||
            (std::isfinite(first_epoch_loss) &&
             epoch_loss > config.divergence_factor * first_epoch_loss)) {
            log.diverged = true;
            params = last_good;  // abort with the last good checkpoint
            break;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = epoch_loss;
        stats.penalty = batches > 0 ? penalty_sum / static_cast<double>(batches) : 0.0;
        stats.val_metric = std::numeric_limits<double>::quiet_NaN();
        if (val != nullptr && val->size() > 0) {
            const Matrix h = encode_deterministic_batch(params, val->samples, config.noise);
            const Matrix r = reconstruct_batch(params, h);
            stats.val_metric = loss_batch(val->samples, r, config.loss);
        }
        stats.seconds = now_seconds() - t0;
        log.epochs.push_back(stats);
        last_good = params;
        lr *= config.lr_decay;
    }
    return {std::move(params), std::move(log)};
}

std::pair<MlpParams, TrainLog> train_mlp(MlpParams mlp, const Dataset &data,
                                         const TrainConfig &config,
                                         const Dataset *val) {
    config.validate();
    if (data.size() == 0) throw std::invalid_argument("train_mlp: empty dataset");
    if (!data.labeled()) throw std::invalid_argument("train_mlp: dataset has no labels");
    const std::size_t classes = mlp.output_dim();
    for (int l : data.labels)
        if (l < 0 || static_cast<std::size_t>(l) >= classes)
            throw std::invalid_argument("label " + std::to_string(l) +
                                        " out of range [0," + std::to_string(classes) +
                                        ")");

    TrainLog log;
    const Rng base(config.seed);
    const Rng noise_base = base.split(kNoiseSalt);

    MlpGradients velocity;
    velocity.dW.resize(mlp.layers.size());
    velocity.db.resize(mlp.layers.size());
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        velocity.dW[l] = Matrix(mlp.layers[l].W.rows, mlp.layers[l].W.cols);
        velocity.db[l].assign(mlp.layers[l].b.size(), 0.0);
    }

    MlpParams last_good = mlp;
    double first_epoch_loss = std::numeric_limits<double>::quiet_NaN();
    const std::size_t total_epochs = config.head_epochs + config.epochs;
    double lr = config.learning_rate;

    for (std::size_t epoch = 1; epoch <= total_epochs; ++epoch) {
        const double t0 = now_seconds();
        const bool head_only = epoch <= config.head_epochs;
        const std::size_t first_trainable = head_only ? mlp.layers.size() - 1 : 0;
        const std::uint64_t order_salt = head_only ? epoch + kHeadSalt : epoch;
        const std::vector<std::size_t> order =
            epoch_order(data.size(), config.shuffle, base, order_salt);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        bool bad = false;

        for (std::size_t begin = 0; begin < order.size() && !bad;
             begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            const std::vector<std::size_t> ids(order.begin() + begin,
                                               order.begin() + end);
            const Matrix x = gather_rows(data.samples, ids, 0, ids.size());
            std::vector<int> labels(ids.size());
            for (std::size_t k = 0; k < ids.size(); ++k)
                labels[k] = data.labels[ids[k]];

            const MlpTrace trace =
                mlp_forward_noisy(mlp, x, config.noise, noise_base, ids, epoch);
            const double batch_loss = softmax_cross_entropy(trace.probs, labels);
            const MlpGradients g = mlp_gradients(mlp, trace, labels, first_trainable);
            if (!std::isfinite(batch_loss) || !g.all_finite()) {
                bad = true;
                break;
            }
            loss_sum += batch_loss;
            ++batches;
            for (std::size_t l = first_trainable; l < mlp.layers.size(); ++l) {
                sgd_momentum_step(mlp.layers[l].W, g.dW[l], velocity.dW[l], lr,
                                  config.momentum, config.nesterov);
                sgd_momentum_step(mlp.layers[l].b, g.db[l], velocity.db[l], lr,
                                  config.momentum, config.nesterov);
            }
            mlp.bump_version();
        }

        const double epoch_loss =
            batches > 0 ? loss_sum / static_cast<double>(batches)
                        : std::numeric_limits<double>::quiet_NaN();
        if (std::isnan(first_epoch_loss) && std::isfinite(epoch_loss))
            first_epoch_loss = epoch_loss;
        if (bad || !std::isfinite(epoch_loss) ||
            (std::isfinite(first_epoch_loss) &&
             epoch_loss > config.divergence_factor * first_epoch_loss)) {
            log.diverged = true;
            mlp = last_good;
            break;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = epoch_loss;
        stats.val_metric = std::numeric_limits<double>::quiet_NaN();
        if (val != nullptr && val->size() > 0 && val->labeled()) {
            const Matrix probs = mlp_predict(mlp, val->samples, config.noise);
            std::size_t errors = 0;
            for (std::size_t i = 0; i < probs.rows; ++i) {
                std::size_t arg = 0;
                for (std::size_t j = 1; j < probs.cols; ++j)
                    if (probs(i, j) > probs(i, arg)) arg = j;
                if (static_cast<int>(arg) != val->labels[i]) ++errors;
            }
            stats.val_metric =
                static_cast<double>(errors) / static_cast<double>(probs.rows);
        }
        stats.seconds = now_seconds() - t0;
        log.epochs.push_back(stats);
        last_good = mlp;
        if (!head_only) lr *= config.lr_decay;
    }
    return {std::move(mlp), std::move(log)};
}

std::pair<MlpParams, TrainLog> fine_tune_classifier(const NaeParams &features,
                                                    const Dataset &data,
                                                    std::size_t classes,
                                                    const TrainConfig &config,
                                                    const Dataset *val) {
    if (data.dim() != features.input_dim())
        throw std::invalid_argument("fine_tune_classifier: data dim mismatch");
    if (classes < 2)
        throw std::invalid_argument("fine_tune_classifier: need at least 2 classes");
    // Encoder layer from the pretrained autoencoder, fresh softmax head on top.
    MlpLayer enc;
    enc.W = features.W;
    enc.b = features.b;
    enc.act = features.enc_nonlin;
    MlpLayer head;
    head.W = Matrix(classes, features.hidden_dim());
    head.b.assign(classes, 0.0);
    head.act = Nonlin::softmax;
    Rng init_rng(config.seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(features.hidden_dim()));
    for (double &v : head.W.data) v = (2.0 * init_rng.next_double() - 1.0) * bound;
    MlpParams mlp;
    mlp.layers = {std::move(enc), std::move(head)};
    return train_mlp(std::move(mlp), data, config, val);
}

std::pair<MlpParams, TrainLog> train_supervised_deep(
    const Dataset &data, const std::vector<std::size_t> &widths,
    const NoiseSpec &noise, const TrainConfig &config, const Dataset *val) {
    if (!data.labeled())
        throw std::invalid_argument("train_supervised_deep: dataset has no labels");
    int max_label = 0;
    for (int l : data.labels) max_label = std::max(max_label, l);
    const std::size_t classes = std::max<std::size_t>(2, std::size_t(max_label) + 1);
    Rng init_rng(config.seed);
    MlpParams mlp = init_mlp(init_rng, data.dim(), widths, classes, Nonlin::relu);
    TrainConfig cfg = config;
    cfg.noise = noise;
    return train_mlp(std::move(mlp), data, cfg, val);
}

}  // namespace nae

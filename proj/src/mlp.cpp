#include "nae/mlp.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace nae {

namespace {

void add_row_vector(Matrix &m, const Vector &v) {
    for (std::size_t i = 0; i < m.rows; ++i) {
        double *row = m.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) row[j] += v[j];
    }
}

Vector column_sums(const Matrix &m) {
    Vector s(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double *row = m.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) s[j] += row[j];
    }
    return s;
}

void check_labels(const std::vector<int> &labels, std::size_t n, std::size_t classes) {
    if (labels.size() != n)
        throw std::invalid_argument("labels length " + std::to_string(labels.size()) +
                                    " does not match batch size " + std::to_string(n));
    for (int l : labels)
        if (l < 0 || static_cast<std::size_t>(l) >= classes)
            throw std::invalid_argument("label " + std::to_string(l) +
                                        " out of range [0," + std::to_string(classes) + ")");
}

void require_mlp_noise(const NoiseSpec &spec) {
    if (spec.pre_activation.active())
        throw std::invalid_argument(
            "supervised networks support input and activation noise only");
    spec.validate();
}

}  // namespace

void MlpParams::require_finite() const {
    for (const MlpLayer &l : layers) {
        l.W.require_finite("mlp weights");
        if (!nae::all_finite(l.b))
            throw std::runtime_error("mlp bias contains a non-finite value");
    }
}

MlpParams init_mlp(Rng &rng, std::size_t input_dim,
                   const std::vector<std::size_t> &widths, std::size_t classes,
                   Nonlin hidden_act) {
    if (classes < 2) throw std::invalid_argument("init_mlp: need at least 2 classes");
    MlpParams mlp;
    std::size_t in = input_dim;
    for (std::size_t w : widths) {
        MlpLayer layer;
        layer.W = Matrix(w, in);
        layer.b.assign(w, 0.0);
        layer.act = hidden_act;
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        for (double &v : layer.W.data) v = (2.0 * rng.next_double() - 1.0) * bound;
        mlp.layers.push_back(std::move(layer));
        in = w;
    }
    MlpLayer out;
    out.W = Matrix(classes, in);
    out.b.assign(classes, 0.0);
    out.act = Nonlin::softmax;
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double &v : out.W.data) v = (2.0 * rng.next_double() - 1.0) * bound;
    mlp.layers.push_back(std::move(out));
    return mlp;
}

Matrix softmax_rows(const Matrix &logits) {
    Matrix p = logits;
    for (std::size_t i = 0; i < p.rows; ++i) {
        double *row = p.row_ptr(i);
        double mx = row[0];
        for (std::size_t j = 1; j < p.cols; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < p.cols; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        for (std::size_t j = 0; j < p.cols; ++j) row[j] /= sum;
    }
    return p;
}

Matrix mlp_predict(const MlpParams &mlp, const Matrix &x, const NoiseSpec &spec) {
    require_mlp_noise(spec);
    Matrix a = x;
    const double si = spec.input.expectation_scale();
    if (si != 1.0) scale_in_place(a, si);
    const double sh = spec.activation.expectation_scale();
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        const MlpLayer &layer = mlp.layers[l];
        Matrix z = matmul_nt(a, layer.W);
        add_row_vector(z, layer.b);
        if (layer.act == Nonlin::softmax) return softmax_rows(z);
        for (double &v : z.data) v = apply_nonlin(layer.act, v);
        if (sh != 1.0) scale_in_place(z, sh);
        a = std::move(z);
    }
    throw std::logic_error("mlp has no softmax output layer");
}

double softmax_cross_entropy(const Matrix &probs, const std::vector<int> &labels) {
    check_labels(labels, probs.rows, probs.cols);
    double total = 0.0;
    for (std::size_t i = 0; i < probs.rows; ++i) {
        const double p = std::max(1e-300, probs(i, static_cast<std::size_t>(labels[i])));
        total -= std::log(p);
    }
    return total / static_cast<double>(probs.rows);
}

MlpTrace mlp_forward_noisy(const MlpParams &mlp, const Matrix &x,
                           const NoiseSpec &spec, const Rng &base,
                           const std::vector<std::size_t> &example_ids,
                           std::uint64_t epoch) {
    require_mlp_noise(spec);
    if (example_ids.size() != x.rows)
        throw std::invalid_argument("example_ids length does not match batch");
    MlpTrace t;
    t.params_version = mlp.version;
    t.mode_a = spec.activation.mode();

    const Rng epoch_rng = base.split(epoch);
    std::vector<Rng> streams;
    streams.reserve(x.rows);
    for (std::size_t id : example_ids) streams.push_back(epoch_rng.split(id));

    t.input = x;
    if (spec.input.active()) {
        const CombineMode mi = spec.input.mode();
        for (std::size_t i = 0; i < x.rows; ++i) {
            const NoiseSpec in_only{spec.input, NoiseDist::none(), NoiseDist::none()};
            const NoiseSample s = sample(in_only, streams[i], x.cols, 0, nullptr);
            double *row = t.input.row_ptr(i);
            for (std::size_t j = 0; j < x.cols; ++j)
                row[j] = mi == CombineMode::additive ? row[j] + s.eps_i[j]
                                                     : row[j] * s.eps_i[j];
        }
    }

    Matrix a = t.input;
    const std::size_t n_hidden = mlp.n_hidden_layers();
    t.z.resize(mlp.layers.size());
    t.a.resize(n_hidden);
    t.eps_a.resize(n_hidden);
    for (std::size_t l = 0; l < n_hidden; ++l) {
        const MlpLayer &layer = mlp.layers[l];
        Matrix z = matmul_nt(a, layer.W);
        add_row_vector(z, layer.b);
        Matrix act = z;
        for (double &v : act.data) v = apply_nonlin(layer.act, v);
        if (spec.activation.active()) {
            Matrix eps(act.rows, act.cols);
            for (std::size_t i = 0; i < act.rows; ++i) {
                Vector clean(act.row_ptr(i), act.row_ptr(i) + act.cols);
                const NoiseSpec act_only{NoiseDist::none(), NoiseDist::none(),
                                         spec.activation};
                const NoiseSample s =
                    sample(act_only, streams[i], 0, act.cols, &clean);
                std::copy(s.eps_h.begin(), s.eps_h.end(), eps.row_ptr(i));
            }
            if (t.mode_a == CombineMode::additive) {
                for (std::size_t i = 0; i < act.data.size(); ++i)
                    act.data[i] += eps.data[i];
            } else {
                for (std::size_t i = 0; i < act.data.size(); ++i)
                    act.data[i] *= eps.data[i];
            }
            t.eps_a[l] = std::move(eps);
        }
        t.z[l] = std::move(z);
        t.a[l] = act;
        a = std::move(act);
    }

    const MlpLayer &out = mlp.layers.back();
    Matrix logits = matmul_nt(a, out.W);
    add_row_vector(logits, out.b);
    t.z.back() = logits;
    t.probs = softmax_rows(logits);
    return t;
}

MlpTrace mlp_forward_replay(const MlpParams &mlp, const Matrix &noisy_input,
                            const std::vector<Matrix> &eps_a, CombineMode mode_a) {
    const std::size_t n_hidden = mlp.n_hidden_layers();
    if (eps_a.size() != n_hidden)
        throw std::invalid_argument("mlp_forward_replay: eps_a layer count mismatch");
    MlpTrace t;
    t.params_version = mlp.version;
    t.mode_a = mode_a;
    t.input = noisy_input;
    t.eps_a = eps_a;
    t.z.resize(mlp.layers.size());
    t.a.resize(n_hidden);

    Matrix a = noisy_input;
    for (std::size_t l = 0; l < n_hidden; ++l) {
        const MlpLayer &layer = mlp.layers[l];
        Matrix z = matmul_nt(a, layer.W);
        add_row_vector(z, layer.b);
        Matrix act = z;
        for (double &v : act.data) v = apply_nonlin(layer.act, v);
        if (!eps_a[l].empty()) {
            if (mode_a == CombineMode::additive) {
                for (std::size_t i = 0; i < act.data.size(); ++i)
                    act.data[i] += eps_a[l].data[i];
            } else {
                for (std::size_t i = 0; i < act.data.size(); ++i)
                    act.data[i] *= eps_a[l].data[i];
            }
        }
        t.z[l] = std::move(z);
        t.a[l] = act;
        a = std::move(act);
    }
    const MlpLayer &out = mlp.layers.back();
    Matrix logits = matmul_nt(a, out.W);
    add_row_vector(logits, out.b);
    t.z.back() = logits;
    t.probs = softmax_rows(logits);
    return t;
}

void MlpGradients::scale(double alpha) {
    for (Matrix &m : dW) scale_in_place(m, alpha);
    for (Vector &v : db) scale_in_place(v, alpha);
}

bool MlpGradients::all_finite() const {
    for (const Matrix &m : dW)
        if (!m.all_finite()) return false;
    for (const Vector &v : db)
        if (!nae::all_finite(v)) return false;
    return true;
}

MlpGradients mlp_gradients(const MlpParams &mlp, const MlpTrace &trace,
                           const std::vector<int> &labels,
                           std::size_t first_trainable) {
    assert(trace.params_version == mlp.version && "stale mlp trace");
    const std::size_t n_layers = mlp.layers.size();
    const std::size_t n_hidden = mlp.n_hidden_layers();
    const std::size_t batch = trace.probs.rows;
    check_labels(labels, batch, mlp.output_dim());

    MlpGradients g;
    g.dW.resize(n_layers);
    g.db.resize(n_layers);
    for (std::size_t li = 0; li < n_layers; ++li) {
        g.dW[li] = Matrix(mlp.layers[li].W.rows, mlp.layers[li].W.cols);
        g.db[li].assign(mlp.layers[li].b.size(), 0.0);
    }

    // delta at the softmax pre-activation: (p - onehot) / B
    Matrix delta = trace.probs;
    for (std::size_t i = 0; i < batch; ++i)
        delta(i, static_cast<std::size_t>(labels[i])) -= 1.0;
    scale_in_place(delta, 1.0 / static_cast<double>(batch));

    for (std::size_t li = n_layers; li-- > 0;) {
        const Matrix &below = li == 0 ? trace.input : trace.a[li - 1];
        if (li >= first_trainable) {
            g.dW[li] = matmul_tn(delta, below);
            g.db[li] = column_sums(delta);
        }
        if (li == 0 || li <= first_trainable) break;

        Matrix next = matmul(delta, mlp.layers[li].W);  // B x width(li-1)
        const std::size_t hl = li - 1;                  // hidden layer index
        if (!trace.eps_a[hl].empty() && trace.mode_a == CombineMode::multiplicative)
            for (std::size_t i = 0; i < next.data.size(); ++i)
                next.data[i] *= trace.eps_a[hl].data[i];
        for (std::size_t i = 0; i < next.data.size(); ++i)
            next.data[i] *= nonlin_deriv(mlp.layers[hl].act, trace.z[hl].data[i]);
        delta = std::move(next);
    }
    (void)n_hidden;
    return g;
}

}  // namespace nae

#include "nae/model.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace nae {

namespace {

constexpr double kCrossEntropyEps = 1e-12;

void check_dim(std::size_t got, std::size_t want, const char *what) {
    if (got != want)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch, got " +
                                    std::to_string(got) + ", expected " +
                                    std::to_string(want));
}

// dL/du at the decoder pre-activation, elementwise.
double loss_delta_u(double x, double r, LossKind kind, Nonlin dec) {
    if (kind == LossKind::squared) {
        const double dr = 2.0 * (r - x);
        return dec == Nonlin::linear ? dr : dr * r * (1.0 - r);
    }
    // cross-entropy; valid only with a sigmoid decoder (r in (0,1)).
    const double rc = std::min(1.0 - kCrossEntropyEps, std::max(kCrossEntropyEps, r));
    if (rc == r) return r - x;
    return (rc - x) / (rc * (1.0 - rc)) * r * (1.0 - r);
}

void require_loss_decoder(LossKind kind, Nonlin dec) {
    if (kind == LossKind::cross_entropy && dec != Nonlin::sigmoid)
        throw std::invalid_argument(
            "cross_entropy loss requires a sigmoid decoder");
}

}  // namespace

void NaeParams::require_finite() const {
    W.require_finite("encoder weights");
    if (!tied) Wdec.require_finite("decoder weights");
    if (!nae::all_finite(b) || !nae::all_finite(d))
        throw std::runtime_error("bias contains a non-finite value");
}

NaeParams init_nae_params(Rng &rng, std::size_t input_dim, std::size_t hidden_dim,
                          Nonlin enc, Nonlin dec, bool tied) {
    NaeParams p;
    p.enc_nonlin = enc;
    p.dec_nonlin = dec;
    p.tied = tied;
    p.W = Matrix(hidden_dim, input_dim);
    const double enc_bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
    for (double &v : p.W.data) v = (2.0 * rng.next_double() - 1.0) * enc_bound;
    p.b.assign(hidden_dim, 0.0);
    if (!tied) {
        p.Wdec = Matrix(input_dim, hidden_dim);
        const double dec_bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
        for (double &v : p.Wdec.data) v = (2.0 * rng.next_double() - 1.0) * dec_bound;
    }
    p.d.assign(input_dim, 0.0);
    return p;
}

ForwardTrace encode_noisy(const NaeParams &params, const Vector &x,
                          const NoiseSample &noise) {
    check_dim(x.size(), params.input_dim(), "encode_noisy input");
    ForwardTrace t;
    t.noise = noise;
    t.params_version = params.version;

    t.x_tilde = noise.eps_i.empty() ? x : apply(x, noise.eps_i, noise.mode_i);

    Vector z = matvec(params.W, t.x_tilde);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += params.b[i];
    if (!noise.eps_z.empty()) z = apply(z, noise.eps_z, noise.mode_z);
    t.z = std::move(z);

    Vector h(t.z.size());
    for (std::size_t i = 0; i < h.size(); ++i)
        h[i] = apply_nonlin(params.enc_nonlin, t.z[i]);
    if (!noise.eps_h.empty()) h = apply(h, noise.eps_h, noise.mode_h);
    t.h_tilde = std::move(h);
    return t;
}

Vector reconstruct(const NaeParams &params, const Vector &h) {
    check_dim(h.size(), params.hidden_dim(), "reconstruct hidden");
    Vector u = params.dec_apply(h);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] += params.d[i];
        u[i] = apply_nonlin(params.dec_nonlin, u[i]);
    }
    return u;
}

ForwardTrace forward_noisy(const NaeParams &params, const Vector &x,
                           const NoiseSample &noise) {
    ForwardTrace t = encode_noisy(params, x, noise);
    t.r = reconstruct(params, t.h_tilde);
    return t;
}

double loss(const Vector &x, const Vector &r, LossKind kind) {
    if (x.size() != r.size())
        throw std::invalid_argument("loss: dimension mismatch " +
                                    std::to_string(x.size()) + " vs " +
                                    std::to_string(r.size()));
    double total = 0.0;
    if (kind == LossKind::squared) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = x[i] - r[i];
            total += e * e;
        }
    } else {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double rc =
                std::min(1.0 - kCrossEntropyEps, std::max(kCrossEntropyEps, r[i]));
            total -= x[i] * std::log(rc) + (1.0 - x[i]) * std::log(1.0 - rc);
        }
    }
    return total;
}

void Gradients::scale(double alpha) {
    scale_in_place(dW, alpha);
    scale_in_place(db, alpha);
    if (!dWdec.empty()) scale_in_place(dWdec, alpha);
    scale_in_place(dd, alpha);
}

void Gradients::accumulate(const Gradients &other) {
    axpy(1.0, other.dW, dW);
    axpy(1.0, other.db, db);
    if (!dWdec.empty()) axpy(1.0, other.dWdec, dWdec);
    axpy(1.0, other.dd, dd);
}

bool Gradients::all_finite() const {
    return dW.all_finite() && nae::all_finite(db) &&
           (dWdec.empty() || dWdec.all_finite()) && nae::all_finite(dd);
}

Gradients gradients(const NaeParams &params, const ForwardTrace &trace,
                    const Vector &x, LossKind kind) {
    assert(trace.params_version == params.version && "stale forward trace");
    require_loss_decoder(kind, params.dec_nonlin);
    const std::size_t nin = params.input_dim();
    const std::size_t nh = params.hidden_dim();
    check_dim(x.size(), nin, "gradients input");

    Vector delta_u(nin);
    for (std::size_t i = 0; i < nin; ++i)
        delta_u[i] = loss_delta_u(x[i], trace.r[i], kind, params.dec_nonlin);

    Gradients g;
    g.dd = delta_u;
    Matrix dWdec(nin, nh);
    for (std::size_t i = 0; i < nin; ++i)
        for (std::size_t j = 0; j < nh; ++j)
            dWdec(i, j) = delta_u[i] * trace.h_tilde[j];

    Vector delta_h = params.dec_apply_t(delta_u);
    if (!trace.noise.eps_h.empty() && trace.noise.mode_h == CombineMode::multiplicative)
        for (std::size_t j = 0; j < nh; ++j) delta_h[j] *= trace.noise.eps_h[j];

    Vector delta_zlin(nh);
    for (std::size_t j = 0; j < nh; ++j)
        delta_zlin[j] = delta_h[j] * nonlin_deriv(params.enc_nonlin, trace.z[j]);
    if (!trace.noise.eps_z.empty() && trace.noise.mode_z == CombineMode::multiplicative)
        for (std::size_t j = 0; j < nh; ++j) delta_zlin[j] *= trace.noise.eps_z[j];

    g.db = delta_zlin;
    g.dW = Matrix(nh, nin);
    for (std::size_t j = 0; j < nh; ++j)
        for (std::size_t i = 0; i < nin; ++i)
            g.dW(j, i) = delta_zlin[j] * trace.x_tilde[i];

    if (params.tied) {
        for (std::size_t j = 0; j < nh; ++j)
            for (std::size_t i = 0; i < nin; ++i) g.dW(j, i) += dWdec(i, j);
    } else {
        g.dWdec = std::move(dWdec);
    }
    return g;
}

Vector encode_deterministic(const NaeParams &params, const Vector &x,
                            const NoiseSpec &spec) {
    check_dim(x.size(), params.input_dim(), "encode_deterministic input");
    spec.validate();

    Vector xs = x;
    const double si = spec.input.expectation_scale();
    if (si != 1.0) scale_in_place(xs, si);

    Vector z = matvec(params.W, xs);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += params.b[i];
    const double sz = spec.pre_activation.expectation_scale();
    if (sz != 1.0) scale_in_place(z, sz);

    Vector h(z.size());
    for (std::size_t i = 0; i < h.size(); ++i)
        h[i] = apply_nonlin(params.enc_nonlin, z[i]);
    const double sh = spec.activation.expectation_scale();
    if (sh != 1.0) scale_in_place(h, sh);
    return h;
}

// ---- batched variants --------------------------------------------------

namespace {

void combine_rows(Matrix &value, const Matrix &eps, CombineMode mode) {
    if (value.rows != eps.rows || value.cols != eps.cols)
        throw std::invalid_argument("batch noise shape mismatch: " +
                                    value.shape_str() + " vs " + eps.shape_str());
    if (mode == CombineMode::additive) {
        for (std::size_t i = 0; i < value.data.size(); ++i)
            value.data[i] += eps.data[i];
    } else {
        for (std::size_t i = 0; i < value.data.size(); ++i)
            value.data[i] *= eps.data[i];
    }
}

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

}  // namespace

NoiseSample BatchNoise::row(std::size_t i) const {
    NoiseSample s;
    s.mode_i = mode_i;
    s.mode_z = mode_z;
    s.mode_h = mode_h;
    auto take = [i](const Matrix &m) {
        if (m.empty()) return Vector{};
        return Vector(m.row_ptr(i), m.row_ptr(i) + m.cols);
    };
    s.eps_i = take(eps_i);
    s.eps_z = take(eps_z);
    s.eps_h = take(eps_h);
    return s;
}

BatchNoise sample_batch(const NoiseSpec &spec, const Rng &base,
                        const std::vector<std::size_t> &example_ids,
                        std::uint64_t epoch, const Matrix &x,
                        const NaeParams &params) {
    spec.validate();
    const std::size_t batch = example_ids.size();
    const std::size_t nin = params.input_dim();
    const std::size_t nh = params.hidden_dim();

    BatchNoise bn;
    bn.mode_i = spec.input.mode();
    bn.mode_z = spec.pre_activation.mode();
    bn.mode_h = spec.activation.mode();
    if (spec.input.active()) bn.eps_i = Matrix(batch, nin);
    if (spec.pre_activation.active()) bn.eps_z = Matrix(batch, nh);
    if (spec.activation.active()) bn.eps_h = Matrix(batch, nh);

    // Poisson variance needs the clean activations of the current batch.
    Matrix clean_h;
    if (spec.activation.kind == NoiseKind::poisson_like) {
        clean_h = matmul_nt(x, params.W);
        add_row_vector(clean_h, params.b);
        for (double &v : clean_h.data) v = apply_nonlin(params.enc_nonlin, v);
    }

    const Rng epoch_rng = base.split(epoch);
    for (std::size_t i = 0; i < batch; ++i) {
        Rng r = epoch_rng.split(example_ids[i]);
        const Vector *ch = nullptr;
        Vector ch_row;
        if (!clean_h.empty()) {
            ch_row.assign(clean_h.row_ptr(i), clean_h.row_ptr(i) + nh);
            ch = &ch_row;
        }
        const NoiseSample s = sample(spec, r, nin, nh, ch);
        auto put = [i](Matrix &m, const Vector &v) {
            if (m.empty()) return;
            std::copy(v.begin(), v.end(), m.row_ptr(i));
        };
        put(bn.eps_i, s.eps_i);
        put(bn.eps_z, s.eps_z);
        put(bn.eps_h, s.eps_h);
    }
    return bn;
}

BatchTrace forward_noisy_batch(const NaeParams &params, const Matrix &x,
                               const BatchNoise &noise) {
    check_dim(x.cols, params.input_dim(), "forward batch input");
    BatchTrace t;
    t.params_version = params.version;

    t.x_tilde = x;
    if (!noise.eps_i.empty()) combine_rows(t.x_tilde, noise.eps_i, noise.mode_i);

    Matrix z = matmul_nt(t.x_tilde, params.W);
    add_row_vector(z, params.b);
    if (!noise.eps_z.empty()) combine_rows(z, noise.eps_z, noise.mode_z);
    t.z = std::move(z);

    Matrix h = t.z;
    for (double &v : h.data) v = apply_nonlin(params.enc_nonlin, v);
    if (!noise.eps_h.empty()) combine_rows(h, noise.eps_h, noise.mode_h);
    t.h_tilde = std::move(h);

    Matrix u = params.tied ? matmul(t.h_tilde, params.W)
                           : matmul_nt(t.h_tilde, params.Wdec);
    add_row_vector(u, params.d);
    if (params.dec_nonlin != Nonlin::linear)
        for (double &v : u.data) v = apply_nonlin(params.dec_nonlin, v);
    t.r = std::move(u);
    return t;
}

double loss_batch(const Matrix &x, const Matrix &r, LossKind kind) {
    if (x.rows != r.rows || x.cols != r.cols)
        throw std::invalid_argument("loss_batch: shape mismatch " + x.shape_str() +
                                    " vs " + r.shape_str());
    double total = 0.0;
    if (kind == LossKind::squared) {
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            const double e = x.data[i] - r.data[i];
            total += e * e;
        }
    } else {
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            const double rc = std::min(1.0 - kCrossEntropyEps,
                                       std::max(kCrossEntropyEps, r.data[i]));
            total -= x.data[i] * std::log(rc) + (1.0 - x.data[i]) * std::log(1.0 - rc);
        }
    }
    return total / static_cast<double>(x.rows);
}

Gradients gradients_batch(const NaeParams &params, const BatchTrace &trace,
                          const Matrix &x, const BatchNoise &noise, LossKind kind) {
    assert(trace.params_version == params.version && "stale forward trace");
    require_loss_decoder(kind, params.dec_nonlin);
    const std::size_t batch = x.rows;
    const std::size_t nh = params.hidden_dim();

    Matrix delta_u(batch, x.cols);
    for (std::size_t i = 0; i < delta_u.data.size(); ++i)
        delta_u.data[i] =
            loss_delta_u(x.data[i], trace.r.data[i], kind, params.dec_nonlin);

    Gradients g;
    Matrix dWdec = matmul_tn(delta_u, trace.h_tilde);  // input x hidden
    g.dd = column_sums(delta_u);

    Matrix delta_h = params.tied ? matmul_nt(delta_u, params.W)
                                 : matmul(delta_u, params.Wdec);
    if (!noise.eps_h.empty() && noise.mode_h == CombineMode::multiplicative)
        for (std::size_t i = 0; i < delta_h.data.size(); ++i)
            delta_h.data[i] *= noise.eps_h.data[i];

    Matrix delta_zlin = std::move(delta_h);
    for (std::size_t i = 0; i < delta_zlin.data.size(); ++i)
        delta_zlin.data[i] *= nonlin_deriv(params.enc_nonlin, trace.z.data[i]);
    if (!noise.eps_z.empty() && noise.mode_z == CombineMode::multiplicative)
        for (std::size_t i = 0; i < delta_zlin.data.size(); ++i)
            delta_zlin.data[i] *= noise.eps_z.data[i];

    g.db = column_sums(delta_zlin);
    g.dW = matmul_tn(delta_zlin, trace.x_tilde);  // hidden x input

    if (params.tied) {
        for (std::size_t j = 0; j < nh; ++j)
            for (std::size_t i = 0; i < x.cols; ++i) g.dW(j, i) += dWdec(i, j);
    } else {
        g.dWdec = std::move(dWdec);
    }
    g.scale(1.0 / static_cast<double>(batch));
    return g;
}

Matrix encode_deterministic_batch(const NaeParams &params, const Matrix &x,
                                  const NoiseSpec &spec) {
    check_dim(x.cols, params.input_dim(), "encode batch input");
    spec.validate();
    Matrix xs = x;
    const double si = spec.input.expectation_scale();
    if (si != 1.0) scale_in_place(xs, si);

    Matrix z = matmul_nt(xs, params.W);
    add_row_vector(z, params.b);
    const double sz = spec.pre_activation.expectation_scale();
    if (sz != 1.0) scale_in_place(z, sz);

    for (double &v : z.data) v = apply_nonlin(params.enc_nonlin, v);
    const double sh = spec.activation.expectation_scale();
    if (sh != 1.0) scale_in_place(z, sh);
    return z;
}

Matrix reconstruct_batch(const NaeParams &params, const Matrix &h) {
    check_dim(h.cols, params.hidden_dim(), "reconstruct batch hidden");
    Matrix u = params.tied ? matmul(h, params.W) : matmul_nt(h, params.Wdec);
    add_row_vector(u, params.d);
    if (params.dec_nonlin != Nonlin::linear)
        for (double &v : u.data) v = apply_nonlin(params.dec_nonlin, v);
    return u;
}

}  // namespace nae

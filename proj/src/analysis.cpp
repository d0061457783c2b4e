#include "nae/analysis.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nae {

double sparseness(const Vector &v) {
    const std::size_t n = v.size();
    if (n == 0) throw std::invalid_argument("sparseness: empty vector");
    if (n == 1) return 1.0;
    double l1 = 0.0, l2sq = 0.0;
    for (double x : v) {
        l1 += std::abs(x);
        l2sq += x * x;
    }
    if (l2sq == 0.0) return 1.0;
    const double root_n = std::sqrt(static_cast<double>(n));
    return (root_n - l1 / std::sqrt(l2sq)) / (root_n - 1.0);
}

std::pair<Vector, Vector> sparsity_metrics(const Matrix &activations) {
    const std::size_t n = activations.rows, d = activations.cols;
    Vector lifetime(d), population(n);
    Vector column(n);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) column[i] = activations(i, j);
        lifetime[j] = sparseness(column);
    }
    Vector row(d);
    for (std::size_t i = 0; i < n; ++i) {
        const double *src = activations.row_ptr(i);
        row.assign(src, src + d);
        population[i] = sparseness(row);
    }
    return {std::move(lifetime), std::move(population)};
}

std::pair<Matrix, Vector> correlation_and_spectrum(const Matrix &activations) {
    const std::size_t n = activations.rows, d = activations.cols;
    if (n < 2)
        throw std::invalid_argument("correlation_and_spectrum: need at least 2 samples");

    Vector mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += activations(i, j);
    for (double &m : mean) m /= static_cast<double>(n);

    // Covariance (mean-removed), normalized by N-1.
    Matrix cov(d, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double *row = activations.row_ptr(i);
        for (std::size_t a = 0; a < d; ++a) {
            const double da = row[a] - mean[a];
            for (std::size_t b = a; b < d; ++b)
                cov(a, b) += da * (row[b] - mean[b]);
        }
    }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            cov(a, b) /= static_cast<double>(n - 1);
            cov(b, a) = cov(a, b);
        }

    Matrix corr(d, d);
    for (std::size_t a = 0; a < d; ++a) {
        corr(a, a) = 1.0;
        for (std::size_t b = a + 1; b < d; ++b) {
            const double va = cov(a, a), vb = cov(b, b);
            const double c =
                (va > 0.0 && vb > 0.0) ? cov(a, b) / std::sqrt(va * vb) : 0.0;
            corr(a, b) = c;
            corr(b, a) = c;
        }
    }

    const SymEig eig = sym_eig(cov);
    Vector cum(d, 0.0);
    double total = 0.0;
    for (double v : eig.values) total += std::max(0.0, v);
    if (total <= 0.0) {
        // Degenerate (constant) activations: flat unit spectrum.
        cum.assign(d, 1.0);
        return {std::move(corr), std::move(cum)};
    }
    double running = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        running += std::max(0.0, eig.values[k]);
        cum[k] = running / total;
    }
    cum.back() = 1.0;
    return {std::move(corr), std::move(cum)};
}

double mean_abs_offdiag(const Matrix &correlation) {
    const std::size_t d = correlation.rows;
    if (d < 2) return 0.0;
    double sum = 0.0;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
            if (a != b) sum += std::abs(correlation(a, b));
    return sum / static_cast<double>(d * (d - 1));
}

double denoise_eval(const NaeParams &params, const Dataset &clean,
                    const NoiseSpec &train_spec, double noise_var,
                    std::size_t draws, Rng &rng) {
    if (clean.size() == 0) throw std::invalid_argument("denoise_eval: empty dataset");
    if (noise_var < 0.0) throw std::invalid_argument("denoise_eval: negative variance");
    if (draws == 0) throw std::invalid_argument("denoise_eval: draws must be >= 1");

    const double sd = std::sqrt(noise_var);
    double total = 0.0;
    Matrix noisy = clean.samples;
    for (std::size_t k = 0; k < draws; ++k) {
        std::copy(clean.samples.data.begin(), clean.samples.data.end(),
                  noisy.data.begin());
        if (sd > 0.0)
            for (double &v : noisy.data) v += sd * rng.gaussian();
        const Matrix h = encode_deterministic_batch(params, noisy, train_spec);
        const Matrix r = reconstruct_batch(params, h);
        total += loss_batch(clean.samples, r, LossKind::squared);
    }
    return total / static_cast<double>(draws);
}

std::size_t classification_error(const MlpParams &model, const Dataset &data,
                                 const NoiseSpec &spec) {
    if (!data.labeled())
        throw std::invalid_argument("classification_error: dataset has no labels");
    const Matrix probs = mlp_predict(model, data.samples, spec);
    std::size_t errors = 0;
    for (std::size_t i = 0; i < probs.rows; ++i) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < probs.cols; ++j)
            if (probs(i, j) > probs(i, arg)) arg = j;  // ties keep the lowest index
        if (static_cast<int>(arg) != data.labels[i]) ++errors;
    }
    return errors;
}

Matrix hidden_activations(const MlpParams &model, const Matrix &x,
                          const NoiseSpec &spec, std::size_t layer) {
    if (layer >= model.n_hidden_layers())
        throw std::invalid_argument("hidden_activations: no hidden layer " +
                                    std::to_string(layer));
    Matrix a = x;
    const double si = spec.input.expectation_scale();
    if (si != 1.0) scale_in_place(a, si);
    const double sh = spec.activation.expectation_scale();
    for (std::size_t l = 0; l <= layer; ++l) {
        const MlpLayer &ml = model.layers[l];
        Matrix z = matmul_nt(a, ml.W);
        for (std::size_t i = 0; i < z.rows; ++i)
            for (std::size_t j = 0; j < z.cols; ++j) z(i, j) += ml.b[j];
        for (double &v : z.data) v = apply_nonlin(ml.act, v);
        if (sh != 1.0) scale_in_place(z, sh);
        a = std::move(z);
    }
    return a;
}

void MetricsReport::to_csv(const std::string &path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "layer,mean_lifetime_sparsity,mean_population_sparsity,"
           "mean_abs_offdiag_corr,components_to_90pct\n";
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const LayerStats &ls = layers[l];
        double ml = 0.0, mp = 0.0;
        for (double v : ls.lifetime_sparsity) ml += v;
        for (double v : ls.population_sparsity) mp += v;
        if (!ls.lifetime_sparsity.empty()) ml /= ls.lifetime_sparsity.size();
        if (!ls.population_sparsity.empty()) mp /= ls.population_sparsity.size();
        std::size_t k90 = ls.cum_variance.size();
        for (std::size_t k = 0; k < ls.cum_variance.size(); ++k)
            if (ls.cum_variance[k] >= 0.9) {
                k90 = k + 1;
                break;
            }
        out << l << "," << ml << "," << mp << "," << mean_abs_offdiag(ls.correlation)
            << "," << k90 << "\n";
    }
    if (denoise_error) out << "denoise_error,," << *denoise_error << ",,\n";
    if (test_errors) out << "test_errors,," << *test_errors << ",,\n";
}

namespace {
constexpr char kCorrMagic[8] = {'N', 'A', 'E', 'C', 'O', 'R', 'R', '1'};
}

void save_matrix_raw(const std::string &path, const Matrix &m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(kCorrMagic, 8);
    const std::uint32_t rc[2] = {static_cast<std::uint32_t>(m.rows),
                                 static_cast<std::uint32_t>(m.cols)};
    for (std::uint32_t v : rc) {
        unsigned char buf[4];
        for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
        out.write(reinterpret_cast<const char *>(buf), 4);
    }
    for (double v : m.data) {
        const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        unsigned char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
        out.write(reinterpret_cast<const char *>(buf), 8);
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

Matrix load_matrix_raw(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCorrMagic, 8) != 0)
        throw std::runtime_error("bad matrix file magic in " + path);
    std::uint32_t rc[2];
    for (std::uint32_t &v : rc) {
        unsigned char buf[4];
        in.read(reinterpret_cast<char *>(buf), 4);
        if (!in) throw std::runtime_error("truncated matrix file " + path);
        v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | buf[i];
    }
    Matrix m(rc[0], rc[1]);
    for (double &v : m.data) {
        unsigned char buf[8];
        in.read(reinterpret_cast<char *>(buf), 8);
        if (!in) throw std::runtime_error("truncated matrix file " + path);
        std::uint64_t bits = 0;
        for (int i = 7; i >= 0; --i) bits = (bits << 8) | buf[i];
        v = std::bit_cast<double>(bits);
    }
    return m;
}

}  // namespace nae

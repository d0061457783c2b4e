#include "nae/noise.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nae {

NoiseDist NoiseDist::additive_gaussian(double var) {
    if (var < 0.0)
        throw std::invalid_argument("additive_gaussian: negative variance");
    NoiseDist d;
    d.kind = NoiseKind::additive_gaussian;
    d.var = var;
    return d;
}

NoiseDist NoiseDist::multiplicative_gaussian(double var) {
    if (var < 0.0)
        throw std::invalid_argument("multiplicative_gaussian: negative variance");
    NoiseDist d;
    d.kind = NoiseKind::multiplicative_gaussian;
    d.var = var;
    return d;
}

NoiseDist NoiseDist::dropout(double p) {
    if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("dropout: p outside [0,1]");
    NoiseDist d;
    d.kind = NoiseKind::dropout;
    d.p = p;
    return d;
}

NoiseDist NoiseDist::poisson_like() {
    NoiseDist d;
    d.kind = NoiseKind::poisson_like;
    return d;
}

CombineMode NoiseDist::mode() const {
    switch (kind) {
        case NoiseKind::multiplicative_gaussian:
        case NoiseKind::dropout:
            return CombineMode::multiplicative;
        default:
            return CombineMode::additive;
    }
}

std::string NoiseDist::to_string() const {
    std::ostringstream os;
    switch (kind) {
        case NoiseKind::none: return "none";
        case NoiseKind::additive_gaussian: os << "gaussian:" << var; break;
        case NoiseKind::multiplicative_gaussian: os << "gaussian_mult:" << var; break;
        case NoiseKind::dropout: os << "dropout:" << p; break;
        case NoiseKind::poisson_like: return "poisson";
    }
    return os.str();
}

NoiseDist NoiseDist::parse(const std::string &text) {
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    double param = 0.0;
    if (colon != std::string::npos) {
        const std::string tail = text.substr(colon + 1);
        std::size_t used = 0;
        try {
            param = std::stod(tail, &used);
        } catch (const std::exception &) {
            throw std::invalid_argument("noise spec '" + text + "': bad parameter");
        }
        if (used != tail.size())
            throw std::invalid_argument("noise spec '" + text + "': bad parameter");
    }
    if (head == "none") {
        if (colon != std::string::npos)
            throw std::invalid_argument("noise spec 'none' takes no parameter");
        return none();
    }
    if (head == "poisson") {
        if (colon != std::string::npos)
            throw std::invalid_argument("noise spec 'poisson' takes no parameter");
        return poisson_like();
    }
    if (colon == std::string::npos)
        throw std::invalid_argument("noise spec '" + text + "': missing parameter");
    if (head == "gaussian") return additive_gaussian(param);
    if (head == "gaussian_mult") return multiplicative_gaussian(param);
    if (head == "dropout") return dropout(param);
    throw std::invalid_argument("unknown noise kind '" + head + "'");
}

void NoiseSpec::validate() const {
    if (input.kind == NoiseKind::poisson_like ||
        pre_activation.kind == NoiseKind::poisson_like)
        throw std::invalid_argument(
            "poisson noise is only valid at the activation site");
}

namespace {

Vector draw_site(const NoiseDist &dist, Rng &rng, std::size_t n,
                 const Vector *clean_h, NoiseSite site) {
    switch (dist.kind) {
        case NoiseKind::none:
            return {};
        case NoiseKind::additive_gaussian:
            return sample_gaussian(rng, 0.0, dist.var, n);
        case NoiseKind::multiplicative_gaussian:
            return sample_gaussian(rng, 1.0, dist.var, n);
        case NoiseKind::dropout:
            return sample_bernoulli(rng, dist.p, n);
        case NoiseKind::poisson_like: {
            if (site != NoiseSite::activation)
                throw std::invalid_argument(
                    "poisson noise is only valid at the activation site");
            if (clean_h == nullptr)
                throw std::invalid_argument(
                    "poisson noise requires the clean hidden activation");
            if (clean_h->size() != n)
                throw std::invalid_argument("clean_h length mismatch");
            Vector eps(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double var = std::max(0.0, (*clean_h)[i]);
                eps[i] = std::sqrt(var) * rng.gaussian();
            }
            return eps;
        }
    }
    return {};
}

}  // namespace

NoiseSample sample(const NoiseSpec &spec, Rng &rng, std::size_t input_dim,
                   std::size_t hidden_dim, const Vector *clean_h) {
    spec.validate();
    if (spec.activation.kind == NoiseKind::poisson_like && clean_h == nullptr)
        throw std::invalid_argument(
            "poisson noise requires the clean hidden activation");
    NoiseSample s;
    s.eps_i = draw_site(spec.input, rng, input_dim, nullptr, NoiseSite::input);
    s.eps_z = draw_site(spec.pre_activation, rng, hidden_dim, nullptr,
                        NoiseSite::pre_activation);
    s.eps_h = draw_site(spec.activation, rng, hidden_dim, clean_h,
                        NoiseSite::activation);
    s.mode_i = spec.input.mode();
    s.mode_z = spec.pre_activation.mode();
    s.mode_h = spec.activation.mode();
    return s;
}

Vector apply(const Vector &value, const Vector &eps, CombineMode mode) {
    if (value.size() != eps.size())
        throw std::invalid_argument("apply: length mismatch " +
                                    std::to_string(value.size()) + " vs " +
                                    std::to_string(eps.size()));
    Vector out(value.size());
    if (mode == CombineMode::additive) {
        for (std::size_t i = 0; i < value.size(); ++i) out[i] = value[i] + eps[i];
    } else {
        for (std::size_t i = 0; i < value.size(); ++i) out[i] = value[i] * eps[i];
    }
    return out;
}

Vector equivalent_hidden_noise_from_prenoise(const Matrix &w, const Vector &x,
                                             const NoiseDist &dist_z, Nonlin f) {
    if (dist_z.kind != NoiseKind::additive_gaussian)
        throw std::invalid_argument(
            "equivalent_hidden_noise_from_prenoise: only additive Gaussian "
            "pre-activation noise is supported (got " + dist_z.to_string() + ")");
    const Vector z = matvec(w, x);
    Vector var_h(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double slope = nonlin_deriv(f, z[i]);
        var_h[i] = slope * slope * dist_z.var;
    }
    return var_h;
}

Matrix equivalent_prenoise_covariance_from_input(const Matrix &w, const Matrix &sigma_in) {
    if (sigma_in.rows != sigma_in.cols || sigma_in.rows != w.cols)
        throw std::invalid_argument(
            "equivalent_prenoise_covariance_from_input: covariance " +
            sigma_in.shape_str() + " does not match encoder " + w.shape_str());
    for (std::size_t i = 0; i < sigma_in.rows; ++i)
        for (std::size_t j = i + 1; j < sigma_in.cols; ++j)
            if (std::abs(sigma_in(i, j) - sigma_in(j, i)) >
                1e-12 * (1.0 + std::abs(sigma_in(i, j))))
                throw std::invalid_argument(
                    "equivalent_prenoise_covariance_from_input: covariance not symmetric");
    const SymEig eig = sym_eig(sigma_in);
    const double scale = std::abs(eig.values.empty() ? 0.0 : eig.values.front());
    for (double v : eig.values)
        if (v < -1e-10 * (1.0 + scale))
            throw std::invalid_argument(
                "equivalent_prenoise_covariance_from_input: covariance not PSD "
                "(min eigenvalue " + std::to_string(v) + ")");
    return matmul_nt(matmul(w, sigma_in), w);
}

Matrix equivalent_prenoise_covariance_from_input(const Matrix &w, double sigma_sq) {
    if (sigma_sq < 0.0)
        throw std::invalid_argument(
            "equivalent_prenoise_covariance_from_input: negative variance");
    Matrix c = matmul_nt(w, w);
    scale_in_place(c, sigma_sq);
    return c;
}

}  // namespace nae

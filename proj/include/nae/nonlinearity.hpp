#ifndef NAE_NONLINEARITY_HPP
#define NAE_NONLINEARITY_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace nae {

enum class Nonlin { linear, sigmoid, relu, softmax };

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double apply_nonlin(Nonlin f, double z) {
    switch (f) {
        case Nonlin::linear: return z;
        case Nonlin::sigmoid: return sigmoid(z);
        case Nonlin::relu: return z > 0.0 ? z : 0.0;
        default: throw std::invalid_argument("apply_nonlin: not an elementwise nonlinearity");
    }
}

/// First derivative at pre-activation z.
inline double nonlin_deriv(Nonlin f, double z) {
    switch (f) {
        case Nonlin::linear: return 1.0;
        case Nonlin::sigmoid: {
            const double s = sigmoid(z);
            return s * (1.0 - s);
        }
        case Nonlin::relu: return z > 0.0 ? 1.0 : 0.0;
        default: throw std::invalid_argument("nonlin_deriv: not an elementwise nonlinearity");
    }
}

/// Second derivative at pre-activation z (relu: 0 almost everywhere).
inline double nonlin_deriv2(Nonlin f, double z) {
    switch (f) {
        case Nonlin::linear: return 0.0;
        case Nonlin::sigmoid: {
            const double s = sigmoid(z);
            return s * (1.0 - s) * (1.0 - 2.0 * s);
        }
        case Nonlin::relu: return 0.0;
        default: throw std::invalid_argument("nonlin_deriv2: not an elementwise nonlinearity");
    }
}

std::string nonlin_name(Nonlin f);
Nonlin nonlin_from_name(const std::string &name);

}  // namespace nae

#endif

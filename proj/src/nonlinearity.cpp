#include "nae/nonlinearity.hpp"

namespace nae {

std::string nonlin_name(Nonlin f) {
    switch (f) {
        case Nonlin::linear: return "linear";
        case Nonlin::sigmoid: return "sigmoid";
        case Nonlin::relu: return "relu";
        case Nonlin::softmax: return "softmax";
    }
    throw std::logic_error("unknown nonlinearity");
}

Nonlin nonlin_from_name(const std::string &name) {
    if (name == "linear") return Nonlin::linear;
    if (name == "sigmoid") return Nonlin::sigmoid;
    if (name == "relu") return Nonlin::relu;
    if (name == "softmax") return Nonlin::softmax;
    throw std::invalid_argument("unknown nonlinearity '" + name + "'");
}

}  // namespace nae

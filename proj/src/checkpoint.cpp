#include "nae/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nae {

namespace {

constexpr char kMagic[8] = {'N', 'A', 'E', 'C', 'K', 'P', 'T', '1'};

void write_u32(std::ostream &out, std::uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char *>(buf), 4);
}

void write_u64(std::ostream &out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char *>(buf), 8);
}

void write_f64_array(std::ostream &out, const double *data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        write_u64(out, std::bit_cast<std::uint64_t>(data[i]));
}

std::uint32_t read_u32(std::istream &in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char *>(buf), 4);
    if (!in) throw std::runtime_error("truncated checkpoint");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | buf[i];
    return v;
}

std::uint64_t read_u64(std::istream &in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char *>(buf), 8);
    if (!in) throw std::runtime_error("truncated checkpoint");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
    return v;
}

void read_f64_array(std::istream &in, double *data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        data[i] = std::bit_cast<double>(read_u64(in));
}

std::uint32_t nonlin_code(Nonlin f) {
    switch (f) {
        case Nonlin::linear: return 0;
        case Nonlin::sigmoid: return 1;
        case Nonlin::relu: return 2;
        case Nonlin::softmax: return 3;
    }
    throw std::logic_error("unknown nonlinearity");
}

Nonlin nonlin_from_code(std::uint32_t c) {
    switch (c) {
        case 0: return Nonlin::linear;
        case 1: return Nonlin::sigmoid;
        case 2: return Nonlin::relu;
        case 3: return Nonlin::softmax;
    }
    throw std::runtime_error("checkpoint has unknown nonlinearity code " +
                             std::to_string(c));
}

std::ofstream open_out(const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    return out;
}

std::ifstream open_in_checked(const std::string &path, std::uint32_t want_type) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("bad checkpoint magic in " + path);
    const std::uint32_t type = read_u32(in);
    if (want_type != 0 && type != want_type)
        throw std::runtime_error("checkpoint " + path + " holds payload type " +
                                 std::to_string(type) + ", expected " +
                                 std::to_string(want_type));
    return in;
}

}  // namespace

void save_checkpoint(const std::string &path, const NaeParams &params) {
    std::ofstream out = open_out(path);
    out.write(kMagic, 8);
    write_u32(out, 1);
    write_u32(out, nonlin_code(params.enc_nonlin));
    write_u32(out, nonlin_code(params.dec_nonlin));
    write_u32(out, params.tied ? 1 : 0);
    write_u64(out, params.hidden_dim());
    write_u64(out, params.input_dim());
    write_f64_array(out, params.W.data.data(), params.W.size());
    write_f64_array(out, params.b.data(), params.b.size());
    if (!params.tied) write_f64_array(out, params.Wdec.data.data(), params.Wdec.size());
    write_f64_array(out, params.d.data(), params.d.size());
    if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

NaeParams load_nae_checkpoint(const std::string &path) {
    std::ifstream in = open_in_checked(path, 1);
    NaeParams p;
    p.enc_nonlin = nonlin_from_code(read_u32(in));
    p.dec_nonlin = nonlin_from_code(read_u32(in));
    p.tied = read_u32(in) != 0;
    const std::uint64_t hidden = read_u64(in);
    const std::uint64_t input = read_u64(in);
    p.W = Matrix(hidden, input);
    read_f64_array(in, p.W.data.data(), p.W.size());
    p.b.resize(hidden);
    read_f64_array(in, p.b.data(), p.b.size());
    if (!p.tied) {
        p.Wdec = Matrix(input, hidden);
        read_f64_array(in, p.Wdec.data.data(), p.Wdec.size());
    }
    p.d.resize(input);
    read_f64_array(in, p.d.data(), p.d.size());
    return p;
}

void save_checkpoint(const std::string &path, const MlpParams &params) {
    std::ofstream out = open_out(path);
    out.write(kMagic, 8);
    write_u32(out, 2);
    write_u64(out, params.layers.size());
    for (const MlpLayer &l : params.layers) {
        write_u64(out, l.W.rows);
        write_u64(out, l.W.cols);
        write_u32(out, nonlin_code(l.act));
        write_f64_array(out, l.W.data.data(), l.W.size());
        write_f64_array(out, l.b.data(), l.b.size());
    }
    if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

MlpParams load_mlp_checkpoint(const std::string &path) {
    std::ifstream in = open_in_checked(path, 2);
    MlpParams p;
    const std::uint64_t n = read_u64(in);
    p.layers.resize(n);
    for (MlpLayer &l : p.layers) {
        const std::uint64_t rows = read_u64(in);
        const std::uint64_t cols = read_u64(in);
        l.act = nonlin_from_code(read_u32(in));
        l.W = Matrix(rows, cols);
        read_f64_array(in, l.W.data.data(), l.W.size());
        l.b.resize(rows);
        read_f64_array(in, l.b.data(), l.b.size());
    }
    return p;
}

int checkpoint_type(const std::string &path) {
    std::ifstream in = open_in_checked(path, 0);
    // open_in_checked consumed magic + type; reread the type.
    in.seekg(8);
    return static_cast<int>(read_u32(in));
}

}  // namespace nae

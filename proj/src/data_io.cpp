#include "nae/data_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nae {

namespace {

constexpr std::uint32_t kIdxImageMagic = 0x00000803u;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801u;
constexpr char kPatchMagic[8] = {'N', 'A', 'E', 'P', 'A', 'T', 'C', 'H'};

std::uint32_t read_u32_be(std::istream &in, const char *what) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char *>(buf), 4);
    if (!in)
        throw std::runtime_error(std::string("truncated file while reading ") + what);
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_u32_be(std::ostream &out, std::uint32_t v) {
    const unsigned char buf[4] = {
        static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char *>(buf), 4);
}

std::uint32_t read_u32_le(std::istream &in, const char *what) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char *>(buf), 4);
    if (!in)
        throw std::runtime_error(std::string("truncated file while reading ") + what);
    return std::uint32_t(buf[0]) | (std::uint32_t(buf[1]) << 8) |
           (std::uint32_t(buf[2]) << 16) | (std::uint32_t(buf[3]) << 24);
}

void write_u32_le(std::ostream &out, std::uint32_t v) {
    const unsigned char buf[4] = {
        static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char *>(buf), 4);
}

double read_f64_le(std::istream &in, const char *what) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char *>(buf), 8);
    if (!in)
        throw std::runtime_error(std::string("truncated file while reading ") + what);
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | buf[i];
    return std::bit_cast<double>(bits);
}

void write_f64_le(std::ostream &out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char *>(buf), 8);
}

std::ifstream open_input(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return in;
}

std::ofstream open_output(const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

}  // namespace

Dataset Dataset::head(std::size_t n) const { return slice(0, std::min(n, size())); }

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > size())
        throw std::invalid_argument("Dataset::slice: bad range");
    Dataset out;
    out.scale_min = scale_min;
    out.scale_max = scale_max;
    out.samples = Matrix(end - begin, samples.cols);
    std::copy(samples.row_ptr(begin), samples.row_ptr(begin) + out.samples.size(),
              out.samples.data.begin());
    if (labeled())
        out.labels.assign(labels.begin() + begin, labels.begin() + end);
    return out;
}

Dataset load_mnist_idx(const std::string &images_path, const std::string &labels_path) {
    std::ifstream in = open_input(images_path);
    const std::uint32_t magic = read_u32_be(in, "image magic");
    if (magic != kIdxImageMagic)
        throw std::runtime_error("bad IDX image magic in " + images_path +
                                 ": got 0x" + std::to_string(magic));
    const std::uint32_t count = read_u32_be(in, "image count");
    const std::uint32_t rows = read_u32_be(in, "image rows");
    const std::uint32_t cols = read_u32_be(in, "image cols");
    const std::size_t dim = std::size_t(rows) * cols;

    Dataset ds;
    ds.samples = Matrix(count, dim);
    std::vector<unsigned char> buf(dim);
    for (std::uint32_t i = 0; i < count; ++i) {
        in.read(reinterpret_cast<char *>(buf.data()), static_cast<std::streamsize>(dim));
        if (!in)
            throw std::runtime_error("truncated IDX image data in " + images_path +
                                     " at image " + std::to_string(i));
        double *row = ds.samples.row_ptr(i);
        for (std::size_t j = 0; j < dim; ++j) row[j] = buf[j] / 255.0;
    }

    if (!labels_path.empty()) {
        std::ifstream lin = open_input(labels_path);
        const std::uint32_t lmagic = read_u32_be(lin, "label magic");
        if (lmagic != kIdxLabelMagic)
            throw std::runtime_error("bad IDX label magic in " + labels_path);
        const std::uint32_t lcount = read_u32_be(lin, "label count");
        if (lcount != count)
            throw std::runtime_error("IDX image/label count mismatch: " +
                                     std::to_string(count) + " images vs " +
                                     std::to_string(lcount) + " labels");
        std::vector<unsigned char> lbuf(lcount);
        lin.read(reinterpret_cast<char *>(lbuf.data()),
                 static_cast<std::streamsize>(lcount));
        if (!lin)
            throw std::runtime_error("truncated IDX label data in " + labels_path);
        ds.labels.assign(lbuf.begin(), lbuf.end());
    }
    return ds;
}

void save_mnist_idx_images(const std::string &path, const Matrix &samples,
                           std::size_t rows, std::size_t cols) {
    if (rows * cols != samples.cols)
        throw std::invalid_argument("save_mnist_idx_images: rows*cols != sample dim");
    std::ofstream out = open_output(path);
    write_u32_be(out, kIdxImageMagic);
    write_u32_be(out, static_cast<std::uint32_t>(samples.rows));
    write_u32_be(out, static_cast<std::uint32_t>(rows));
    write_u32_be(out, static_cast<std::uint32_t>(cols));
    std::vector<unsigned char> buf(samples.cols);
    for (std::size_t i = 0; i < samples.rows; ++i) {
        const double *row = samples.row_ptr(i);
        for (std::size_t j = 0; j < samples.cols; ++j) {
            const double v = std::min(1.0, std::max(0.0, row[j]));
            buf[j] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
        out.write(reinterpret_cast<const char *>(buf.data()),
                  static_cast<std::streamsize>(buf.size()));
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

void save_mnist_idx_labels(const std::string &path, const std::vector<int> &labels) {
    std::ofstream out = open_output(path);
    write_u32_be(out, kIdxLabelMagic);
    write_u32_be(out, static_cast<std::uint32_t>(labels.size()));
    for (int l : labels) {
        if (l < 0 || l > 255)
            throw std::invalid_argument("save_mnist_idx_labels: label out of byte range");
        const unsigned char b = static_cast<unsigned char>(l);
        out.write(reinterpret_cast<const char *>(&b), 1);
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

PatchSet extract_patches(const Matrix &image, std::size_t edge, std::size_t n,
                         Rng &rng) {
    if (edge == 0) throw std::invalid_argument("extract_patches: edge must be positive");
    if (image.rows < edge || image.cols < edge)
        throw std::invalid_argument("extract_patches: image " + image.shape_str() +
                                    " smaller than patch edge " + std::to_string(edge));
    PatchSet ps;
    ps.patch_edge = edge;
    ps.patches = Matrix(n, edge * edge);
    const std::size_t row_range = image.rows - edge + 1;
    const std::size_t col_range = image.cols - edge + 1;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t r0 = rng.uniform_index(row_range);
        const std::size_t c0 = rng.uniform_index(col_range);
        double *dst = ps.patches.row_ptr(k);
        double mean = 0.0;
        for (std::size_t r = 0; r < edge; ++r)
            for (std::size_t c = 0; c < edge; ++c) {
                const double v = image(r0 + r, c0 + c);
                dst[r * edge + c] = v;
                mean += v;
            }
        mean /= static_cast<double>(edge * edge);
        for (std::size_t j = 0; j < edge * edge; ++j) dst[j] -= mean;
    }
    return ps;
}

void save_patches(const std::string &path, const PatchSet &patches) {
    std::ofstream out = open_output(path);
    out.write(kPatchMagic, 8);
    write_u32_le(out, static_cast<std::uint32_t>(patches.patch_edge));
    write_u32_le(out, static_cast<std::uint32_t>(patches.patches.rows));
    for (double v : patches.patches.data) write_f64_le(out, v);
    if (!out) throw std::runtime_error("failed writing " + path);
}

PatchSet load_patches(const std::string &path) {
    std::ifstream in = open_input(path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kPatchMagic, 8) != 0)
        throw std::runtime_error("bad patch file magic in " + path);
    const std::uint32_t edge = read_u32_le(in, "patch edge");
    const std::uint32_t count = read_u32_le(in, "patch count");
    PatchSet ps;
    ps.patch_edge = edge;
    ps.patches = Matrix(count, std::size_t(edge) * edge);
    for (double &v : ps.patches.data) v = read_f64_le(in, "patch data");
    return ps;
}

std::size_t filter_grid_cols(std::size_t n_filters) {
    std::size_t cols = 1;
    while (cols * cols < n_filters) ++cols;
    return cols;
}

void export_filter_grid(const Matrix &w, std::size_t tile_edge,
                        const std::string &path) {
    if (tile_edge * tile_edge != w.cols)
        throw std::invalid_argument("export_filter_grid: row length " +
                                    std::to_string(w.cols) + " is not " +
                                    std::to_string(tile_edge) + "^2");
    const std::size_t n = w.rows;
    const std::size_t cols = filter_grid_cols(n);
    const std::size_t rows = (n + cols - 1) / cols;
    const std::size_t width = cols * (tile_edge + 1) + 1;
    const std::size_t height = rows * (tile_edge + 1) + 1;

    std::vector<unsigned char> pixels(width * height, 0);  // separators black
    for (std::size_t k = 0; k < n; ++k) {
        const double *f = w.row_ptr(k);
        double lo = f[0], hi = f[0];
        for (std::size_t j = 1; j < w.cols; ++j) {
            lo = std::min(lo, f[j]);
            hi = std::max(hi, f[j]);
        }
        const std::size_t gr = k / cols, gc = k % cols;
        const std::size_t y0 = 1 + gr * (tile_edge + 1);
        const std::size_t x0 = 1 + gc * (tile_edge + 1);
        for (std::size_t r = 0; r < tile_edge; ++r) {
            for (std::size_t c = 0; c < tile_edge; ++c) {
                const double v = f[r * tile_edge + c];
                unsigned char px = 127;
                if (hi > lo)
                    px = static_cast<unsigned char>(
                        std::lround((v - lo) / (hi - lo) * 255.0));
                pixels[(y0 + r) * width + (x0 + c)] = px;
            }
        }
    }

    std::ofstream out = open_output(path);
    out << "P5\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char *>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out) throw std::runtime_error("failed writing " + path);
}

PgmImage load_pgm(const std::string &path) {
    std::ifstream in = open_input(path);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw std::runtime_error("not a P5 PGM file: " + path);
    std::size_t width = 0, height = 0;
    int maxval = 0;
    in >> width >> height >> maxval;
    if (!in || maxval != 255)
        throw std::runtime_error("unsupported PGM header in " + path);
    in.get();  // single whitespace after maxval
    PgmImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(width * height);
    in.read(reinterpret_cast<char *>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (!in) throw std::runtime_error("truncated PGM data in " + path);
    return img;
}

}  // namespace nae

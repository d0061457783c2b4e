#ifndef NAE_DATA_IO_HPP
#define NAE_DATA_IO_HPP

#include <optional>
#include <string>
#include <vector>

#include "nae/matrix.hpp"
#include "nae/rng.hpp"

namespace nae {

/// Row-major sample matrix with optional class labels.
struct Dataset {
    Matrix samples;           // N x dim
    std::vector<int> labels;  // empty when unlabeled
    double scale_min = 0.0;   // nominal value range of the samples
    double scale_max = 1.0;

    std::size_t size() const { return samples.rows; }
    std::size_t dim() const { return samples.cols; }
    bool labeled() const { return !labels.empty(); }

    Vector row(std::size_t i) const {
        return Vector(samples.row_ptr(i), samples.row_ptr(i) + samples.cols);
    }
    /// First n samples (n is clamped to the dataset size).
    Dataset head(std::size_t n) const;
    /// Samples [begin, end).
    Dataset slice(std::size_t begin, std::size_t end) const;
};

/// MNIST-style IDX files, big-endian. Image files carry magic 0x00000803
/// then count/rows/cols and unsigned bytes; label files carry 0x00000801
/// then count and bytes. Pixels are scaled to [0,1] by /255.
/// Wrong magic, truncation, and image/label count mismatch raise distinct
/// errors.
Dataset load_mnist_idx(const std::string &images_path,
                       const std::string &labels_path = "");

/// Writers for the same formats (used for fixtures and synthetic sets).
/// Pixel values are clamped to [0,1] and quantized by round(v*255).
void save_mnist_idx_images(const std::string &path, const Matrix &samples,
                           std::size_t rows, std::size_t cols);
void save_mnist_idx_labels(const std::string &path, const std::vector<int> &labels);

/// Square image patches, one per row, dim = patch_edge^2.
struct PatchSet {
    std::size_t patch_edge = 0;
    Matrix patches;  // N x edge^2
};

/// n uniformly positioned edge x edge patches, each mean-subtracted.
/// Throws if the image is smaller than the patch.
PatchSet extract_patches(const Matrix &image, std::size_t edge, std::size_t n,
                         Rng &rng);

/// Raw patch container: 16-byte header (magic "NAEPATCH", u32 edge,
/// u32 count, little-endian) followed by count*edge^2 float64 LE values.
void save_patches(const std::string &path, const PatchSet &patches);
PatchSet load_patches(const std::string &path);

/// Writes the rows of W as a grid of grayscale tiles in binary PGM (P5).
/// Each row must have length tile_edge^2. Tiles are normalized per filter
/// to [0,255] (a zero-range filter maps to uniform 127), laid out in a
/// near-square grid with 1-pixel black separators on all sides.
void export_filter_grid(const Matrix &w, std::size_t tile_edge,
                        const std::string &path);

/// Grid geometry used by export_filter_grid: columns of the tile grid for
/// n filters (near-square, cols >= rows).
std::size_t filter_grid_cols(std::size_t n_filters);

/// Minimal P5 reader (round-trip checks, test fixtures).
struct PgmImage {
    std::size_t width = 0, height = 0;
    std::vector<unsigned char> pixels;  // row-major
};
PgmImage load_pgm(const std::string &path);

}  // namespace nae

#endif

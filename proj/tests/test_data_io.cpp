#include "doctest.h"

#include <stdexcept>

#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>

#include "nae/checkpoint.hpp"
#include "nae/data_io.hpp"
#include "nae/synth.hpp"

using namespace nae;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("nae_test_" + std::to_string(std::rand()) +
                std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string &name) const { return (path / name).string(); }
};

std::vector<unsigned char> read_all(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

void write_all(const std::string &path, const std::vector<unsigned char> &bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char *>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("IDX: hand-built 2-image fixture round-trips exactly") {
    TempDir tmp;
    Matrix samples(2, 4);
    samples(0, 0) = 0.0;
    samples(0, 1) = 1.0;
    samples(0, 2) = 128.0 / 255.0;
    samples(0, 3) = 7.0 / 255.0;
    samples(1, 0) = 1.0;
    samples(1, 1) = 0.5019607843137255;  // 128/255
    samples(1, 2) = 0.0;
    samples(1, 3) = 1.0;
    const std::vector<int> labels = {3, 9};
    save_mnist_idx_images(tmp.file("img.idx"), samples, 2, 2);
    save_mnist_idx_labels(tmp.file("lab.idx"), labels);

    const Dataset ds = load_mnist_idx(tmp.file("img.idx"), tmp.file("lab.idx"));
    CHECK(ds.size() == 2);
    CHECK(ds.dim() == 4);
    CHECK(ds.labels == labels);
    CHECK(ds.samples(0, 0) == 0.0);    // byte 0 -> 0.0
    CHECK(ds.samples(0, 1) == 1.0);    // byte 255 -> 1.0
    CHECK(ds.samples(0, 2) == 128.0 / 255.0);
    CHECK(ds.samples(1, 3) == 1.0);
}

TEST_CASE("IDX: every truncation and corruption is a distinct non-crash error") {
    TempDir tmp;
    Matrix samples(2, 4, 0.5);
    save_mnist_idx_images(tmp.file("img.idx"), samples, 2, 2);
    save_mnist_idx_labels(tmp.file("lab.idx"), {1, 2});
    const auto img_bytes = read_all(tmp.file("img.idx"));

    SUBCASE("wrong magic") {
        auto bad = img_bytes;
        bad[3] = 0x77;
        write_all(tmp.file("bad.idx"), bad);
        CHECK_THROWS_WITH_AS(load_mnist_idx(tmp.file("bad.idx")),
                             doctest::Contains("magic"), std::runtime_error);
    }
    SUBCASE("truncation at every field boundary") {
        for (const std::size_t cut : {2u, 6u, 10u, 14u, 18u}) {
            auto bad = img_bytes;
            bad.resize(cut);
            write_all(tmp.file("cut.idx"), bad);
            CHECK_THROWS_AS(load_mnist_idx(tmp.file("cut.idx")), std::runtime_error);
        }
    }
    SUBCASE("image/label count mismatch") {
        save_mnist_idx_labels(tmp.file("short.idx"), {1});
        CHECK_THROWS_WITH_AS(
            load_mnist_idx(tmp.file("img.idx"), tmp.file("short.idx")),
            doctest::Contains("mismatch"), std::runtime_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_mnist_idx(tmp.file("nope.idx")), std::runtime_error);
    }
}

TEST_CASE("extract_patches: edge cases") {
    Rng rng(1);
    SUBCASE("constant image gives all-zero patches after mean subtraction") {
        const Matrix img(16, 16, 3.7);
        const PatchSet ps = extract_patches(img, 4, 10, rng);
        for (double v : ps.patches.data) CHECK(v == doctest::Approx(0.0));
    }
    SUBCASE("edge equal to image size returns the mean-subtracted image") {
        Matrix img(4, 4);
        for (std::size_t i = 0; i < 16; ++i) img.data[i] = static_cast<double>(i);
        const PatchSet ps = extract_patches(img, 4, 3, rng);
        const double mean = 7.5;
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t i = 0; i < 16; ++i)
                CHECK(ps.patches(k, i) == doctest::Approx(img.data[i] - mean));
    }
    SUBCASE("image smaller than the patch throws") {
        const Matrix img(3, 3, 0.0);
        CHECK_THROWS_AS(extract_patches(img, 4, 1, rng), std::invalid_argument);
    }
    SUBCASE("positions are uniform (histogram vs direct sampling)") {
        // 8x8 image, 4x4 patches -> 5x5 possible top-left positions. A
        // quadratic ramp keeps the source position recoverable from the
        // difference of adjacent patch pixels even after mean subtraction:
        // v(s) - v(s+1) = -(2s+1) for v(s) = s^2, s = 8*row + col.
        Matrix img(8, 8);
        for (std::size_t r = 0; r < 8; ++r)
            for (std::size_t c = 0; c < 8; ++c) {
                const double s = r * 8.0 + c;
                img(r, c) = s * s;
            }
        const std::size_t n = 10000;
        Rng prng(2);
        const PatchSet ps = extract_patches(img, 4, n, prng);
        std::vector<int> hist(25, 0);
        for (std::size_t k = 0; k < n; ++k) {
            const double diff = ps.patches(k, 0) - ps.patches(k, 1);
            const int s = static_cast<int>(std::lround((-diff - 1.0) / 2.0));
            const int row = s / 8, col = s % 8;
            REQUIRE(row >= 0);
            REQUIRE(row < 5);
            REQUIRE(col < 5);
            ++hist[row * 5 + col];
        }
        // Each cell expects n/25 = 400; allow 5 sigma of the binomial count.
        for (int c : hist) CHECK(std::abs(c - 400) < 5 * 20);
    }
}

TEST_CASE("NAEPATCH container round-trips") {
    TempDir tmp;
    Rng rng(3);
    PatchSet ps;
    ps.patch_edge = 3;
    ps.patches = Matrix(5, 9);
    for (double &v : ps.patches.data) v = rng.gaussian();
    save_patches(tmp.file("p.naepatch"), ps);
    const PatchSet loaded = load_patches(tmp.file("p.naepatch"));
    CHECK(loaded.patch_edge == 3);
    CHECK(loaded.patches.rows == 5);
    CHECK(loaded.patches.data == ps.patches.data);  // bit-exact

    auto bytes = read_all(tmp.file("p.naepatch"));
    bytes[0] = 'X';
    write_all(tmp.file("bad.naepatch"), bytes);
    CHECK_THROWS_AS(load_patches(tmp.file("bad.naepatch")), std::runtime_error);
}

TEST_CASE("export_filter_grid: layout, degenerate range, round-trip") {
    TempDir tmp;

    SUBCASE("single constant filter maps to uniform mid-gray") {
        Matrix w(1, 9, 0.42);
        export_filter_grid(w, 3, tmp.file("one.pgm"));
        const PgmImage img = load_pgm(tmp.file("one.pgm"));
        CHECK(img.width == 5);
        CHECK(img.height == 5);
        CHECK(img.pixels[1 * 5 + 1] == 127);
        CHECK(img.pixels[0] == 0);  // separator
    }
    SUBCASE("4 filters form a 2x2 grid with 1-pixel separators") {
        Rng rng(4);
        Matrix w(4, 16);
        for (double &v : w.data) v = rng.gaussian();
        export_filter_grid(w, 4, tmp.file("grid.pgm"));
        const PgmImage img = load_pgm(tmp.file("grid.pgm"));
        CHECK(img.width == 2 * 4 + 3);
        CHECK(img.height == 2 * 4 + 3);
        // Separator rows/columns are black.
        for (std::size_t x = 0; x < img.width; ++x) {
            CHECK(img.pixels[0 * img.width + x] == 0);
            CHECK(img.pixels[5 * img.width + x] == 0);
            CHECK(img.pixels[10 * img.width + x] == 0);
        }
    }
    SUBCASE("non-square row length throws") {
        Matrix w(2, 10, 0.0);
        CHECK_THROWS_AS(export_filter_grid(w, 3, tmp.file("bad.pgm")),
                        std::invalid_argument);
    }
    SUBCASE("re-export of an exported tile is byte-identical (idempotent scaling)") {
        Rng rng(5);
        Matrix w(4, 16);
        for (double &v : w.data) v = rng.gaussian();
        export_filter_grid(w, 4, tmp.file("a.pgm"));
        const PgmImage first = load_pgm(tmp.file("a.pgm"));
        // Parse tiles back out as doubles and export again.
        Matrix tiles(4, 16);
        for (std::size_t k = 0; k < 4; ++k) {
            const std::size_t y0 = 1 + (k / 2) * 5, x0 = 1 + (k % 2) * 5;
            for (std::size_t r = 0; r < 4; ++r)
                for (std::size_t c = 0; c < 4; ++c)
                    tiles(k, r * 4 + c) =
                        static_cast<double>(first.pixels[(y0 + r) * first.width + x0 + c]);
        }
        export_filter_grid(tiles, 4, tmp.file("b.pgm"));
        CHECK(read_all(tmp.file("a.pgm")) == read_all(tmp.file("b.pgm")));
    }
}

TEST_CASE("checkpoints: save -> load -> save is byte-identical") {
    TempDir tmp;
    Rng rng(6);

    SUBCASE("autoencoder, tied and untied") {
        for (const bool tied : {false, true}) {
            NaeParams p = init_nae_params(rng, 6, 4, Nonlin::sigmoid,
                                          Nonlin::linear, tied);
            const std::string a = tmp.file(tied ? "t1.ckpt" : "u1.ckpt");
            const std::string b = tmp.file(tied ? "t2.ckpt" : "u2.ckpt");
            save_checkpoint(a, p);
            const NaeParams loaded = load_nae_checkpoint(a);
            CHECK(loaded.tied == tied);
            CHECK(loaded.W.data == p.W.data);
            save_checkpoint(b, loaded);
            CHECK(read_all(a) == read_all(b));
        }
    }
    SUBCASE("mlp") {
        MlpParams mlp = init_mlp(rng, 5, {4, 3}, 2, Nonlin::relu);
        save_checkpoint(tmp.file("m1.ckpt"), mlp);
        const MlpParams loaded = load_mlp_checkpoint(tmp.file("m1.ckpt"));
        save_checkpoint(tmp.file("m2.ckpt"), loaded);
        CHECK(read_all(tmp.file("m1.ckpt")) == read_all(tmp.file("m2.ckpt")));
        CHECK(checkpoint_type(tmp.file("m1.ckpt")) == 2);
    }
    SUBCASE("type confusion is rejected") {
        NaeParams p = init_nae_params(rng, 3, 2, Nonlin::sigmoid, Nonlin::linear, false);
        save_checkpoint(tmp.file("n.ckpt"), p);
        CHECK_THROWS_AS(load_mlp_checkpoint(tmp.file("n.ckpt")), std::runtime_error);
    }
}

TEST_CASE("synthetic digit dataset is plausibly shaped") {
    Rng rng(7);
    const Dataset ds = make_digit_dataset(rng, 50);
    CHECK(ds.size() == 50);
    CHECK(ds.dim() == 784);
    int classes_seen[10] = {};
    for (int l : ds.labels) {
        REQUIRE(l >= 0);
        REQUIRE(l < 10);
        ++classes_seen[l];
    }
    for (double v : ds.samples.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    // Images are mostly background with some ink.
    double mean = 0.0;
    for (double v : ds.samples.data) mean += v;
    mean /= ds.samples.size();
    CHECK(mean > 0.02);
    CHECK(mean < 0.5);
}

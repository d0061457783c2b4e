#include "nae/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nae {

Matrix make_plasma_image(Rng &rng, std::size_t size) {
    if (size < 4) throw std::invalid_argument("make_plasma_image: size too small");
    Matrix img(size, size);
    double amplitude = 1.0;
    for (std::size_t freq = 2; freq <= size; freq *= 2) {
        // Coarse white-noise grid, bilinearly upsampled onto the image.
        Matrix grid(freq + 1, freq + 1);
        for (double &v : grid.data) v = rng.gaussian();
        const double step = static_cast<double>(freq) / static_cast<double>(size);
        for (std::size_t r = 0; r < size; ++r) {
            const double gy = r * step;
            const std::size_t y0 = std::min<std::size_t>(freq - 1, std::size_t(gy));
            const double fy = gy - y0;
            for (std::size_t c = 0; c < size; ++c) {
                const double gx = c * step;
                const std::size_t x0 = std::min<std::size_t>(freq - 1, std::size_t(gx));
                const double fx = gx - x0;
                const double v =
                    grid(y0, x0) * (1 - fy) * (1 - fx) + grid(y0, x0 + 1) * (1 - fy) * fx +
                    grid(y0 + 1, x0) * fy * (1 - fx) + grid(y0 + 1, x0 + 1) * fy * fx;
                img(r, c) += amplitude * v;
            }
        }
        amplitude *= 0.5;
    }
    double mean = 0.0;
    for (double v : img.data) mean += v;
    mean /= static_cast<double>(img.size());
    double var = 0.0;
    for (double &v : img.data) {
        v -= mean;
        var += v * v;
    }
    var /= static_cast<double>(img.size());
    if (var > 0.0) scale_in_place(img, 1.0 / std::sqrt(var));
    return img;
}

PatchSet make_plasma_patches(Rng &rng, std::size_t n_patches, std::size_t edge,
                             std::size_t n_images, std::size_t image_size) {
    if (n_images == 0) throw std::invalid_argument("make_plasma_patches: no images");
    PatchSet all;
    all.patch_edge = edge;
    all.patches = Matrix(n_patches, edge * edge);
    const std::size_t per_image = (n_patches + n_images - 1) / n_images;
    std::size_t done = 0;
    for (std::size_t i = 0; i < n_images && done < n_patches; ++i) {
        const Matrix img = make_plasma_image(rng, image_size);
        const std::size_t take = std::min(per_image, n_patches - done);
        const PatchSet ps = extract_patches(img, edge, take, rng);
        std::copy(ps.patches.data.begin(), ps.patches.data.end(),
                  all.patches.row_ptr(done));
        done += take;
    }
    double var = 0.0;
    for (double v : all.patches.data) var += v * v;
    var /= static_cast<double>(all.patches.size());
    if (var > 0.0) scale_in_place(all.patches, 1.0 / std::sqrt(var));
    return all;
}

namespace {

struct Pt {
    double x, y;
};

// One drawable stroke: a quadratic bezier (control == midpoint gives a line).
struct Stroke {
    Pt a, c, b;
};

Pt lerp(Pt p, Pt q, double t) { return {p.x + (q.x - p.x) * t, p.y + (q.y - p.y) * t}; }

Pt bezier(const Stroke &s, double t) {
    return lerp(lerp(s.a, s.c, t), lerp(s.c, s.b, t), t);
}

Stroke line(Pt a, Pt b) { return {a, lerp(a, b, 0.5), b}; }

// Digit skeletons in the unit square (y grows downward).
std::vector<Stroke> digit_strokes(int digit) {
    auto ellipse = [](Pt c, double rx, double ry) {
        std::vector<Stroke> out;
        const int segs = 8;
        for (int k = 0; k < segs; ++k) {
            const double t0 = 2.0 * M_PI * k / segs;
            const double t1 = 2.0 * M_PI * (k + 1) / segs;
            const double tm = 0.5 * (t0 + t1);
            Pt a{c.x + rx * std::cos(t0), c.y + ry * std::sin(t0)};
            Pt b{c.x + rx * std::cos(t1), c.y + ry * std::sin(t1)};
            // Control point chosen so the curve passes near the arc midpoint.
            Pt m{c.x + rx * std::cos(tm), c.y + ry * std::sin(tm)};
            Pt ctrl{2.0 * m.x - 0.5 * (a.x + b.x), 2.0 * m.y - 0.5 * (a.y + b.y)};
            out.push_back({a, ctrl, b});
        }
        return out;
    };
    switch (digit) {
        case 0:
            return ellipse({0.5, 0.5}, 0.26, 0.38);
        case 1:
            return {line({0.36, 0.26}, {0.54, 0.10}), line({0.54, 0.10}, {0.54, 0.90})};
        case 2:
            return {{{0.28, 0.32}, {0.50, -0.06}, {0.73, 0.33}},
                    line({0.73, 0.33}, {0.27, 0.88}),
                    line({0.27, 0.88}, {0.76, 0.88})};
        case 3:
            return {{{0.28, 0.18}, {0.80, 0.05}, {0.52, 0.46}},
                    {{0.52, 0.46}, {0.95, 0.62}, {0.30, 0.85}}};
        case 4:
            return {line({0.62, 0.10}, {0.24, 0.62}), line({0.24, 0.62}, {0.80, 0.62}),
                    line({0.64, 0.38}, {0.64, 0.92})};
        case 5:
            return {line({0.72, 0.12}, {0.32, 0.12}), line({0.32, 0.12}, {0.30, 0.45}),
                    {{0.30, 0.45}, {0.95, 0.42}, {0.52, 0.86}},
                    line({0.52, 0.86}, {0.27, 0.80})};
        case 6: {
            std::vector<Stroke> s = {{{0.66, 0.10}, {0.28, 0.26}, {0.30, 0.62}}};
            for (const Stroke &e : ellipse({0.50, 0.66}, 0.21, 0.20)) s.push_back(e);
            return s;
        }
        case 7:
            return {line({0.26, 0.13}, {0.76, 0.13}), line({0.76, 0.13}, {0.42, 0.90})};
        case 8: {
            std::vector<Stroke> s = ellipse({0.50, 0.30}, 0.19, 0.17);
            for (const Stroke &e : ellipse({0.50, 0.68}, 0.23, 0.20)) s.push_back(e);
            return s;
        }
        case 9: {
            std::vector<Stroke> s = ellipse({0.48, 0.33}, 0.21, 0.19);
            s.push_back(line({0.69, 0.35}, {0.64, 0.90}));
            return s;
        }
    }
    throw std::invalid_argument("digit_strokes: digit out of range");
}

}  // namespace

Dataset make_digit_dataset(Rng &rng, std::size_t n) {
    constexpr std::size_t kEdge = 28;
    Dataset ds;
    ds.samples = Matrix(n, kEdge * kEdge);
    ds.labels.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const int digit = static_cast<int>(rng.uniform_index(10));
        ds.labels[i] = digit;
        std::vector<Stroke> strokes = digit_strokes(digit);

        // Instance transform: rotation, anisotropic scale, translation.
        const double angle = (rng.next_double() - 0.5) * 0.55;
        const double sx = 0.75 + 0.5 * rng.next_double();
        const double sy = 0.75 + 0.5 * rng.next_double();
        const double tx = (rng.next_double() - 0.5) * 0.22;
        const double ty = (rng.next_double() - 0.5) * 0.22;
        const double ca = std::cos(angle), sa = std::sin(angle);
        const double jitter = 0.04;
        // Smooth elastic distortion field on top of the affine map.
        const double ex_amp = 0.05 + 0.06 * rng.next_double();
        const double ey_amp = 0.05 + 0.06 * rng.next_double();
        const double ex_freq = 5.0 + 6.0 * rng.next_double();
        const double ey_freq = 5.0 + 6.0 * rng.next_double();
        const double ex_phase = 6.28 * rng.next_double();
        const double ey_phase = 6.28 * rng.next_double();
        auto warp = [&](Pt p) {
            double x = (p.x - 0.5) * sx, y = (p.y - 0.5) * sy;
            const double xr = ca * x - sa * y, yr = sa * x + ca * y;
            x = 0.5 + xr + tx + (rng.next_double() - 0.5) * jitter;
            y = 0.5 + yr + ty + (rng.next_double() - 0.5) * jitter;
            x += ex_amp * std::sin(ex_freq * y + ex_phase);
            y += ey_amp * std::sin(ey_freq * x + ey_phase);
            return Pt{x, y};
        };
        for (Stroke &s : strokes) {
            s.a = warp(s.a);
            s.c = warp(s.c);
            s.b = warp(s.b);
        }
        // Background clutter: a couple of short stray strokes.
        const std::size_t n_clutter = rng.uniform_index(3);
        for (std::size_t k = 0; k < n_clutter; ++k) {
            const Pt a{rng.next_double(), rng.next_double()};
            const Pt b{a.x + 0.25 * (rng.next_double() - 0.5),
                       a.y + 0.25 * (rng.next_double() - 0.5)};
            strokes.push_back(line(a, b));
        }

        const double thickness = 0.8 + 0.9 * rng.next_double();  // in pixels
        const double sigma = 0.55 * thickness;
        const double ink = 0.35 + 0.35 * rng.next_double();      // contrast
        double *img = ds.samples.row_ptr(i);

        for (const Stroke &s : strokes) {
            if (rng.next_double() < 0.12) continue;  // broken stroke
            const double len_px =
                kEdge * (std::hypot(s.c.x - s.a.x, s.c.y - s.a.y) +
                         std::hypot(s.b.x - s.c.x, s.b.y - s.c.y));
            const int steps = std::max(4, static_cast<int>(len_px * 2.5));
            for (int k = 0; k <= steps; ++k) {
                const Pt p = bezier(s, static_cast<double>(k) / steps);
                const double px = p.x * (kEdge - 1), py = p.y * (kEdge - 1);
                const int r0 = std::max(0, static_cast<int>(py - 3));
                const int r1 = std::min<int>(kEdge - 1, static_cast<int>(py + 3));
                const int c0 = std::max(0, static_cast<int>(px - 3));
                const int c1 = std::min<int>(kEdge - 1, static_cast<int>(px + 3));
                for (int r = r0; r <= r1; ++r)
                    for (int c = c0; c <= c1; ++c) {
                        const double d2 = (r - py) * (r - py) + (c - px) * (c - px);
                        img[r * kEdge + c] += ink * std::exp(-d2 / (2 * sigma * sigma));
                    }
            }
        }
        // Occasional occluding patch.
        if (rng.next_double() < 0.3) {
            const std::size_t box = 4 + rng.uniform_index(4);
            const std::size_t r0 = rng.uniform_index(kEdge - box);
            const std::size_t c0 = rng.uniform_index(kEdge - box);
            for (std::size_t r = r0; r < r0 + box; ++r)
                for (std::size_t c = c0; c < c0 + box; ++c) img[r * kEdge + c] = 0.0;
        }
        for (std::size_t j = 0; j < kEdge * kEdge; ++j) {
            double v = std::min(1.0, img[j]);
            v += 0.09 * rng.gaussian();
            if (rng.next_double() < 0.02) v += 0.3 + 0.5 * rng.next_double();
            img[j] = std::min(1.0, std::max(0.0, v));
        }
    }
    return ds;
}

}  // namespace nae

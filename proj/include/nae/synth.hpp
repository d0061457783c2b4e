#ifndef NAE_SYNTH_HPP
#define NAE_SYNTH_HPP

#include "nae/data_io.hpp"
#include "nae/matrix.hpp"
#include "nae/rng.hpp"

namespace nae {

/// Natural-looking test image: multi-octave value noise with amplitude
/// halving per octave (approximately 1/f spectrum), normalized to zero mean
/// and unit variance.
Matrix make_plasma_image(Rng &rng, std::size_t size);

/// Mean-subtracted patches pooled from `n_images` plasma images, then
/// globally rescaled to unit pixel variance.
PatchSet make_plasma_patches(Rng &rng, std::size_t n_patches, std::size_t edge,
                             std::size_t n_images, std::size_t image_size);

/// Synthetic 10-class stroke-digit dataset, 28x28 in [0,1], written in the
/// same layout MNIST uses. Each sample is a digit template under random
/// rotation, scale, translation, per-point jitter and stroke-thickness
/// variation, plus light pixel noise.
Dataset make_digit_dataset(Rng &rng, std::size_t n);

}  // namespace nae

#endif

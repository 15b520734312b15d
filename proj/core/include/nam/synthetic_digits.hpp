#pragma once

#include <cstddef>
#include <cstdint>

#include "nam/dataset.hpp"

namespace nam {

struct SyntheticDigitsOptions {
    std::size_t size = 28;
    double max_rotation = 0.4;  // radians
    double max_shear = 0.45;
    double max_shift = 0.12;    // fraction of the image
    double jitter = 0.08;       // per control point
    double noise = 0.3;         // gaussian pixel noise stddev
};

/// Handwriting-like digits 0-9 rendered from jittered stroke skeletons under
/// random affine distortion, pixels in [0,1]. Labels cycle through the ten
/// classes in a shuffled order. Fully determined by (count, seed, options).
Dataset synthetic_digits(std::size_t count, std::uint64_t seed, const SyntheticDigitsOptions& options = {});

/// Writes an MNIST-layout directory (train-/t10k- IDX files) with the given
/// split sizes; train and test use disjoint seeds.
void write_synthetic_mnist(const std::filesystem::path& dir, std::size_t train_count, std::size_t test_count,
                           std::uint64_t seed);

} // namespace nam

#pragma once

#include "hyperseg/core_image.hpp"

namespace hyperseg {

/// Flat erosion: pointwise minimum over the in-bounds part of the
/// structuring element. The neighborhood is restricted at the image frame,
/// no padding value is invented.
ScalarImage erode(const ScalarImage& img, const StructuringElement& se);

/// Flat dilation: pointwise maximum, dual of erode.
ScalarImage dilate(const ScalarImage& img, const StructuringElement& se);

/// Morphological gradient: dilation minus erosion. Nonnegative everywhere.
ScalarImage morph_gradient(const ScalarImage& img, const StructuringElement& se);

/// Opening: dilation of the erosion. Anti-extensive and idempotent.
ScalarImage opening(const ScalarImage& img, const StructuringElement& se);

/// Sampled Gaussian window with sigma = (size-1)/6, normalized to sum 1.
/// size must be odd and >= 3.
std::vector<double> gaussian_kernel(int size);

/// Separable Gaussian smoothing with symmetric reflection at the border
/// (index -1 maps to 0, index n maps to n-1).
ScalarImage gaussian_filter(const ScalarImage& img, int size);

/// Morphological leveling of `reference` toward `marker`: fixpoint of
/// g <- (reference /\ dilate(g)) \/ erode(g) starting from the marker,
/// iterated until the largest absolute change is <= tolerance.
///
/// max_iters <= 0 selects the default width+height bound. Throws
/// NumericalError with the residual if the bound is hit first.
ScalarImage leveling(const ScalarImage& reference, const ScalarImage& marker,
                     const StructuringElement& se, int max_iters = 0,
                     double tolerance = 1e-9);

/// How channels are simplified before gradient computation: each channel is
/// leveled using its own Gaussian-smoothed copy as the marker.
struct LevelingSpec {
    int gaussian_size = 11;                                  ///< odd, >= 3
    StructuringElement se = StructuringElement::cross4();    ///< unit SE for the iteration
    int max_iters = 0;                                       ///< <= 0: width+height
    double tolerance = 1e-9;
};

/// Channel-wise leveling of a cube per LevelingSpec.
HyperCube level_cube(const HyperCube& cube, const LevelingSpec& spec);

} // namespace hyperseg

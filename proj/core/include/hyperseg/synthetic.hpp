#pragma once

#include <cstdint>
#include <vector>

#include "hyperseg/core_image.hpp"

namespace hyperseg {

/// One painted region of the synthetic scene.
struct SyntheticRegion {
    enum class Shape { Disk, Rect };
    Shape shape = Shape::Disk;
    int cx = 0, cy = 0, radius = 0;       ///< Disk
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;   ///< Rect, half-open [x0,x1) x [y0,y1)
    double slope = 0.0;
    double intercept = 0.0;
    double rise = 0.0;
};

/// Scene description: per-pixel spectra are a triangular rise bump over the
/// transitory channels followed by a line slope*j + intercept, plus seeded
/// iid Gaussian noise clamped at zero.
struct SyntheticSpec {
    int width = 128;
    int height = 128;
    int channels = 30;
    int transitory_channels = 10;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    double background_slope = 0.0;
    double background_intercept = 0.1;
    double background_rise = 0.0;
    std::vector<SyntheticRegion> regions;
};

struct SyntheticResult {
    HyperCube cube;
    /// Full ground-truth partition: background = 1, regions 2.. in list order.
    LabelImage truth;
};

/// Triangular bump profile of the transitory range: 0 at the first channel,
/// exactly 1 at the peak, back to 0 at the last (T >= 2).
double rise_profile(int j, int transitory_channels);

/// Deterministic scene synthesis. Regions must be pairwise disjoint or fully
/// nested inside an earlier region (which they carve out); partial overlap is
/// rejected.
SyntheticResult generate_synthetic(const SyntheticSpec& spec);

} // namespace hyperseg

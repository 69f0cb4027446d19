#include "hyperseg/synthetic.hpp"

#include <algorithm>
#include <string>

#include "hyperseg/errors.hpp"
#include "hyperseg/rng.hpp"

namespace hyperseg {

namespace {

bool region_contains(const SyntheticRegion& r, int x, int y) {
    if (r.shape == SyntheticRegion::Shape::Disk) {
        const int dx = x - r.cx;
        const int dy = y - r.cy;
        return dx * dx + dy * dy <= r.radius * r.radius;
    }
    return x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1;
}

} // namespace

double rise_profile(int j, int transitory_channels) {
    const int T = transitory_channels;
    if (T <= 1) return T == 1 ? 1.0 : 0.0;
    const int peak = T / 2;
    if (j <= peak) {
        return peak == 0 ? 1.0 : static_cast<double>(j) / peak;
    }
    return static_cast<double>(T - 1 - j) / (T - 1 - peak);
}

SyntheticResult generate_synthetic(const SyntheticSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0 || spec.channels < 1) {
        throw ConfigError("generate_synthetic: invalid cube dimensions");
    }
    if (spec.transitory_channels < 0 || spec.transitory_channels >= spec.channels) {
        throw ConfigError("generate_synthetic: transitory range out of bounds");
    }
    if (spec.noise_sigma < 0.0) {
        throw ConfigError("generate_synthetic: negative noise sigma");
    }

    const int w = spec.width;
    const int h = spec.height;
    const int L = spec.channels;
    const int T = spec.transitory_channels;

    LabelImage truth(w, h, 1);    // background
    for (std::size_t r = 0; r < spec.regions.size(); ++r) {
        const SyntheticRegion& region = spec.regions[r];
        const std::int32_t label = static_cast<std::int32_t>(r) + 2;
        std::int32_t over = -1;
        bool partial = false;
        for (int y = 0; y < h && !partial; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!region_contains(region, x, y)) continue;
                const std::int32_t prev = truth(x, y);
                if (over == -1) over = prev;
                if (prev != over) {
                    partial = true;
                    break;
                }
                truth(x, y) = label;
            }
        }
        if (partial || over == -1) {
            throw DataError("generate_synthetic: region " + std::to_string(r) +
                            (over == -1 ? " is empty"
                                        : " partially overlaps an earlier region"));
        }
    }

    // Parameters per truth label: background first, then the regions.
    std::vector<double> slope{spec.background_slope};
    std::vector<double> intercept{spec.background_intercept};
    std::vector<double> bump{spec.background_rise};
    for (const SyntheticRegion& region : spec.regions) {
        slope.push_back(region.slope);
        intercept.push_back(region.intercept);
        bump.push_back(region.rise);
    }

    std::vector<double> profile(static_cast<std::size_t>(std::max(T, 0)));
    for (int j = 0; j < T; ++j) profile[static_cast<std::size_t>(j)] = rise_profile(j, T);

    HyperCube cube(w, h, L);
    Rng rng(spec.seed);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t cls = static_cast<std::size_t>(truth(x, y)) - 1;
            auto px = cube.pixel(x, y);
            for (int j = 0; j < L; ++j) {
                double v = j < T ? intercept[cls] + bump[cls] * profile[static_cast<std::size_t>(j)]
                                 : slope[cls] * j + intercept[cls];
                if (spec.noise_sigma > 0.0) v += spec.noise_sigma * rng.gaussian();
                px[j] = std::max(v, 0.0);
            }
        }
    }
    return {std::move(cube), std::move(truth)};
}

} // namespace hyperseg

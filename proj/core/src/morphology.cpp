#include "hyperseg/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hyperseg/errors.hpp"

namespace hyperseg {

namespace {

enum class Extremum { Min, Max };

ScalarImage flat_extremum(const ScalarImage& img, const StructuringElement& se, Extremum mode) {
    ScalarImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            // The origin is always in bounds, so the neighborhood is never empty.
            double v = img(x, y);
            for (const Offset& o : se.neighbors()) {
                const int nx = x + o.dx;
                const int ny = y + o.dy;
                if (!img.in_bounds(nx, ny)) continue;
                const double n = img(nx, ny);
                v = mode == Extremum::Min ? std::min(v, n) : std::max(v, n);
            }
            out(x, y) = v;
        }
    }
    return out;
}

int reflect_index(int i, int n) {
    // Symmetric reflection: -1 -> 0, n -> n-1.
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

} // namespace

ScalarImage erode(const ScalarImage& img, const StructuringElement& se) {
    return flat_extremum(img, se, Extremum::Min);
}

ScalarImage dilate(const ScalarImage& img, const StructuringElement& se) {
    return flat_extremum(img, se, Extremum::Max);
}

ScalarImage morph_gradient(const ScalarImage& img, const StructuringElement& se) {
    ScalarImage hi = dilate(img, se);
    const ScalarImage lo = erode(img, se);
    for (std::size_t i = 0; i < hi.size(); ++i) hi.data()[i] -= lo.data()[i];
    return hi;
}

ScalarImage opening(const ScalarImage& img, const StructuringElement& se) {
    return dilate(erode(img, se), se);
}

std::vector<double> gaussian_kernel(int size) {
    if (size < 3 || size % 2 == 0) {
        throw ConfigError("gaussian_kernel: size must be odd and >= 3, got " +
                          std::to_string(size));
    }
    const int r = (size - 1) / 2;
    const double sigma = (size - 1) / 6.0;
    std::vector<double> k(static_cast<std::size_t>(size));
    double sum = 0.0;
    for (int t = -r; t <= r; ++t) {
        const double w = std::exp(-0.5 * (t / sigma) * (t / sigma));
        k[static_cast<std::size_t>(t + r)] = w;
        sum += w;
    }
    for (double& w : k) w /= sum;
    return k;
}

ScalarImage gaussian_filter(const ScalarImage& img, int size) {
    const std::vector<double> k = gaussian_kernel(size);
    const int r = (size - 1) / 2;
    const int w = img.width();
    const int h = img.height();

    ScalarImage horiz(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int t = -r; t <= r; ++t) {
                acc += k[static_cast<std::size_t>(t + r)] * img(reflect_index(x + t, w), y);
            }
            horiz(x, y) = acc;
        }
    }
    ScalarImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int t = -r; t <= r; ++t) {
                acc += k[static_cast<std::size_t>(t + r)] * horiz(x, reflect_index(y + t, h));
            }
            out(x, y) = acc;
        }
    }
    return out;
}

ScalarImage leveling(const ScalarImage& reference, const ScalarImage& marker,
                     const StructuringElement& se, int max_iters, double tolerance) {
    if (reference.width() != marker.width() || reference.height() != marker.height()) {
        throw DataError("leveling: reference and marker grids differ");
    }
    if (tolerance < 0.0) {
        throw ConfigError("leveling: negative tolerance");
    }
    if (max_iters <= 0) max_iters = reference.width() + reference.height();

    ScalarImage g = marker;
    double residual = 0.0;
    for (int iter = 0; iter < max_iters; ++iter) {
        const ScalarImage up = dilate(g, se);
        const ScalarImage down = erode(g, se);
        residual = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double next =
                std::max(std::min(reference.data()[i], up.data()[i]), down.data()[i]);
            residual = std::max(residual, std::abs(next - g.data()[i]));
            g.data()[i] = next;
        }
        if (residual <= tolerance) return g;
    }
    throw NumericalError("leveling: no fixpoint after " + std::to_string(max_iters) +
                         " iterations, residual " + std::to_string(residual));
}

HyperCube level_cube(const HyperCube& cube, const LevelingSpec& spec) {
    HyperCube out(cube.width(), cube.height(), cube.channels());
    out.set_channel_labels(cube.channel_labels());
    for (int j = 0; j < cube.channels(); ++j) {
        const ScalarImage ref = cube.channel(j);
        const ScalarImage marker = gaussian_filter(ref, spec.gaussian_size);
        out.set_channel(j, leveling(ref, marker, spec.se, spec.max_iters, spec.tolerance));
    }
    return out;
}

} // namespace hyperseg

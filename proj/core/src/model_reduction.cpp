#include "hyperseg/model_reduction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hyperseg/errors.hpp"

namespace hyperseg {

void ModelSpec::validate(int channels) const {
    if (transitory_channels < 0 || transitory_channels >= channels) {
        throw ConfigError("ModelSpec: transitory channel count " +
                          std::to_string(transitory_channels) + " out of range for " +
                          std::to_string(channels) + " channels");
    }
    const int begin = resolved_fit_begin();
    const int end = resolved_fit_end(channels);
    if (begin < 0 || end > channels || end - begin < 2) {
        throw ConfigError("ModelSpec: fit range [" + std::to_string(begin) + "," +
                          std::to_string(end) + ") needs at least 2 channels");
    }
    if (!x_values.empty() && x_values.size() != static_cast<std::size_t>(channels)) {
        throw ConfigError("ModelSpec: x_values must list one abscissa per channel");
    }
}

std::pair<ScalarImage, ScalarImage> fit_linear(const HyperCube& cube, const ModelSpec& spec) {
    spec.validate(cube.channels());
    const int begin = spec.resolved_fit_begin();
    const int end = spec.resolved_fit_end(cube.channels());
    const int n = end - begin;

    double sx = 0.0;
    double sxx = 0.0;
    for (int j = begin; j < end; ++j) {
        const double x = spec.x_of(j);
        sx += x;
        sxx += x * x;
    }
    const double denom = n * sxx - sx * sx;
    if (!(std::abs(denom) > 0.0)) {
        throw ConfigError("fit_linear: degenerate abscissa (all x values equal)");
    }

    ScalarImage a(cube.width(), cube.height());
    ScalarImage b(cube.width(), cube.height());
    for (int y = 0; y < cube.height(); ++y) {
        for (int x = 0; x < cube.width(); ++x) {
            const auto px = cube.pixel(x, y);
            double sy = 0.0;
            double sxy = 0.0;
            for (int j = begin; j < end; ++j) {
                sy += px[j];
                sxy += spec.x_of(j) * px[j];
            }
            const double slope = (n * sxy - sx * sy) / denom;
            a(x, y) = slope;
            b(x, y) = (sy - slope * sx) / n;
        }
    }
    return {std::move(a), std::move(b)};
}

ScalarImage rise(const HyperCube& cube, const ModelSpec& spec) {
    spec.validate(cube.channels());
    const int T = spec.transitory_channels;
    if (T < 1) {
        throw ConfigError("rise: empty transitory range");
    }
    ScalarImage m(cube.width(), cube.height());
    for (int y = 0; y < cube.height(); ++y) {
        for (int x = 0; x < cube.width(); ++x) {
            const auto px = cube.pixel(x, y);
            double lo = px[0];
            double hi = px[0];
            for (int j = 1; j < T; ++j) {
                lo = std::min(lo, px[j]);
                hi = std::max(hi, px[j]);
            }
            m(x, y) = hi - lo;
        }
    }
    return m;
}

HyperCube build_parameters(const HyperCube& cube, const ModelSpec& spec) {
    spec.validate(cube.channels());
    auto [a, b] = fit_linear(cube, spec);
    if (spec.transitory_channels == 0) {
        HyperCube params = assemble_channels({a, b});
        params.set_channel_labels({"a", "b"});
        return params;
    }
    HyperCube params = assemble_channels({a, b, rise(cube, spec)});
    params.set_channel_labels({"a", "b", "m"});
    return params;
}

} // namespace hyperseg

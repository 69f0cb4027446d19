#pragma once

#include <utility>
#include <vector>

#include "hyperseg/core_image.hpp"

namespace hyperseg {

/// Per-pixel parametric model: the leading `transitory_channels` channels
/// carry the rise, a line y = a*x + b is fitted on the remainder.
struct ModelSpec {
    int transitory_channels = 10;    ///< T; channels [0,T) form the transitory range
    int fit_begin = -1;              ///< < 0: defaults to T
    int fit_end = -1;                ///< < 0: defaults to L
    std::vector<double> x_values;    ///< abscissa per channel; empty: channel index

    int resolved_fit_begin() const { return fit_begin < 0 ? transitory_channels : fit_begin; }
    int resolved_fit_end(int channels) const { return fit_end < 0 ? channels : fit_end; }
    double x_of(int j) const {
        return x_values.empty() ? static_cast<double>(j) : x_values[static_cast<std::size_t>(j)];
    }
    /// Throws ConfigError when the ranges do not fit an L-channel cube.
    void validate(int channels) const;
};

/// Ordinary least squares of each pixel spectrum over the fit range.
/// Returns (slope a, intercept b). Exact on exactly-linear spectra.
std::pair<ScalarImage, ScalarImage> fit_linear(const HyperCube& cube, const ModelSpec& spec);

/// Rise m: max - min over the transitory channels. Nonnegative.
ScalarImage rise(const HyperCube& cube, const ModelSpec& spec);

/// Assemble the parameter cube p(x) with channels named "a", "b" and,
/// when the transitory range is non-empty, "m".
HyperCube build_parameters(const HyperCube& cube, const ModelSpec& spec);

} // namespace hyperseg

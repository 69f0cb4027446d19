#pragma once

#include "hyperseg/core_image.hpp"
#include "hyperseg/gradients.hpp"

namespace hyperseg {

/// How the relief is flooded.
struct FloodSpec {
    int levels = 256;    ///< quantization of the [0,1] gradient, >= 2
    StructuringElement connectivity = StructuringElement::square8();
    bool emit_lines = false;    ///< true: watershed pixels keep label 0
};

/// Quantized priority of a gradient value: min(levels-1, floor(g * levels)).
int quantize_level(double g, int levels);

/// Marker-controlled flooding of a normalized gradient. Seeds are the
/// positive marker labels; pixels are conquered level by level through a
/// hierarchical queue, FIFO within a level, neighbors visited in the
/// structuring element's offset order and enqueued at
/// max(own level, current level). With emit_lines=false every pixel receives
/// a marker label; with emit_lines=true pixels reached by two labels at once
/// stay 0.
LabelImage watershed(const ScalarImage& gradient01, const LabelImage& markers,
                     const FloodSpec& spec);

/// Convenience composition: build the gradient of a space, then flood it.
LabelImage segment(const HyperCube& space, const LabelImage& markers,
                   const GradientSpec& gspec, const FloodSpec& fspec);

} // namespace hyperseg

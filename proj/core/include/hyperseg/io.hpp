#pragma once

#include <filesystem>
#include <string>

#include "hyperseg/core_image.hpp"
#include "hyperseg/factor_reduction.hpp"
#include "hyperseg/metrics.hpp"

namespace hyperseg {

/// On-disk dtype of a HYP1 payload.
enum class Hyp1Dtype { F32, U16 };

/// HYP1 container: "HYP1" magic, u32 little-endian header length, JSON header
/// {width, height, channels, dtype, byte_order, channel_labels}, then the raw
/// pixel-major payload in little-endian order. f32 payloads round-trip
/// bit-exactly.
void write_hyp1(const std::filesystem::path& path, const HyperCube& cube,
                Hyp1Dtype dtype = Hyp1Dtype::F32);
HyperCube read_hyp1(const std::filesystem::path& path);

/// Scalar plane as a single-channel HYP1.
void write_hyp1(const std::filesystem::path& path, const ScalarImage& img,
                Hyp1Dtype dtype = Hyp1Dtype::F32);
ScalarImage read_hyp1_scalar(const std::filesystem::path& path);

/// Labels as a single-channel u16 HYP1 (labels above 65535 are rejected).
void write_label_hyp1(const std::filesystem::path& path, const LabelImage& labels);
LabelImage read_label_hyp1(const std::filesystem::path& path);

/// Binary PGM (P5), rescaled to the full 8-bit range for display.
void write_pgm(const std::filesystem::path& path, const ScalarImage& img);
/// Raw PGM values (0..maxval) as doubles.
ScalarImage read_pgm(const std::filesystem::path& path);

/// 8-bit grayscale PNG, rescaled for display.
void write_png_gray(const std::filesystem::path& path, const ScalarImage& img);
/// 8- or 16-bit grayscale PNG as raw values.
ScalarImage read_png_gray(const std::filesystem::path& path);

/// Labels as an RGB PNG through a fixed 256-entry palette (label 0 is black,
/// labels above 255 reuse palette entries).
void write_label_png(const std::filesystem::path& path, const LabelImage& labels);

/// Deterministic palette entry for a label.
void label_color(std::int32_t label, unsigned char rgb[3]);

/// Channel stack import: every *.png / *.pgm in the directory, sorted
/// lexicographically by filename, becomes one channel.
HyperCube read_channel_stack(const std::filesystem::path& dir);

/// Model caching as JSON documents.
void save_fca_model(const std::filesystem::path& path, const FcaModel& model);
FcaModel load_fca_model(const std::filesystem::path& path);
void save_pca_model(const std::filesystem::path& path, const PcaModel& model);
PcaModel load_pca_model(const std::filesystem::path& path);

/// Metrics report as JSON (region sizes plus F1 against the truth).
void save_metrics(const std::filesystem::path& path, const SegmentationMetrics& metrics);

} // namespace hyperseg

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hyperseg {

/// Integer pixel offset used by structuring elements and connectivity.
struct Offset {
    int dx = 0;
    int dy = 0;
    friend bool operator==(const Offset&, const Offset&) = default;
};

/// Neighborhood offset set for morphology and flooding. Always contains the
/// origin and is symmetric under negation so that erosion and dilation stay
/// adjoint.
class StructuringElement {
public:
    /// Origin + 4-neighbors (the unit-size stand-in on a square grid).
    static StructuringElement cross4();
    /// Full 3x3 block.
    static StructuringElement square8();
    /// Discrete Euclidean disk: offsets with dx^2 + dy^2 <= r^2.
    static StructuringElement disk(int radius);
    /// Custom offsets; validated (origin present, symmetric, deduplicated).
    static StructuringElement from_offsets(std::string name, std::vector<Offset> offsets);

    const std::string& name() const { return name_; }
    /// All offsets, origin included. Deterministic order.
    const std::vector<Offset>& offsets() const { return offsets_; }
    /// Offsets without the origin, for connectivity and metric neighborhoods.
    const std::vector<Offset>& neighbors() const { return neighbors_; }

private:
    StructuringElement(std::string name, std::vector<Offset> offsets);

    std::string name_;
    std::vector<Offset> offsets_;
    std::vector<Offset> neighbors_;
};

/// One scalar plane on the pixel grid: a channel, a parameter map or a
/// gradient.
class ScalarImage {
public:
    ScalarImage() = default;
    ScalarImage(int width, int height, double fill = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    double operator()(int x, int y) const { return data_[idx(x, y)]; }
    double& operator()(int x, int y) { return data_[idx(x, y)]; }
    /// Bounds-checked access.
    double at(int x, int y) const;

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    double min() const;
    double max() const;

private:
    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// Integer region/marker/cluster map on the pixel grid; label 0 means
/// unassigned or background.
class LabelImage {
public:
    LabelImage() = default;
    LabelImage(int width, int height, std::int32_t fill = 0);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return labels_.size(); }
    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    std::int32_t operator()(int x, int y) const { return labels_[idx(x, y)]; }
    std::int32_t& operator()(int x, int y) { return labels_[idx(x, y)]; }
    std::int32_t at(int x, int y) const;

    const std::vector<std::int32_t>& data() const { return labels_; }
    std::vector<std::int32_t>& data() { return labels_; }

    std::int32_t max_label() const;
    /// Pixel count per label, indexed 0..max_label().
    std::vector<std::size_t> label_sizes() const;

private:
    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::int32_t> labels_;
};

/// P-pixel x L-channel raster, the central multivariate image. Storage is
/// pixel-major: the L values of one pixel are contiguous, which is the access
/// pattern of every per-pixel distance and clustering step. Values are kept
/// at 64-bit precision regardless of input bit depth.
class HyperCube {
public:
    HyperCube() = default;
    HyperCube(int width, int height, int channels, double fill = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width_) * height_;
    }
    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    double operator()(int x, int y, int j) const { return data_[idx(x, y, j)]; }
    double& operator()(int x, int y, int j) { return data_[idx(x, y, j)]; }
    /// Bounds-checked access.
    double at(int x, int y, int j) const;

    std::span<const double> pixel(int x, int y) const {
        return {data_.data() + idx(x, y, 0), static_cast<std::size_t>(channels_)};
    }
    std::span<double> pixel(int x, int y) {
        return {data_.data() + idx(x, y, 0), static_cast<std::size_t>(channels_)};
    }
    std::span<const double> pixel(std::size_t flat_index) const {
        return {data_.data() + flat_index * channels_, static_cast<std::size_t>(channels_)};
    }
    std::span<double> pixel(std::size_t flat_index) {
        return {data_.data() + flat_index * channels_, static_cast<std::size_t>(channels_)};
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    /// Optional per-channel names (wavelength / time index / parameter name).
    const std::vector<std::string>& channel_labels() const { return channel_labels_; }
    void set_channel_labels(std::vector<std::string> labels);

    /// Extract channel j as a scalar plane. Throws on out-of-range j.
    ScalarImage channel(int j) const;
    void set_channel(int j, const ScalarImage& img);

    double sum() const;

private:
    std::size_t idx(int x, int y, int j) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + j;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
    std::vector<std::string> channel_labels_;
};

/// Reassemble a cube from per-channel planes (inverse of channel extraction).
HyperCube assemble_channels(const std::vector<ScalarImage>& channels);

/// Label connected groups of nonzero pixels 1..n in first-encounter raster
/// scan order, connected through the structuring element's neighbor offsets.
LabelImage connected_components(const LabelImage& mask, const StructuringElement& se);

} // namespace hyperseg

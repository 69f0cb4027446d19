#include "hyperseg/core_image.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "hyperseg/errors.hpp"

namespace hyperseg {

namespace {

std::vector<Offset> validate_offsets(const std::string& name, std::vector<Offset> offsets) {
    if (offsets.empty()) {
        throw ConfigError("structuring element '" + name + "': empty offset set");
    }
    std::set<std::pair<int, int>> unique;
    for (const Offset& o : offsets) unique.insert({o.dx, o.dy});
    if (!unique.count({0, 0})) {
        throw ConfigError("structuring element '" + name + "': origin (0,0) missing");
    }
    for (const auto& [dx, dy] : unique) {
        if (!unique.count({-dx, -dy})) {
            throw ConfigError("structuring element '" + name + "': offset (" +
                              std::to_string(dx) + "," + std::to_string(dy) +
                              ") has no negated counterpart");
        }
    }
    std::vector<Offset> result;
    result.reserve(unique.size());
    for (const auto& [dx, dy] : unique) result.push_back({dx, dy});
    return result;
}

} // namespace

StructuringElement::StructuringElement(std::string name, std::vector<Offset> offsets)
    : name_(std::move(name)), offsets_(validate_offsets(name_, std::move(offsets))) {
    neighbors_.reserve(offsets_.size() - 1);
    for (const Offset& o : offsets_) {
        if (o.dx != 0 || o.dy != 0) neighbors_.push_back(o);
    }
}

StructuringElement StructuringElement::cross4() {
    return StructuringElement("cross4", {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}});
}

StructuringElement StructuringElement::square8() {
    std::vector<Offset> offsets;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) offsets.push_back({dx, dy});
    return StructuringElement("square8", std::move(offsets));
}

StructuringElement StructuringElement::disk(int radius) {
    if (radius < 0) throw ConfigError("disk structuring element: negative radius");
    std::vector<Offset> offsets;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dx * dx + dy * dy <= radius * radius) offsets.push_back({dx, dy});
    return StructuringElement("disk(" + std::to_string(radius) + ")", std::move(offsets));
}

StructuringElement StructuringElement::from_offsets(std::string name, std::vector<Offset> offsets) {
    return StructuringElement(std::move(name), std::move(offsets));
}

ScalarImage::ScalarImage(int width, int height, double fill)
    : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
        throw ConfigError("ScalarImage: dimensions must be positive");
    }
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

double ScalarImage::at(int x, int y) const {
    if (!in_bounds(x, y)) {
        throw DataError("ScalarImage: access (" + std::to_string(x) + "," +
                        std::to_string(y) + ") outside " + std::to_string(width_) +
                        "x" + std::to_string(height_));
    }
    return (*this)(x, y);
}

double ScalarImage::min() const {
    return *std::min_element(data_.begin(), data_.end());
}

double ScalarImage::max() const {
    return *std::max_element(data_.begin(), data_.end());
}

LabelImage::LabelImage(int width, int height, std::int32_t fill)
    : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
        throw ConfigError("LabelImage: dimensions must be positive");
    }
    labels_.assign(static_cast<std::size_t>(width) * height, fill);
}

std::int32_t LabelImage::at(int x, int y) const {
    if (!in_bounds(x, y)) {
        throw DataError("LabelImage: access (" + std::to_string(x) + "," +
                        std::to_string(y) + ") outside " + std::to_string(width_) +
                        "x" + std::to_string(height_));
    }
    return (*this)(x, y);
}

std::int32_t LabelImage::max_label() const {
    std::int32_t m = 0;
    for (std::int32_t v : labels_) m = std::max(m, v);
    return m;
}

std::vector<std::size_t> LabelImage::label_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(max_label()) + 1, 0);
    for (std::int32_t v : labels_) {
        if (v >= 0) ++sizes[static_cast<std::size_t>(v)];
    }
    return sizes;
}

HyperCube::HyperCube(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
    if (width <= 0 || height <= 0) {
        throw ConfigError("HyperCube: dimensions must be positive");
    }
    if (channels < 1) {
        throw ConfigError("HyperCube: at least one channel required");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

double HyperCube::at(int x, int y, int j) const {
    if (!in_bounds(x, y) || j < 0 || j >= channels_) {
        throw DataError("HyperCube: access (" + std::to_string(x) + "," +
                        std::to_string(y) + "," + std::to_string(j) + ") outside " +
                        std::to_string(width_) + "x" + std::to_string(height_) + "x" +
                        std::to_string(channels_));
    }
    return (*this)(x, y, j);
}

void HyperCube::set_channel_labels(std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != static_cast<std::size_t>(channels_)) {
        throw ConfigError("HyperCube: channel label count does not match channel count");
    }
    channel_labels_ = std::move(labels);
}

ScalarImage HyperCube::channel(int j) const {
    if (j < 0 || j >= channels_) {
        throw ConfigError("HyperCube::channel: index " + std::to_string(j) +
                          " out of range [0," + std::to_string(channels_) + ")");
    }
    ScalarImage img(width_, height_);
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x) img(x, y) = (*this)(x, y, j);
    return img;
}

void HyperCube::set_channel(int j, const ScalarImage& img) {
    if (j < 0 || j >= channels_) {
        throw ConfigError("HyperCube::set_channel: index out of range");
    }
    if (img.width() != width_ || img.height() != height_) {
        throw DataError("HyperCube::set_channel: grid mismatch");
    }
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x) (*this)(x, y, j) = img(x, y);
}

double HyperCube::sum() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
}

HyperCube assemble_channels(const std::vector<ScalarImage>& channels) {
    if (channels.empty()) {
        throw ConfigError("assemble_channels: no channels given");
    }
    const int w = channels.front().width();
    const int h = channels.front().height();
    for (const ScalarImage& c : channels) {
        if (c.width() != w || c.height() != h) {
            throw DataError("assemble_channels: channel grids differ");
        }
    }
    HyperCube cube(w, h, static_cast<int>(channels.size()));
    for (int j = 0; j < cube.channels(); ++j) cube.set_channel(j, channels[j]);
    return cube;
}

LabelImage connected_components(const LabelImage& mask, const StructuringElement& se) {
    const int w = mask.width();
    const int h = mask.height();
    LabelImage out(w, h, 0);
    std::int32_t next = 0;
    std::deque<std::pair<int, int>> queue;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (mask(x, y) == 0 || out(x, y) != 0) continue;
            ++next;
            out(x, y) = next;
            queue.push_back({x, y});
            while (!queue.empty()) {
                const auto [cx, cy] = queue.front();
                queue.pop_front();
                for (const Offset& o : se.neighbors()) {
                    const int nx = cx + o.dx;
                    const int ny = cy + o.dy;
                    if (!mask.in_bounds(nx, ny)) continue;
                    if (mask(nx, ny) == 0 || out(nx, ny) != 0) continue;
                    out(nx, ny) = next;
                    queue.push_back({nx, ny});
                }
            }
        }
    }
    return out;
}

} // namespace hyperseg

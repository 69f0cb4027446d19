#include "hyperseg/watershed.hpp"

#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include "hyperseg/errors.hpp"

namespace hyperseg {

int quantize_level(double g, int levels) {
    const int q = static_cast<int>(std::floor(g * levels));
    return q >= levels ? levels - 1 : q;
}

LabelImage watershed(const ScalarImage& gradient01, const LabelImage& markers,
                     const FloodSpec& spec) {
    const int w = gradient01.width();
    const int h = gradient01.height();
    if (markers.width() != w || markers.height() != h) {
        throw DataError("watershed: marker grid does not match the gradient");
    }
    if (spec.levels < 2) {
        throw ConfigError("watershed: at least 2 quantization levels required");
    }
    for (double v : gradient01.data()) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DataError("watershed: gradient value " + std::to_string(v) +
                            " outside [0,1]");
        }
    }

    LabelImage out = markers;
    enum : unsigned char { kFar = 0, kQueued = 1, kDone = 2 };
    std::vector<unsigned char> state(out.size(), kFar);

    std::vector<int> level(out.size());
    for (std::size_t i = 0; i < level.size(); ++i) {
        level[i] = quantize_level(gradient01.data()[i], spec.levels);
    }

    struct Entry {
        int x;
        int y;
        std::int32_t label;
    };
    std::vector<std::deque<Entry>> queues(static_cast<std::size_t>(spec.levels));
    const auto flat = [w](int x, int y) {
        return static_cast<std::size_t>(y) * w + x;
    };

    bool any_marker = false;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::int32_t lab = markers(x, y);
            if (lab < 0) {
                throw DataError("watershed: negative marker label");
            }
            if (lab > 0) {
                any_marker = true;
                state[flat(x, y)] = kDone;
            }
        }
    }
    if (!any_marker) {
        throw DataError("watershed: no marker labels to flood from");
    }

    // Seed: every unclaimed neighbor of a marker enters at its own level.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::int32_t lab = markers(x, y);
            if (lab <= 0) continue;
            for (const Offset& o : spec.connectivity.neighbors()) {
                const int nx = x + o.dx;
                const int ny = y + o.dy;
                if (!out.in_bounds(nx, ny)) continue;
                const std::size_t ni = flat(nx, ny);
                if (state[ni] != kFar) continue;
                state[ni] = kQueued;
                queues[static_cast<std::size_t>(level[ni])].push_back({nx, ny, lab});
            }
        }
    }

    for (int current = 0; current < spec.levels; ++current) {
        auto& queue = queues[static_cast<std::size_t>(current)];
        while (!queue.empty()) {
            const Entry e = queue.front();
            queue.pop_front();
            const std::size_t ei = flat(e.x, e.y);
            if (state[ei] == kDone) continue;

            if (spec.emit_lines) {
                // A pixel claimed by two different basins becomes a line pixel.
                std::int32_t seen = 0;
                bool conflict = false;
                for (const Offset& o : spec.connectivity.neighbors()) {
                    const int nx = e.x + o.dx;
                    const int ny = e.y + o.dy;
                    if (!out.in_bounds(nx, ny)) continue;
                    const std::size_t ni = flat(nx, ny);
                    if (state[ni] != kDone) continue;
                    const std::int32_t lab = out(nx, ny);
                    if (lab == 0) continue;
                    if (seen == 0) {
                        seen = lab;
                    } else if (seen != lab) {
                        conflict = true;
                        break;
                    }
                }
                if (conflict) {
                    state[ei] = kDone;
                    out(e.x, e.y) = 0;
                    continue;
                }
            }

            state[ei] = kDone;
            out(e.x, e.y) = e.label;
            for (const Offset& o : spec.connectivity.neighbors()) {
                const int nx = e.x + o.dx;
                const int ny = e.y + o.dy;
                if (!out.in_bounds(nx, ny)) continue;
                const std::size_t ni = flat(nx, ny);
                if (state[ni] != kFar) continue;
                state[ni] = kQueued;
                const int lvl = level[ni] > current ? level[ni] : current;
                queues[static_cast<std::size_t>(lvl)].push_back({nx, ny, e.label});
            }
        }
    }
    return out;
}

LabelImage segment(const HyperCube& space, const LabelImage& markers,
                   const GradientSpec& gspec, const FloodSpec& fspec) {
    return watershed(gradient(space, gspec), markers, fspec);
}

} // namespace hyperseg

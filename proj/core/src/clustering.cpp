#include "hyperseg/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hyperseg/errors.hpp"
#include "hyperseg/morphology.hpp"
#include "hyperseg/rng.hpp"

namespace hyperseg {

namespace {

class DistanceMatrix {
public:
    DistanceMatrix(const PointsView& points, const DistanceKind& dist)
        : n_(points.count), d_(points.count * points.count, 0.0) {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i + 1; j < n_; ++j) {
                const double v = dist(points.row(i), points.row(j));
                d_[i * n_ + j] = v;
                d_[j * n_ + i] = v;
            }
        }
    }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    std::size_t size() const { return n_; }

private:
    std::size_t n_;
    std::vector<double> d_;
};

struct NearestPair {
    double d1 = std::numeric_limits<double>::infinity();
    double d2 = std::numeric_limits<double>::infinity();
    std::size_t m1 = 0;    // position in the medoid list
};

std::vector<NearestPair> nearest_medoids(const DistanceMatrix& D,
                                         const std::vector<std::size_t>& medoids) {
    std::vector<NearestPair> near(D.size());
    for (std::size_t j = 0; j < D.size(); ++j) {
        NearestPair np;
        for (std::size_t mi = 0; mi < medoids.size(); ++mi) {
            const double d = D(j, medoids[mi]);
            if (d < np.d1) {
                np.d2 = np.d1;
                np.d1 = d;
                np.m1 = mi;
            } else if (d < np.d2) {
                np.d2 = d;
            }
        }
        near[j] = np;
    }
    return near;
}

ClusteringResult assign_to_medoids(const PointsView& points,
                                   std::vector<std::size_t> medoids,
                                   const DistanceKind& dist) {
    std::sort(medoids.begin(), medoids.end());
    ClusteringResult result;
    result.assignment.assign(points.count, 0);
    result.cost = 0.0;
    for (std::size_t j = 0; j < points.count; ++j) {
        double best = std::numeric_limits<double>::infinity();
        int best_c = 0;
        for (std::size_t c = 0; c < medoids.size(); ++c) {
            const double d = dist(points.row(j), points.row(medoids[c]));
            if (d < best) {
                best = d;
                best_c = static_cast<int>(c);
            }
        }
        result.assignment[j] = best_c;
        result.cost += best;
    }
    result.medoids = std::move(medoids);
    return result;
}

} // namespace

ClusteringResult pam(const PointsView& points, int k, const DistanceKind& dist) {
    const std::size_t n = points.count;
    if (k < 1 || static_cast<std::size_t>(k) > n) {
        throw ConfigError("pam: k must be in [1," + std::to_string(n) + "], got " +
                          std::to_string(k));
    }
    if (static_cast<std::size_t>(k) == n) {
        ClusteringResult result;
        result.medoids.resize(n);
        result.assignment.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            result.medoids[i] = i;
            result.assignment[i] = static_cast<int>(i);
        }
        result.cost = 0.0;
        return result;
    }

    const DistanceMatrix D(points, dist);
    std::vector<std::size_t> medoids;
    medoids.reserve(static_cast<std::size_t>(k));
    std::vector<char> is_medoid(n, 0);

    // BUILD: start from the most central point, then greedily add the point
    // with the largest cost reduction. Ties go to the lowest index.
    {
        std::size_t best = 0;
        double best_total = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            double total = 0.0;
            for (std::size_t j = 0; j < n; ++j) total += D(i, j);
            if (total < best_total) {
                best_total = total;
                best = i;
            }
        }
        medoids.push_back(best);
        is_medoid[best] = 1;
    }
    std::vector<double> dist_to_set(n);
    for (std::size_t j = 0; j < n; ++j) dist_to_set[j] = D(j, medoids[0]);

    while (medoids.size() < static_cast<std::size_t>(k)) {
        std::size_t best = n;
        double best_profit = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (is_medoid[i]) continue;
            double profit = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (is_medoid[j] || j == i) continue;
                profit += std::max(0.0, dist_to_set[j] - D(j, i));
            }
            if (profit > best_profit) {
                best_profit = profit;
                best = i;
            }
        }
        medoids.push_back(best);
        is_medoid[best] = 1;
        for (std::size_t j = 0; j < n; ++j) {
            dist_to_set[j] = std::min(dist_to_set[j], D(j, best));
        }
    }

    // SWAP: steepest descent over all (medoid, candidate) exchanges.
    const std::size_t max_sweeps = 100 + 10 * static_cast<std::size_t>(k);
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        const std::vector<NearestPair> near = nearest_medoids(D, medoids);
        double current_cost = 0.0;
        for (const NearestPair& np : near) current_cost += np.d1;

        double best_delta = 0.0;
        std::size_t best_mi = medoids.size();
        std::size_t best_h = n;
        for (std::size_t mi = 0; mi < medoids.size(); ++mi) {
            for (std::size_t h = 0; h < n; ++h) {
                if (is_medoid[h]) continue;
                double delta = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double keep = near[j].m1 == mi ? near[j].d2 : near[j].d1;
                    delta += std::min(keep, D(j, h)) - near[j].d1;
                }
                if (delta < best_delta) {
                    best_delta = delta;
                    best_mi = mi;
                    best_h = h;
                }
            }
        }
        // Improvements below floating-point noise are not improvements.
        if (best_delta >= -1e-12 * (1.0 + current_cost)) break;
        is_medoid[medoids[best_mi]] = 0;
        is_medoid[best_h] = 1;
        medoids[best_mi] = best_h;
    }

    ClusteringResult result;
    std::sort(medoids.begin(), medoids.end());
    result.medoids = medoids;
    result.assignment.assign(n, 0);
    result.cost = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double best = std::numeric_limits<double>::infinity();
        int best_c = 0;
        for (std::size_t c = 0; c < medoids.size(); ++c) {
            const double d = D(j, medoids[c]);
            if (d < best) {
                best = d;
                best_c = static_cast<int>(c);
            }
        }
        result.assignment[j] = best_c;
        result.cost += best;
    }
    return result;
}

ClusteringResult clara(const PointsView& points, const ClusteringSpec& spec) {
    const std::size_t n = points.count;
    if (spec.k < 2) {
        throw ConfigError("clara: k must be >= 2");
    }
    if (static_cast<std::size_t>(spec.k) > n) {
        throw ConfigError("clara: k exceeds point count");
    }
    if (spec.samples < 1) {
        throw ConfigError("clara: at least one sample required");
    }
    std::size_t sample_size =
        spec.sample_size > 0
            ? static_cast<std::size_t>(spec.sample_size)
            : std::min(n, static_cast<std::size_t>(40 + 2 * spec.k));
    sample_size = std::min(sample_size, n);
    if (sample_size < static_cast<std::size_t>(spec.k)) {
        throw ConfigError("clara: sample_size smaller than k");
    }

    Rng rng(spec.rng_seed);
    ClusteringResult best;
    best.cost = std::numeric_limits<double>::infinity();
    std::vector<double> buffer(sample_size * static_cast<std::size_t>(points.dim));

    for (int s = 0; s < spec.samples; ++s) {
        std::vector<std::size_t> idx = rng.sample_without_replacement(n, sample_size);
        // Keep original point order inside the sample so a full-size sample
        // degenerates to plain PAM.
        std::sort(idx.begin(), idx.end());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const auto row = points.row(idx[i]);
            std::copy(row.begin(), row.end(),
                      buffer.begin() + static_cast<std::ptrdiff_t>(i * row.size()));
        }
        const PointsView sample{buffer.data(), sample_size, points.dim};
        const ClusteringResult local = pam(sample, spec.k, spec.distance);

        std::vector<std::size_t> global_medoids(local.medoids.size());
        for (std::size_t c = 0; c < local.medoids.size(); ++c) {
            global_medoids[c] = idx[local.medoids[c]];
        }
        ClusteringResult candidate =
            assign_to_medoids(points, std::move(global_medoids), spec.distance);
        if (candidate.cost < best.cost) {
            best = std::move(candidate);
        }
    }
    return best;
}

namespace {

LabelImage open_mask(const LabelImage& mask, int radius) {
    if (radius <= 0) return mask;
    ScalarImage gray(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        gray.data()[i] = mask.data()[i] != 0 ? 1.0 : 0.0;
    }
    const ScalarImage opened = opening(gray, StructuringElement::disk(radius));
    LabelImage out(mask.width(), mask.height(), 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = opened.data()[i] > 0.5 ? 1 : 0;
    }
    return out;
}

} // namespace

LabelImage extract_markers(const HyperCube& space, const MarkerSpec& spec) {
    const int w = space.width();
    const int h = space.height();
    const PointsView pts = PointsView::of_cube(space);

    const ClusteringResult stage1 = clara(pts, spec.stage1);
    const int k1 = spec.stage1.k;

    std::vector<std::size_t> sizes(static_cast<std::size_t>(k1), 0);
    for (int a : stage1.assignment) ++sizes[static_cast<std::size_t>(a)];

    int selected = 0;
    switch (spec.select) {
    case MarkerSpec::Select::Index:
        if (spec.select_index < 0 || spec.select_index >= k1) {
            throw ConfigError("extract_markers: selected cluster index out of range");
        }
        selected = spec.select_index;
        break;
    case MarkerSpec::Select::Smallest: {
        std::size_t best = sizes[0];
        for (int c = 1; c < k1; ++c) {
            if (sizes[static_cast<std::size_t>(c)] < best) {
                best = sizes[static_cast<std::size_t>(c)];
                selected = c;
            }
        }
        break;
    }
    case MarkerSpec::Select::Center: {
        const double cx = (w - 1) / 2.0;
        const double cy = (h - 1) / 2.0;
        std::vector<double> sx(static_cast<std::size_t>(k1), 0.0);
        std::vector<double> sy(static_cast<std::size_t>(k1), 0.0);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const int c = stage1.assignment[static_cast<std::size_t>(y) * w + x];
                sx[static_cast<std::size_t>(c)] += x;
                sy[static_cast<std::size_t>(c)] += y;
            }
        }
        double best = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k1; ++c) {
            const double count = static_cast<double>(sizes[static_cast<std::size_t>(c)]);
            if (count == 0.0) continue;
            const double dx = sx[static_cast<std::size_t>(c)] / count - cx;
            const double dy = sy[static_cast<std::size_t>(c)] / count - cy;
            const double d = dx * dx + dy * dy;
            if (d < best) {
                best = d;
                selected = c;
            }
        }
        break;
    }
    case MarkerSpec::Select::All:
        if (spec.stage2.has_value()) {
            throw ConfigError("extract_markers: select=all cannot be combined with a "
                              "second clustering stage");
        }
        break;
    }

    // Final cluster-id map; masks are taken per final cluster id.
    std::vector<int> final_id(space.pixel_count(), -1);
    int final_k = 0;
    if (spec.select == MarkerSpec::Select::All) {
        for (std::size_t p = 0; p < space.pixel_count(); ++p) {
            final_id[p] = stage1.assignment[p];
        }
        final_k = k1;
    } else if (spec.stage2.has_value()) {
        std::vector<std::size_t> sel_idx;
        for (std::size_t p = 0; p < space.pixel_count(); ++p) {
            if (stage1.assignment[p] == selected) sel_idx.push_back(p);
        }
        if (sel_idx.size() < static_cast<std::size_t>(spec.stage2->k)) {
            throw DataError("extract_markers: selected cluster has fewer pixels than "
                            "stage-2 k");
        }
        std::vector<double> buffer(sel_idx.size() * static_cast<std::size_t>(space.channels()));
        for (std::size_t i = 0; i < sel_idx.size(); ++i) {
            const auto row = pts.row(sel_idx[i]);
            std::copy(row.begin(), row.end(),
                      buffer.begin() + static_cast<std::ptrdiff_t>(i * row.size()));
        }
        const PointsView sel_pts{buffer.data(), sel_idx.size(), space.channels()};
        const ClusteringResult stage2 = clara(sel_pts, *spec.stage2);
        const int k2 = spec.stage2->k;

        std::vector<std::size_t> sizes2(static_cast<std::size_t>(k2), 0);
        for (int a : stage2.assignment) ++sizes2[static_cast<std::size_t>(a)];
        int largest = 0;
        for (int c = 1; c < k2; ++c) {
            if (sizes2[static_cast<std::size_t>(c)] > sizes2[static_cast<std::size_t>(largest)]) {
                largest = c;
            }
        }
        // Pixels outside the selected cluster join the largest refined cluster.
        for (std::size_t p = 0; p < space.pixel_count(); ++p) final_id[p] = largest;
        for (std::size_t i = 0; i < sel_idx.size(); ++i) {
            final_id[sel_idx[i]] = stage2.assignment[i];
        }
        final_k = k2;
    } else {
        for (std::size_t p = 0; p < space.pixel_count(); ++p) {
            final_id[p] = stage1.assignment[p] == selected ? 0 : -1;
        }
        final_k = 1;
    }

    LabelImage markers(w, h, 0);
    std::int32_t next_label = 0;
    LabelImage opened_union(w, h, 0);
    for (int c = 0; c < final_k; ++c) {
        LabelImage mask(w, h, 0);
        for (std::size_t p = 0; p < space.pixel_count(); ++p) {
            if (final_id[p] == c) mask.data()[p] = 1;
        }
        const LabelImage opened = open_mask(mask, spec.opening_radius);
        const LabelImage comps = connected_components(opened, spec.connectivity);
        for (std::size_t p = 0; p < markers.size(); ++p) {
            if (comps.data()[p] > 0) {
                markers.data()[p] = comps.data()[p] + next_label;
                opened_union.data()[p] = 1;
            }
        }
        next_label += comps.max_label();
    }
    if (next_label == 0) {
        throw DataError("extract_markers: no marker survived opening with radius " +
                        std::to_string(spec.opening_radius) +
                        "; lower opening_radius");
    }

    if (spec.background == MarkerSpec::Background::ErodedComplement) {
        const int radius = spec.background_radius < 0 ? spec.opening_radius
                                                      : spec.background_radius;
        ScalarImage complement(w, h);
        for (std::size_t p = 0; p < complement.size(); ++p) {
            complement.data()[p] = opened_union.data()[p] != 0 ? 0.0 : 1.0;
        }
        const ScalarImage eroded =
            radius > 0 ? erode(complement, StructuringElement::disk(radius)) : complement;
        bool any = false;
        for (std::size_t p = 0; p < markers.size(); ++p) {
            if (eroded.data()[p] > 0.5) {
                markers.data()[p] = next_label + 1;
                any = true;
            }
        }
        if (any) ++next_label;
    }
    return markers;
}

} // namespace hyperseg

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hyperseg/core_image.hpp"
#include "hyperseg/gradients.hpp"

namespace hyperseg {

/// Non-owning row-major n x dim point matrix. HyperCube pixel storage is
/// pixel-major, so a cube is viewable without copying.
struct PointsView {
    const double* data = nullptr;
    std::size_t count = 0;
    int dim = 0;

    std::span<const double> row(std::size_t i) const {
        return {data + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    static PointsView of_cube(const HyperCube& cube) {
        return {cube.data().data(), cube.pixel_count(), cube.channels()};
    }
};

struct ClusteringResult {
    std::vector<std::size_t> medoids;    ///< point indices, one per cluster
    std::vector<int> assignment;         ///< cluster id in [0,k) per point
    double cost = 0.0;                   ///< sum of distances to nearest medoid
};

/// k-medoids by greedy BUILD initialization and steepest-descent SWAP.
/// Deterministic given the input order; ties break toward lower indices.
ClusteringResult pam(const PointsView& points, int k, const DistanceKind& dist);

struct ClusteringSpec {
    int k = 3;
    int samples = 5;                 ///< number of seeded samples
    int sample_size = 0;             ///< 0: min(n, 40 + 2k)
    std::uint64_t rng_seed = 42;
    DistanceKind distance = DistanceKind::euclidean();
};

/// CLARA: PAM on each of `samples` random samples, every point then assigned
/// to the nearest sample medoid; the sample with the lowest full-data cost
/// wins (ties by sample index). Deterministic for a seed.
ClusteringResult clara(const PointsView& points, const ClusteringSpec& spec);

/// Two-stage marker extraction from the spectral classification.
struct MarkerSpec {
    ClusteringSpec stage1;

    enum class Select { Smallest, Center, Index, All };
    Select select = Select::Smallest;    ///< which stage-1 cluster seeds the markers
    int select_index = 0;                ///< for Select::Index

    /// Optional refinement restricted to the selected pixels; pixels outside
    /// the selection join the largest refined cluster.
    std::optional<ClusteringSpec> stage2;

    int opening_radius = 5;              ///< disk radius regularizing each mask
    enum class Background { None, ErodedComplement };
    Background background = Background::ErodedComplement;
    int background_radius = -1;          ///< < 0: opening_radius

    StructuringElement connectivity = StructuringElement::square8();
};

/// Cluster the pixel vectors, select and refine marker masks, regularize by
/// opening, and label the connected components 1..n (background seed last).
/// Throws DataError when opening erases every marker.
LabelImage extract_markers(const HyperCube& space, const MarkerSpec& spec);

} // namespace hyperseg

#pragma once

#include <vector>

#include "hyperseg/core_image.hpp"

namespace hyperseg {

/// Fitted correspondence-analysis basis of a nonnegative cube: row/column
/// masses, per-axis inertia and column principal coordinates. Projection of a
/// pixel profile and reconstruction from factors both run off this model.
struct FcaModel {
    int pixel_count = 0;                 ///< P of the fitted cube
    int channel_count = 0;               ///< L of the fitted cube
    double grand_total = 0.0;            ///< N
    std::vector<double> row_masses;      ///< size P, sums to 1
    std::vector<double> col_masses;      ///< size L, sums to 1
    std::vector<double> eigenvalues;     ///< inertia per axis, descending, >= 0
    std::vector<double> col_coords;      ///< axis-major [axis][channel], size axes*L
    int retained_axes = 0;               ///< K

    int axis_count() const { return static_cast<int>(eigenvalues.size()); }
    double total_inertia() const;
    /// Axes with eigenvalue below 1e-12 x largest are treated as null.
    double eigenvalue_floor() const;
    double col_coord(int axis, int channel) const {
        return col_coords[static_cast<std::size_t>(axis) * channel_count + channel];
    }
};

/// Fit correspondence analysis on a nonnegative cube, retaining K axes.
/// K may be 0 (pure independence model) up to min(P,L)-1.
FcaModel fca_fit(const HyperCube& cube, int retained_axes);

/// Pixel factors: row principal coordinates on the K retained axes.
HyperCube fca_project(const FcaModel& model, const HyperCube& cube);

/// Pseudo-inverse transform: approximate the original cube from factors.
/// Uses as many axes as the factor cube has channels.
HyperCube fca_reconstruct(const FcaModel& model, const HyperCube& factors);

/// Zero-axis reconstruction: the independence model N * r_x * c_j, emitted
/// on the given grid (width * height must equal the fitted pixel count).
HyperCube fca_reconstruct(const FcaModel& model, int width, int height);

/// Same, on a 1 x P grid.
HyperCube fca_reconstruct(const FcaModel& model);

/// Principal component basis of an M-channel parameter cube.
struct PcaModel {
    int dim = 0;                        ///< M
    std::vector<double> means;          ///< size M
    std::vector<double> eigenvalues;    ///< variances per axis, descending, >= 0
    std::vector<double> components;     ///< axis-major [axis][channel], orthonormal rows

    double eigenvalue_floor() const;
    double component(int axis, int channel) const {
        return components[static_cast<std::size_t>(axis) * dim + channel];
    }
    /// eigenvalue / total, the share of variance carried by each axis.
    std::vector<double> inertia_ratios() const;
};

/// Eigendecomposition of the population covariance (1/P) of pixel vectors.
PcaModel pca_fit(const HyperCube& maps);

/// Project pixel vectors onto the first `axes` components (0 = all).
/// Whitening divides axis k by sqrt(eigenvalue_k).
HyperCube pca_project(const PcaModel& model, const HyperCube& maps, bool whiten,
                      int axes = 0);

/// Inverse of pca_project for the same whiten flag.
HyperCube pca_unproject(const PcaModel& model, const HyperCube& factors, bool whiten);

} // namespace hyperseg

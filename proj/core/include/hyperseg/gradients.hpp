#pragma once

#include <span>
#include <vector>

#include "hyperseg/core_image.hpp"

namespace hyperseg {

/// Distance between vector pixels: Euclidean, Mahalanobis (full covariance or
/// diagonal variances) or chi-squared between channel profiles.
class DistanceKind {
public:
    enum class Kind { Euclidean, Mahalanobis, MahalanobisDiagonal, ChiSquared };

    static DistanceKind euclidean();
    /// Full covariance, row-major dim x dim, symmetric positive-definite.
    static DistanceKind mahalanobis(std::vector<double> covariance, int dim);
    /// Diagonal covariance: per-channel variances, all > 0.
    static DistanceKind mahalanobis_diagonal(std::vector<double> variances);
    /// Chi-squared with per-channel sums f_.j and grand total N.
    static DistanceKind chi_squared(std::vector<double> channel_sums, double grand_total);

    /// Covariance of the cube's pixel vectors (population normalization 1/P).
    static DistanceKind mahalanobis_from_cube(const HyperCube& cube, bool diagonal_only);
    /// Channel sums and grand total taken from the cube the gradient runs on.
    static DistanceKind chi_squared_from_cube(const HyperCube& cube);

    Kind kind() const { return kind_; }
    /// Required vector dimension; 0 means any (Euclidean).
    int dim() const { return dim_; }

    double operator()(std::span<const double> u, std::span<const double> v) const;

private:
    DistanceKind(Kind kind, int dim, std::vector<double> payload)
        : kind_(kind), dim_(dim), payload_(std::move(payload)) {}

    Kind kind_ = Kind::Euclidean;
    int dim_ = 0;
    // Mahalanobis: inverse covariance (row-major); diagonal: 1/variance per
    // channel; chi-squared: N / channel sum per channel.
    std::vector<double> payload_;
};

/// Free-function form of DistanceKind evaluation.
double distance(std::span<const double> u, std::span<const double> v, const DistanceKind& kind);

/// Affine min-max rescale to [0,1]. A constant image maps to all zeros so a
/// flat relief floods as a single basin.
ScalarImage normalize01(const ScalarImage& img);

/// Normalized morphological gradient of one channel.
ScalarImage gradient_marginal(const HyperCube& cube, int channel, const StructuringElement& se);

/// Supremum of the per-channel normalized morphological gradients.
ScalarImage gradient_sup(const HyperCube& cube, const StructuringElement& se);

/// Weighted sum of normalized per-channel gradients, renormalized to [0,1].
ScalarImage gradient_weighted_sum(const HyperCube& cube, const StructuringElement& se,
                                  std::span<const double> weights);

/// Metric-based gradient: per pixel, range (sup minus inf) of the distance to
/// the neighbors in B(x), center excluded, normalized to [0,1].
ScalarImage gradient_metric(const HyperCube& cube, const StructuringElement& se,
                            const DistanceKind& kind);

/// Which scalar relief is built from a multivariate image.
struct GradientSpec {
    enum class Kind { Marginal, Supremum, WeightedSum, Metric };

    Kind kind = Kind::Supremum;
    StructuringElement se = StructuringElement::square8();
    int channel = 0;                                       ///< Marginal
    std::vector<double> weights;                           ///< WeightedSum
    DistanceKind distance = DistanceKind::euclidean();     ///< Metric
};

/// Dispatch on GradientSpec.
ScalarImage gradient(const HyperCube& cube, const GradientSpec& spec);

} // namespace hyperseg

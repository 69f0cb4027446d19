#include "hyperseg/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "hyperseg/errors.hpp"
#include "hyperseg/morphology.hpp"

namespace hyperseg {

DistanceKind DistanceKind::euclidean() {
    return DistanceKind(Kind::Euclidean, 0, {});
}

DistanceKind DistanceKind::mahalanobis(std::vector<double> covariance, int dim) {
    if (dim < 1 || covariance.size() != static_cast<std::size_t>(dim) * dim) {
        throw ConfigError("mahalanobis: covariance must be dim x dim");
    }
    Eigen::Map<const Eigen::MatrixXd> cov(covariance.data(), dim, dim);
    if (!cov.isApprox(cov.transpose(), 1e-10)) {
        throw ConfigError("mahalanobis: covariance not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("mahalanobis: covariance not positive-definite");
    }
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
    std::vector<double> payload(static_cast<std::size_t>(dim) * dim);
    Eigen::Map<Eigen::MatrixXd>(payload.data(), dim, dim) = inv;
    return DistanceKind(Kind::Mahalanobis, dim, std::move(payload));
}

DistanceKind DistanceKind::mahalanobis_diagonal(std::vector<double> variances) {
    if (variances.empty()) {
        throw ConfigError("mahalanobis_diagonal: no variances given");
    }
    std::vector<double> payload(variances.size());
    for (std::size_t j = 0; j < variances.size(); ++j) {
        if (!(variances[j] > 0.0)) {
            throw NumericalError("mahalanobis_diagonal: variance of channel " +
                                 std::to_string(j) + " is not positive");
        }
        payload[j] = 1.0 / variances[j];
    }
    return DistanceKind(Kind::MahalanobisDiagonal, static_cast<int>(variances.size()),
                        std::move(payload));
}

DistanceKind DistanceKind::chi_squared(std::vector<double> channel_sums, double grand_total) {
    if (channel_sums.empty()) {
        throw ConfigError("chi_squared: no channel sums given");
    }
    if (!(grand_total > 0.0)) {
        throw DataError("chi_squared: grand total must be positive");
    }
    std::vector<double> payload(channel_sums.size());
    for (std::size_t j = 0; j < channel_sums.size(); ++j) {
        if (!(channel_sums[j] > 0.0)) {
            throw DataError("chi_squared: channel sum " + std::to_string(j) +
                            " is not positive");
        }
        payload[j] = grand_total / channel_sums[j];
    }
    return DistanceKind(Kind::ChiSquared, static_cast<int>(channel_sums.size()),
                        std::move(payload));
}

DistanceKind DistanceKind::mahalanobis_from_cube(const HyperCube& cube, bool diagonal_only) {
    const int L = cube.channels();
    const std::size_t P = cube.pixel_count();
    std::vector<double> mean(static_cast<std::size_t>(L), 0.0);
    for (std::size_t p = 0; p < P; ++p) {
        const auto px = cube.pixel(p);
        for (int j = 0; j < L; ++j) mean[static_cast<std::size_t>(j)] += px[j];
    }
    for (double& m : mean) m /= static_cast<double>(P);

    if (diagonal_only) {
        std::vector<double> var(static_cast<std::size_t>(L), 0.0);
        for (std::size_t p = 0; p < P; ++p) {
            const auto px = cube.pixel(p);
            for (int j = 0; j < L; ++j) {
                const double d = px[j] - mean[static_cast<std::size_t>(j)];
                var[static_cast<std::size_t>(j)] += d * d;
            }
        }
        for (double& v : var) v /= static_cast<double>(P);
        return mahalanobis_diagonal(std::move(var));
    }

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(L, L);
    Eigen::VectorXd d(L);
    for (std::size_t p = 0; p < P; ++p) {
        const auto px = cube.pixel(p);
        for (int j = 0; j < L; ++j) d(j) = px[j] - mean[static_cast<std::size_t>(j)];
        cov.selfadjointView<Eigen::Lower>().rankUpdate(d);
    }
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= static_cast<double>(P);
    std::vector<double> flat(static_cast<std::size_t>(L) * L);
    Eigen::Map<Eigen::MatrixXd>(flat.data(), L, L) = cov;
    return mahalanobis(std::move(flat), L);
}

DistanceKind DistanceKind::chi_squared_from_cube(const HyperCube& cube) {
    const int L = cube.channels();
    std::vector<double> sums(static_cast<std::size_t>(L), 0.0);
    for (std::size_t p = 0; p < cube.pixel_count(); ++p) {
        const auto px = cube.pixel(p);
        for (int j = 0; j < L; ++j) {
            if (px[j] < 0.0) {
                throw DataError("chi_squared_from_cube: negative value in channel " +
                                std::to_string(j));
            }
            sums[static_cast<std::size_t>(j)] += px[j];
        }
    }
    double total = 0.0;
    for (double s : sums) total += s;
    return chi_squared(std::move(sums), total);
}

double DistanceKind::operator()(std::span<const double> u, std::span<const double> v) const {
    if (u.size() != v.size()) {
        throw DataError("distance: vector dimensions differ");
    }
    if (dim_ != 0 && u.size() != static_cast<std::size_t>(dim_)) {
        throw DataError("distance: expected dimension " + std::to_string(dim_) +
                        ", got " + std::to_string(u.size()));
    }
    const std::size_t n = u.size();
    switch (kind_) {
    case Kind::Euclidean: {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = u[j] - v[j];
            acc += d * d;
        }
        return std::sqrt(acc);
    }
    case Kind::MahalanobisDiagonal: {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = u[j] - v[j];
            acc += d * d * payload_[j];
        }
        return std::sqrt(acc);
    }
    case Kind::Mahalanobis: {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double di = u[i] - v[i];
            for (std::size_t j = 0; j < n; ++j) {
                acc += di * payload_[i * n + j] * (u[j] - v[j]);
            }
        }
        return std::sqrt(std::max(acc, 0.0));
    }
    case Kind::ChiSquared: {
        double su = 0.0;
        double sv = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            su += u[j];
            sv += v[j];
        }
        if (!(su > 0.0) || !(sv > 0.0)) {
            throw DataError("chi_squared distance: zero pixel row sum");
        }
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = u[j] / su - v[j] / sv;
            acc += payload_[j] * d * d;
        }
        return std::sqrt(acc);
    }
    }
    return 0.0;
}

double distance(std::span<const double> u, std::span<const double> v, const DistanceKind& kind) {
    return kind(u, v);
}

ScalarImage normalize01(const ScalarImage& img) {
    const double lo = img.min();
    const double hi = img.max();
    ScalarImage out(img.width(), img.height());
    if (hi > lo) {
        const double range = hi - lo;
        for (std::size_t i = 0; i < img.size(); ++i) {
            out.data()[i] = (img.data()[i] - lo) / range;
        }
    }
    return out;
}

ScalarImage gradient_marginal(const HyperCube& cube, int channel, const StructuringElement& se) {
    return normalize01(morph_gradient(cube.channel(channel), se));
}

ScalarImage gradient_sup(const HyperCube& cube, const StructuringElement& se) {
    ScalarImage out(cube.width(), cube.height(), 0.0);
    for (int j = 0; j < cube.channels(); ++j) {
        const ScalarImage g = gradient_marginal(cube, j, se);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out.data()[i] = std::max(out.data()[i], g.data()[i]);
        }
    }
    return out;
}

ScalarImage gradient_weighted_sum(const HyperCube& cube, const StructuringElement& se,
                                  std::span<const double> weights) {
    if (weights.size() != static_cast<std::size_t>(cube.channels())) {
        throw ConfigError("gradient_weighted_sum: expected " +
                          std::to_string(cube.channels()) + " weights, got " +
                          std::to_string(weights.size()));
    }
    bool any_positive = false;
    for (double w : weights) {
        if (w < 0.0) throw ConfigError("gradient_weighted_sum: negative weight");
        if (w > 0.0) any_positive = true;
    }
    if (!any_positive) throw ConfigError("gradient_weighted_sum: all weights zero");

    ScalarImage acc(cube.width(), cube.height(), 0.0);
    for (int j = 0; j < cube.channels(); ++j) {
        if (weights[static_cast<std::size_t>(j)] == 0.0) continue;
        const ScalarImage g = gradient_marginal(cube, j, se);
        for (std::size_t i = 0; i < acc.size(); ++i) {
            acc.data()[i] += weights[static_cast<std::size_t>(j)] * g.data()[i];
        }
    }
    return normalize01(acc);
}

ScalarImage gradient_metric(const HyperCube& cube, const StructuringElement& se,
                            const DistanceKind& kind) {
    ScalarImage out(cube.width(), cube.height(), 0.0);
    for (int y = 0; y < cube.height(); ++y) {
        for (int x = 0; x < cube.width(); ++x) {
            const auto center = cube.pixel(x, y);
            double hi = -std::numeric_limits<double>::infinity();
            double lo = std::numeric_limits<double>::infinity();
            for (const Offset& o : se.neighbors()) {
                const int nx = x + o.dx;
                const int ny = y + o.dy;
                if (!cube.in_bounds(nx, ny)) continue;
                const double d = kind(center, cube.pixel(nx, ny));
                hi = std::max(hi, d);
                lo = std::min(lo, d);
            }
            out(x, y) = hi >= lo ? hi - lo : 0.0;
        }
    }
    return normalize01(out);
}

ScalarImage gradient(const HyperCube& cube, const GradientSpec& spec) {
    switch (spec.kind) {
    case GradientSpec::Kind::Marginal:
        return gradient_marginal(cube, spec.channel, spec.se);
    case GradientSpec::Kind::Supremum:
        return gradient_sup(cube, spec.se);
    case GradientSpec::Kind::WeightedSum:
        return gradient_weighted_sum(cube, spec.se, spec.weights);
    case GradientSpec::Kind::Metric:
        return gradient_metric(cube, spec.se, spec.distance);
    }
    throw ConfigError("gradient: unknown kind");
}

} // namespace hyperseg

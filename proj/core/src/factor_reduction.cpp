#include "hyperseg/factor_reduction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "hyperseg/errors.hpp"

namespace hyperseg {

namespace {

constexpr double kRelativeFloor = 1e-12;
// Correspondence-analysis inertias are dimensionless and bounded by 1, so an
// absolute floor is meaningful; it catches the all-axes-null case where the
// relative floor collapses.
constexpr double kAbsoluteInertiaFloor = 1e-24;

std::string axis_label(int k) { return "axis" + std::to_string(k + 1); }

} // namespace

double FcaModel::total_inertia() const {
    double s = 0.0;
    for (double mu : eigenvalues) s += mu;
    return s;
}

double FcaModel::eigenvalue_floor() const {
    const double relative = eigenvalues.empty() ? 0.0 : kRelativeFloor * eigenvalues.front();
    return std::max(relative, kAbsoluteInertiaFloor);
}

FcaModel fca_fit(const HyperCube& cube, int retained_axes) {
    const std::size_t P = cube.pixel_count();
    const int L = cube.channels();
    const int max_axes = static_cast<int>(std::min<std::size_t>(P, static_cast<std::size_t>(L))) - 1;
    if (retained_axes < 0 || retained_axes > max_axes) {
        throw ConfigError("fca_fit: retained axes must be in [0," +
                          std::to_string(max_axes) + "], got " +
                          std::to_string(retained_axes));
    }

    FcaModel model;
    model.pixel_count = static_cast<int>(P);
    model.channel_count = L;
    model.retained_axes = retained_axes;
    model.row_masses.assign(P, 0.0);
    model.col_masses.assign(static_cast<std::size_t>(L), 0.0);

    double total = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
        const auto px = cube.pixel(p);
        for (int j = 0; j < L; ++j) {
            const double v = px[j];
            if (v < 0.0) {
                throw DataError("fca_fit: negative value at pixel " + std::to_string(p) +
                                ", channel " + std::to_string(j));
            }
            model.row_masses[p] += v;
            model.col_masses[static_cast<std::size_t>(j)] += v;
            total += v;
        }
    }
    if (!(total > 0.0)) {
        throw DataError("fca_fit: cube sums to zero");
    }
    for (std::size_t p = 0; p < P; ++p) {
        if (!(model.row_masses[p] > 0.0)) {
            throw DataError("fca_fit: pixel " + std::to_string(p) +
                            " has an all-zero spectrum (row mass undefined)");
        }
        model.row_masses[p] /= total;
    }
    for (int j = 0; j < L; ++j) {
        if (!(model.col_masses[static_cast<std::size_t>(j)] > 0.0)) {
            throw DataError("fca_fit: channel " + std::to_string(j) +
                            " is all zero (column mass undefined)");
        }
        model.col_masses[static_cast<std::size_t>(j)] /= total;
    }
    model.grand_total = total;

    // Standardized residual S = D_r^{-1/2} (Q - r c^T) D_c^{-1/2}, Q = cube/N.
    Eigen::MatrixXd S(static_cast<Eigen::Index>(P), L);
    for (std::size_t p = 0; p < P; ++p) {
        const auto px = cube.pixel(p);
        const double r = model.row_masses[p];
        const double sr = std::sqrt(r);
        for (int j = 0; j < L; ++j) {
            const double c = model.col_masses[static_cast<std::size_t>(j)];
            const double q = px[j] / total;
            S(static_cast<Eigen::Index>(p), j) = (q - r * c) / (sr * std::sqrt(c));
        }
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const Eigen::MatrixXd& V = svd.matrixV();

    const int axes = max_axes;
    model.eigenvalues.assign(static_cast<std::size_t>(axes), 0.0);
    model.col_coords.assign(static_cast<std::size_t>(axes) * L, 0.0);
    const double mu_max = axes > 0 ? sigma(0) * sigma(0) : 0.0;
    const double clamp = std::max(kRelativeFloor * mu_max, kAbsoluteInertiaFloor);
    for (int k = 0; k < axes; ++k) {
        const double mu = sigma(k) * sigma(k);
        model.eigenvalues[static_cast<std::size_t>(k)] = mu < clamp ? 0.0 : mu;
        for (int j = 0; j < L; ++j) {
            model.col_coords[static_cast<std::size_t>(k) * L + j] =
                sigma(k) * V(j, k) / std::sqrt(model.col_masses[static_cast<std::size_t>(j)]);
        }
        // Deterministic sign: largest-magnitude column coordinate made positive.
        int pivot = 0;
        for (int j = 1; j < L; ++j) {
            if (std::abs(model.col_coord(k, j)) > std::abs(model.col_coord(k, pivot))) pivot = j;
        }
        if (model.col_coord(k, pivot) < 0.0) {
            for (int j = 0; j < L; ++j) {
                model.col_coords[static_cast<std::size_t>(k) * L + j] *= -1.0;
            }
        }
    }
    return model;
}

HyperCube fca_project(const FcaModel& model, const HyperCube& cube) {
    if (cube.channels() != model.channel_count) {
        throw DataError("fca_project: cube has " + std::to_string(cube.channels()) +
                        " channels, model was fitted on " +
                        std::to_string(model.channel_count));
    }
    const int K = model.retained_axes;
    if (K < 1) {
        throw ConfigError("fca_project: model retains no axes");
    }
    const double floor = model.eigenvalue_floor();
    const int L = model.channel_count;

    HyperCube factors(cube.width(), cube.height(), K);
    std::vector<std::string> labels;
    for (int k = 0; k < K; ++k) labels.push_back(axis_label(k));
    factors.set_channel_labels(std::move(labels));

    for (std::size_t p = 0; p < cube.pixel_count(); ++p) {
        const auto px = cube.pixel(p);
        double row_sum = 0.0;
        for (int j = 0; j < L; ++j) row_sum += px[j];
        if (!(row_sum > 0.0)) {
            throw DataError("fca_project: pixel " + std::to_string(p) +
                            " has zero spectrum sum");
        }
        auto out = factors.pixel(p);
        for (int k = 0; k < K; ++k) {
            const double mu = model.eigenvalues[static_cast<std::size_t>(k)];
            if (mu <= floor) {
                out[k] = 0.0;
                continue;
            }
            // Transition formula: profile dotted with column coordinates.
            double acc = 0.0;
            for (int j = 0; j < L; ++j) {
                acc += (px[j] / row_sum) * model.col_coord(k, j);
            }
            out[k] = acc / std::sqrt(mu);
        }
    }
    return factors;
}

HyperCube fca_reconstruct(const FcaModel& model, const HyperCube& factors) {
    if (factors.pixel_count() != static_cast<std::size_t>(model.pixel_count)) {
        throw DataError("fca_reconstruct: factor grid does not match the fitted cube");
    }
    const int K = std::min(factors.channels(), model.axis_count());
    const int L = model.channel_count;
    const double floor = model.eigenvalue_floor();

    HyperCube out(factors.width(), factors.height(), L);
    for (std::size_t p = 0; p < out.pixel_count(); ++p) {
        const auto fx = factors.pixel(p);
        auto px = out.pixel(p);
        const double r = model.row_masses[p];
        for (int j = 0; j < L; ++j) {
            double series = 1.0;
            for (int k = 0; k < K; ++k) {
                const double mu = model.eigenvalues[static_cast<std::size_t>(k)];
                if (mu <= floor) continue;
                series += fx[k] * model.col_coord(k, j) / std::sqrt(mu);
            }
            px[j] = model.grand_total * r * model.col_masses[static_cast<std::size_t>(j)] * series;
        }
    }
    return out;
}

HyperCube fca_reconstruct(const FcaModel& model, int width, int height) {
    if (static_cast<std::size_t>(width) * height !=
        static_cast<std::size_t>(model.pixel_count)) {
        throw DataError("fca_reconstruct: grid does not match the fitted pixel count");
    }
    HyperCube out(width, height, model.channel_count);
    for (std::size_t p = 0; p < out.pixel_count(); ++p) {
        auto px = out.pixel(p);
        for (int j = 0; j < model.channel_count; ++j) {
            px[j] = model.grand_total * model.row_masses[p] *
                    model.col_masses[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

HyperCube fca_reconstruct(const FcaModel& model) {
    return fca_reconstruct(model, 1, model.pixel_count);
}

double PcaModel::eigenvalue_floor() const {
    return eigenvalues.empty() ? 0.0 : kRelativeFloor * eigenvalues.front();
}

std::vector<double> PcaModel::inertia_ratios() const {
    double total = 0.0;
    for (double ev : eigenvalues) total += ev;
    std::vector<double> ratios(eigenvalues.size(), 0.0);
    if (total > 0.0) {
        for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
            ratios[k] = eigenvalues[k] / total;
        }
    }
    return ratios;
}

PcaModel pca_fit(const HyperCube& maps) {
    const int M = maps.channels();
    const std::size_t P = maps.pixel_count();
    if (P <= static_cast<std::size_t>(M)) {
        throw DataError("pca_fit: need more pixels than channels");
    }

    PcaModel model;
    model.dim = M;
    model.means.assign(static_cast<std::size_t>(M), 0.0);
    for (std::size_t p = 0; p < P; ++p) {
        const auto px = maps.pixel(p);
        for (int j = 0; j < M; ++j) model.means[static_cast<std::size_t>(j)] += px[j];
    }
    for (double& m : model.means) m /= static_cast<double>(P);

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(M, M);
    Eigen::VectorXd d(M);
    for (std::size_t p = 0; p < P; ++p) {
        const auto px = maps.pixel(p);
        for (int j = 0; j < M; ++j) d(j) = px[j] - model.means[static_cast<std::size_t>(j)];
        cov.selfadjointView<Eigen::Lower>().rankUpdate(d);
    }
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= static_cast<double>(P);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("pca_fit: eigendecomposition failed");
    }

    // Eigen returns ascending order; store descending with signs pinned.
    model.eigenvalues.assign(static_cast<std::size_t>(M), 0.0);
    model.components.assign(static_cast<std::size_t>(M) * M, 0.0);
    for (int k = 0; k < M; ++k) {
        const int src = M - 1 - k;
        model.eigenvalues[static_cast<std::size_t>(k)] =
            std::max(eig.eigenvalues()(src), 0.0);
        Eigen::VectorXd comp = eig.eigenvectors().col(src);
        int pivot = 0;
        for (int j = 1; j < M; ++j) {
            if (std::abs(comp(j)) > std::abs(comp(pivot))) pivot = j;
        }
        if (comp(pivot) < 0.0) comp = -comp;
        for (int j = 0; j < M; ++j) {
            model.components[static_cast<std::size_t>(k) * M + j] = comp(j);
        }
    }
    return model;
}

HyperCube pca_project(const PcaModel& model, const HyperCube& maps, bool whiten, int axes) {
    if (maps.channels() != model.dim) {
        throw DataError("pca_project: channel count does not match the model");
    }
    if (axes == 0) axes = model.dim;
    if (axes < 1 || axes > model.dim) {
        throw ConfigError("pca_project: axes must be in [1," + std::to_string(model.dim) + "]");
    }
    const double floor = model.eigenvalue_floor();
    const int M = model.dim;

    HyperCube out(maps.width(), maps.height(), axes);
    std::vector<std::string> labels;
    for (int k = 0; k < axes; ++k) labels.push_back(axis_label(k));
    out.set_channel_labels(std::move(labels));

    std::vector<double> scale(static_cast<std::size_t>(axes), 1.0);
    if (whiten) {
        for (int k = 0; k < axes; ++k) {
            const double ev = model.eigenvalues[static_cast<std::size_t>(k)];
            if (ev <= floor) {
                throw NumericalError("pca_project: whitening axis " + std::to_string(k) +
                                     " with zero variance");
            }
            scale[static_cast<std::size_t>(k)] = 1.0 / std::sqrt(ev);
        }
    }

    for (std::size_t p = 0; p < maps.pixel_count(); ++p) {
        const auto px = maps.pixel(p);
        auto fx = out.pixel(p);
        for (int k = 0; k < axes; ++k) {
            double acc = 0.0;
            for (int j = 0; j < M; ++j) {
                acc += model.component(k, j) * (px[j] - model.means[static_cast<std::size_t>(j)]);
            }
            fx[k] = acc * scale[static_cast<std::size_t>(k)];
        }
    }
    return out;
}

HyperCube pca_unproject(const PcaModel& model, const HyperCube& factors, bool whiten) {
    const int axes = factors.channels();
    if (axes > model.dim) {
        throw DataError("pca_unproject: more factor channels than model axes");
    }
    const int M = model.dim;
    HyperCube out(factors.width(), factors.height(), M);
    for (std::size_t p = 0; p < factors.pixel_count(); ++p) {
        const auto fx = factors.pixel(p);
        auto px = out.pixel(p);
        for (int j = 0; j < M; ++j) px[j] = model.means[static_cast<std::size_t>(j)];
        for (int k = 0; k < axes; ++k) {
            const double coord =
                whiten ? fx[k] * std::sqrt(model.eigenvalues[static_cast<std::size_t>(k)])
                       : fx[k];
            for (int j = 0; j < M; ++j) px[j] += coord * model.component(k, j);
        }
    }
    return out;
}

} // namespace hyperseg

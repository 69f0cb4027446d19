#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "hyperseg/core_image.hpp"
#include "hyperseg/errors.hpp"
#include "hyperseg/factor_reduction.hpp"
#include "hyperseg/gradients.hpp"
#include "hyperseg/io.hpp"
#include "hyperseg/rng.hpp"
#include "oracles.hpp"

using namespace hyperseg;

namespace {

HyperCube random_positive_cube(int w, int h, int L, std::uint64_t seed) {
    Rng rng(seed);
    HyperCube cube(w, h, L);
    for (double& v : cube.data()) v = 0.2 + rng.uniform01();
    return cube;
}

double max_relative_error(const HyperCube& a, const HyperCube& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double denom = std::max(std::abs(a.data()[i]), 1e-30);
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]) / denom);
    }
    return worst;
}

int full_rank(const HyperCube& cube) {
    return static_cast<int>(std::min<std::size_t>(cube.pixel_count(),
                                                  static_cast<std::size_t>(cube.channels()))) - 1;
}

} // namespace

TEST_SUITE("factor_reduction") {

TEST_CASE("independence cube has zero inertia") {
    // values = N * r_i * c_j exactly.
    HyperCube cube(2, 2, 2);
    const double r[4] = {0.1, 0.2, 0.3, 0.4};
    const double c[2] = {0.3, 0.7};
    for (std::size_t p = 0; p < 4; ++p)
        for (int j = 0; j < 2; ++j) {
            cube.data()[p * 2 + static_cast<std::size_t>(j)] = 40.0 * r[p] * c[j];
        }
    const FcaModel model = fca_fit(cube, 1);
    CHECK(model.total_inertia() < 1e-12);

    const HyperCube factors = fca_project(model, cube);
    for (double v : factors.data()) CHECK(std::abs(v) < 1e-6);
}

TEST_CASE("2x2 diagonal counts: hand-computed spectrum and factors") {
    // Counts [[2,0],[0,2]]: the standardized residual is [[.5,-.5],[-.5,.5]],
    // a single unit singular value; pixel factors are +1 and -1.
    HyperCube cube(1, 2, 2);
    cube(0, 0, 0) = 2.0;
    cube(0, 0, 1) = 0.0;
    cube(0, 1, 0) = 0.0;
    cube(0, 1, 1) = 2.0;

    const FcaModel model = fca_fit(cube, 1);
    REQUIRE(model.axis_count() == 1);
    CHECK(model.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(model.total_inertia() == doctest::Approx(1.0).epsilon(1e-9));

    const HyperCube factors = fca_project(model, cube);
    CHECK(factors(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(factors(0, 1, 0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("channel permutation leaves the eigenvalue spectrum unchanged") {
    const HyperCube cube = random_positive_cube(5, 4, 3, 17);
    HyperCube permuted(5, 4, 3);
    const int perm[3] = {1, 2, 0};
    for (std::size_t p = 0; p < cube.pixel_count(); ++p)
        for (int j = 0; j < 3; ++j) {
            permuted.data()[p * 3 + static_cast<std::size_t>(perm[j])] =
                cube.data()[p * 3 + static_cast<std::size_t>(j)];
        }
    const FcaModel a = fca_fit(cube, 2);
    const FcaModel b = fca_fit(permuted, 2);
    for (int k = 0; k < a.axis_count(); ++k) {
        CHECK(a.eigenvalues[static_cast<std::size_t>(k)] ==
              doctest::Approx(b.eigenvalues[static_cast<std::size_t>(k)]).epsilon(1e-10));
    }
}

TEST_CASE("full-rank project/reconstruct is the identity") {
    const HyperCube cube = random_positive_cube(8, 6, 4, 18);
    const FcaModel model = fca_fit(cube, full_rank(cube));
    const HyperCube factors = fca_project(model, cube);
    const HyperCube back = fca_reconstruct(model, factors);
    CHECK(max_relative_error(cube, back) < 1e-8);
}

TEST_CASE("model invariants: masses and spectrum ordering") {
    const HyperCube cube = random_positive_cube(7, 5, 4, 28);
    const FcaModel model = fca_fit(cube, 2);

    double row_sum = 0.0;
    for (double r : model.row_masses) {
        CHECK(r > 0.0);
        row_sum += r;
    }
    CHECK(std::abs(row_sum - 1.0) < 1e-12);
    double col_sum = 0.0;
    for (double c : model.col_masses) {
        CHECK(c > 0.0);
        col_sum += c;
    }
    CHECK(std::abs(col_sum - 1.0) < 1e-12);
    for (std::size_t k = 1; k < model.eigenvalues.size(); ++k) {
        CHECK(model.eigenvalues[k] <= model.eigenvalues[k - 1]);
        CHECK(model.eigenvalues[k] >= 0.0);
    }

    // Projection rejects a cube with a different channel count.
    const HyperCube other = random_positive_cube(7, 5, 3, 29);
    CHECK_THROWS_AS(fca_project(model, other), DataError);
}

TEST_CASE("zero retained axes reconstruct the independence model") {
    const HyperCube cube = random_positive_cube(4, 3, 3, 19);
    const FcaModel model = fca_fit(cube, 0);
    const HyperCube indep = fca_reconstruct(model, cube.width(), cube.height());
    for (std::size_t p = 0; p < cube.pixel_count(); ++p)
        for (int j = 0; j < 3; ++j) {
            const double expect = model.grand_total * model.row_masses[p] *
                                  model.col_masses[static_cast<std::size_t>(j)];
            CHECK(indep.data()[p * 3 + static_cast<std::size_t>(j)] ==
                  doctest::Approx(expect).epsilon(1e-12));
        }
    CHECK_THROWS_AS(fca_project(model, cube), ConfigError);
}

TEST_CASE("factor channels: centered means and eigenvalue variances") {
    const HyperCube cube = random_positive_cube(9, 7, 5, 20);
    const FcaModel model = fca_fit(cube, full_rank(cube));
    const HyperCube factors = fca_project(model, cube);
    for (int k = 0; k < factors.channels(); ++k) {
        double mean = 0.0;
        double var = 0.0;
        for (std::size_t p = 0; p < factors.pixel_count(); ++p) {
            mean += model.row_masses[p] * factors.pixel(p)[k];
            var += model.row_masses[p] * factors.pixel(p)[k] * factors.pixel(p)[k];
        }
        CHECK(std::abs(mean) < 1e-10);
        CHECK(std::abs(var - model.eigenvalues[static_cast<std::size_t>(k)]) < 1e-9);
    }
}

TEST_CASE("eigenvalue sum equals the residual matrix inertia") {
    const HyperCube cube = random_positive_cube(6, 5, 4, 21);
    const FcaModel model = fca_fit(cube, 1);
    // Independent computation of ||S||_F^2 from the raw definition.
    const double N = cube.sum();
    double inertia = 0.0;
    for (std::size_t p = 0; p < cube.pixel_count(); ++p) {
        const auto px = cube.pixel(p);
        double row = 0.0;
        for (int j = 0; j < 4; ++j) row += px[j];
        const double r = row / N;
        for (int j = 0; j < 4; ++j) {
            const double c = model.col_masses[static_cast<std::size_t>(j)];
            const double resid = px[j] / N - r * c;
            inertia += resid * resid / (r * c);
        }
    }
    CHECK(std::abs(model.total_inertia() - inertia) < 1e-9);
}

TEST_CASE("chi-squared distance in image space equals Euclidean distance in factor space") {
    const HyperCube cube = random_positive_cube(8, 8, 6, 22);
    const FcaModel model = fca_fit(cube, full_rank(cube));
    const HyperCube factors = fca_project(model, cube);

    std::vector<double> col_sums(6, 0.0);
    for (std::size_t p = 0; p < cube.pixel_count(); ++p)
        for (int j = 0; j < 6; ++j) col_sums[static_cast<std::size_t>(j)] += cube.pixel(p)[j];

    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t a = rng.uniform_index(cube.pixel_count());
        const std::size_t b = rng.uniform_index(cube.pixel_count());
        const std::vector<double> u(cube.pixel(a).begin(), cube.pixel(a).end());
        const std::vector<double> v(cube.pixel(b).begin(), cube.pixel(b).end());
        const double chi = oracles::chi2_oracle(u, v, col_sums, cube.sum());
        const double euc = distance(factors.pixel(a), factors.pixel(b),
                                    DistanceKind::euclidean());
        CHECK(std::abs(chi - euc) < 1e-8);
    }
}

TEST_CASE("fit rejects invalid input") {
    HyperCube zero_row = random_positive_cube(3, 3, 3, 24);
    for (int j = 0; j < 3; ++j) zero_row(1, 1, j) = 0.0;
    CHECK_THROWS_WITH_AS(fca_fit(zero_row, 1),
                         doctest::Contains("pixel 4"), DataError);

    HyperCube zero_col = random_positive_cube(3, 3, 3, 25);
    for (std::size_t p = 0; p < 9; ++p) zero_col.data()[p * 3 + 2] = 0.0;
    CHECK_THROWS_WITH_AS(fca_fit(zero_col, 1),
                         doctest::Contains("channel 2"), DataError);

    HyperCube negative = random_positive_cube(3, 3, 3, 26);
    negative(0, 0, 0) = -0.5;
    CHECK_THROWS_AS(fca_fit(negative, 1), DataError);

    const HyperCube cube = random_positive_cube(3, 3, 3, 27);
    CHECK_THROWS_AS(fca_fit(cube, 3), ConfigError);    // max axes = min(9,3)-1 = 2
    CHECK_THROWS_AS(fca_fit(cube, -1), ConfigError);
}

TEST_CASE("pca on axis-aligned data") {
    // Four points (+-2, +-1): population covariance diag(4, 1).
    HyperCube maps(2, 2, 2);
    const double pts[4][2] = {{-2.0, -1.0}, {-2.0, 1.0}, {2.0, -1.0}, {2.0, 1.0}};
    for (std::size_t p = 0; p < 4; ++p) {
        maps.data()[p * 2] = pts[p][0];
        maps.data()[p * 2 + 1] = pts[p][1];
    }
    const PcaModel model = pca_fit(maps);
    CHECK(model.eigenvalues[0] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(model.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(model.component(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(model.component(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(model.component(1, 1) == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<double> ratios = model.inertia_ratios();
    CHECK(ratios[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(ratios[1] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("pca component orthonormality and round trip") {
    Rng rng(30);
    HyperCube maps(20, 10, 3);
    for (std::size_t p = 0; p < maps.pixel_count(); ++p) {
        const double a = rng.gaussian();
        const double b = rng.gaussian();
        auto px = maps.pixel(p);
        px[0] = 2.0 * a + 0.5 * b + 1.0;
        px[1] = -a + b - 2.0;
        px[2] = 0.3 * a + 0.1 * rng.gaussian();
    }
    const PcaModel model = pca_fit(maps);

    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double dot = 0.0;
            for (int m = 0; m < 3; ++m) dot += model.component(i, m) * model.component(j, m);
            CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) < 1e-10);
        }
    CHECK(model.eigenvalues[0] >= model.eigenvalues[1]);
    CHECK(model.eigenvalues[1] >= model.eigenvalues[2]);

    for (bool whiten : {false, true}) {
        const HyperCube projected = pca_project(model, maps, whiten);
        const HyperCube back = pca_unproject(model, projected, whiten);
        for (std::size_t i = 0; i < maps.data().size(); ++i) {
            CHECK(std::abs(maps.data()[i] - back.data()[i]) < 1e-9);
        }
    }
}

TEST_CASE("whitened full-rank PCA distance equals full-covariance Mahalanobis") {
    Rng rng(31);
    HyperCube maps(25, 4, 3);
    for (std::size_t p = 0; p < maps.pixel_count(); ++p) {
        const double a = rng.gaussian();
        const double b = rng.gaussian();
        const double c = rng.gaussian();
        auto px = maps.pixel(p);
        px[0] = 3.0 * a + b;
        px[1] = a - 2.0 * b + 0.5 * c;
        px[2] = b + c;
    }
    const PcaModel model = pca_fit(maps);
    const HyperCube white = pca_project(model, maps, true);
    const DistanceKind maha = DistanceKind::mahalanobis_from_cube(maps, false);

    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t i = rng.uniform_index(maps.pixel_count());
        const std::size_t j = rng.uniform_index(maps.pixel_count());
        const double de = distance(white.pixel(i), white.pixel(j), DistanceKind::euclidean());
        const double dm = distance(maps.pixel(i), maps.pixel(j), maha);
        CHECK(std::abs(de - dm) < 1e-8);
    }
}

TEST_CASE("pca errors") {
    CHECK_THROWS_AS(pca_fit(HyperCube(1, 2, 3, 1.0)), DataError);    // P <= M
    HyperCube flat(4, 4, 2, 1.0);
    const PcaModel model = pca_fit(flat);    // zero variance everywhere
    CHECK_THROWS_AS(pca_project(model, flat, true), NumericalError);
    CHECK_THROWS_AS(pca_project(model, flat, false, 5), ConfigError);
}

TEST_CASE("model JSON round trip") {
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "hyperseg_model_io";
    std::filesystem::create_directories(dir);

    const HyperCube cube = random_positive_cube(5, 5, 4, 32);
    const FcaModel fca = fca_fit(cube, 2);
    save_fca_model(dir / "fca.json", fca);
    const FcaModel fca2 = load_fca_model(dir / "fca.json");
    CHECK(fca2.pixel_count == fca.pixel_count);
    CHECK(fca2.retained_axes == fca.retained_axes);
    CHECK(fca2.eigenvalues == fca.eigenvalues);
    CHECK(fca2.col_coords == fca.col_coords);
    CHECK(fca2.row_masses == fca.row_masses);
    CHECK(fca_project(fca2, cube).data() == fca_project(fca, cube).data());

    HyperCube maps(6, 4, 3);
    Rng rng(33);
    for (double& v : maps.data()) v = rng.gaussian();
    const PcaModel pca = pca_fit(maps);
    save_pca_model(dir / "pca.json", pca);
    const PcaModel pca2 = load_pca_model(dir / "pca.json");
    CHECK(pca2.dim == pca.dim);
    CHECK(pca2.means == pca.means);
    CHECK(pca2.eigenvalues == pca.eigenvalues);
    CHECK(pca2.components == pca.components);

    CHECK_THROWS_AS(load_fca_model(dir / "pca.json"), DataError);
    CHECK_THROWS_AS(load_pca_model(dir / "missing.json"), DataError);
}

TEST_CASE("noise is rejected on the trailing axes") {
    // Smooth two-component scene plus iid noise; keeping two axes must cut
    // the per-channel RMS error versus the clean signal.
    const int w = 24, h = 24, L = 12;
    HyperCube clean(w, h, L);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double g1 = std::exp(-0.5 * ((x - 8.0) * (x - 8.0) + (y - 8.0) * (y - 8.0)) / 16.0);
            const double g2 = std::exp(-0.5 * ((x - 16.0) * (x - 16.0) + (y - 16.0) * (y - 16.0)) / 25.0);
            for (int j = 0; j < L; ++j) {
                const double h1 = 1.0 + std::sin(0.4 * j);
                const double h2 = 1.0 + std::cos(0.3 * j);
                clean(x, y, j) = 3.0 + 2.0 * g1 * h1 + 1.5 * g2 * h2;
            }
        }
    Rng rng(34);
    HyperCube noisy = clean;
    for (double& v : noisy.data()) v = std::max(v + 0.35 * rng.gaussian(), 0.0);

    const FcaModel model = fca_fit(noisy, 2);
    const HyperCube denoised = fca_reconstruct(model, fca_project(model, noisy));

    for (int j = 0; j < L; ++j) {
        double err_noisy = 0.0, err_denoised = 0.0;
        for (std::size_t p = 0; p < clean.pixel_count(); ++p) {
            const double dn = noisy.pixel(p)[j] - clean.pixel(p)[j];
            const double dd = denoised.pixel(p)[j] - clean.pixel(p)[j];
            err_noisy += dn * dn;
            err_denoised += dd * dd;
        }
        CHECK(err_denoised < err_noisy);
    }
}

} // TEST_SUITE

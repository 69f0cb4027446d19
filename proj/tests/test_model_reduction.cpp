#include <doctest.h>

#include <cmath>
#include <vector>

#include "hyperseg/core_image.hpp"
#include "hyperseg/errors.hpp"
#include "hyperseg/model_reduction.hpp"
#include "hyperseg/rng.hpp"
#include "hyperseg/synthetic.hpp"
#include "oracles.hpp"

using namespace hyperseg;

TEST_SUITE("model_reduction") {

TEST_CASE("exactly linear spectra recover slope and intercept") {
    HyperCube cube(3, 2, 12);
    for (std::size_t p = 0; p < cube.pixel_count(); ++p)
        for (int j = 0; j < 12; ++j) cube.pixel(p)[j] = 2.0 * j + 3.0;
    ModelSpec spec;
    spec.transitory_channels = 4;
    const auto [a, b] = fit_linear(cube, spec);
    for (double v : a.data()) CHECK(std::abs(v - 2.0) < 1e-10);
    for (double v : b.data()) CHECK(std::abs(v - 3.0) < 1e-10);
}

TEST_CASE("constant spectra give zero slope") {
    HyperCube cube(2, 2, 8, 5.5);
    ModelSpec spec;
    spec.transitory_channels = 2;
    const auto [a, b] = fit_linear(cube, spec);
    for (double v : a.data()) CHECK(std::abs(v) < 1e-12);
    for (double v : b.data()) CHECK(std::abs(v - 5.5) < 1e-12);
}

TEST_CASE("least squares matches the normal-equation oracle") {
    Rng rng(41);
    HyperCube cube(4, 3, 12);
    for (double& v : cube.data()) v = rng.gaussian() * 3.0 + 1.0;
    ModelSpec spec;
    spec.transitory_channels = 3;

    const auto [a, b] = fit_linear(cube, spec);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) {
            std::vector<double> xs, ys;
            for (int j = 3; j < 12; ++j) {
                xs.push_back(j);
                ys.push_back(cube(x, y, j));
            }
            const oracles::OlsFit fit = oracles::ols_oracle(xs, ys);
            CHECK(std::abs(a(x, y) - fit.a) < 1e-10);
            CHECK(std::abs(b(x, y) - fit.b) < 1e-10);
        }
}

TEST_CASE("fit is affine-equivariant") {
    Rng rng(42);
    HyperCube cube(3, 3, 10);
    for (double& v : cube.data()) v = rng.uniform01() * 4.0;
    ModelSpec spec;
    spec.transitory_channels = 2;

    const auto [a0, b0] = fit_linear(cube, spec);

    HyperCube scaled = cube;
    for (double& v : scaled.data()) v *= 2.5;
    const auto [as, bs] = fit_linear(scaled, spec);
    for (std::size_t i = 0; i < a0.size(); ++i) {
        CHECK(as.data()[i] == doctest::Approx(2.5 * a0.data()[i]).epsilon(1e-12));
        CHECK(bs.data()[i] == doctest::Approx(2.5 * b0.data()[i]).epsilon(1e-12));
    }

    HyperCube shifted = cube;
    for (double& v : shifted.data()) v += 7.0;
    const auto [ac, bc] = fit_linear(shifted, spec);
    for (std::size_t i = 0; i < a0.size(); ++i) {
        CHECK(ac.data()[i] == doctest::Approx(a0.data()[i]).epsilon(1e-10));
        CHECK(bc.data()[i] == doctest::Approx(b0.data()[i] + 7.0).epsilon(1e-10));
    }
}

TEST_CASE("rise is the transitory range of values") {
    HyperCube cube(1, 1, 12);
    ModelSpec spec;
    spec.transitory_channels = 10;

    SUBCASE("constant transitory values") {
        for (int j = 0; j < 12; ++j) cube(0, 0, j) = 4.0;
        CHECK(rise(cube, spec)(0, 0) == 0.0);
    }

    SUBCASE("values 1..10 give amplitude 9") {
        for (int j = 0; j < 10; ++j) cube(0, 0, j) = j + 1.0;
        CHECK(rise(cube, spec)(0, 0) == 9.0);
    }

    SUBCASE("order statistics: permutation and offset invariance") {
        Rng rng(43);
        for (int j = 0; j < 12; ++j) cube(0, 0, j) = rng.uniform01();
        const double m = rise(cube, spec)(0, 0);

        HyperCube permuted = cube;
        for (int j = 0; j < 10; ++j) permuted(0, 0, j) = cube(0, 0, (j + 3) % 10);
        CHECK(rise(permuted, spec)(0, 0) == m);

        HyperCube shifted = cube;
        for (int j = 0; j < 12; ++j) shifted(0, 0, j) += 100.0;
        CHECK(rise(shifted, spec)(0, 0) == doctest::Approx(m).epsilon(1e-12));
    }
}

TEST_CASE("build_parameters assembles named channels") {
    Rng rng(44);
    HyperCube cube(4, 4, 12);
    for (double& v : cube.data()) v = rng.uniform01();

    SUBCASE("with a transitory range: a, b, m") {
        ModelSpec spec;
        spec.transitory_channels = 10;    // fit over exactly 2 channels
        const HyperCube params = build_parameters(cube, spec);
        REQUIRE(params.channels() == 3);
        CHECK(params.channel_labels() == std::vector<std::string>{"a", "b", "m"});
        const auto [a, b] = fit_linear(cube, spec);
        const ScalarImage m = rise(cube, spec);
        for (std::size_t p = 0; p < params.pixel_count(); ++p) {
            CHECK(params.pixel(p)[0] == a.data()[p]);
            CHECK(params.pixel(p)[1] == b.data()[p]);
            CHECK(params.pixel(p)[2] == m.data()[p]);
            CHECK(params.pixel(p)[2] >= 0.0);
        }
    }

    SUBCASE("empty transitory range drops the rise channel") {
        ModelSpec spec;
        spec.transitory_channels = 0;
        const HyperCube params = build_parameters(cube, spec);
        CHECK(params.channels() == 2);
        CHECK(params.channel_labels() == std::vector<std::string>{"a", "b"});
        CHECK_THROWS_AS(rise(cube, spec), ConfigError);
    }
}

TEST_CASE("model spec validation") {
    const HyperCube cube(2, 2, 6, 1.0);
    ModelSpec spec;
    spec.transitory_channels = 5;    // fit range would be one channel
    CHECK_THROWS_AS(fit_linear(cube, spec), ConfigError);

    spec.transitory_channels = 6;
    CHECK_THROWS_AS(fit_linear(cube, spec), ConfigError);

    spec = ModelSpec{};
    spec.transitory_channels = 2;
    spec.x_values = {1.0, 1.0, 1.0};    // wrong length
    CHECK_THROWS_AS(fit_linear(cube, spec), ConfigError);

    spec.x_values = {0.0, 1.0, 3.0, 3.0, 3.0, 3.0};
    spec.fit_begin = 3;    // degenerate: all x equal on the fit range
    CHECK_THROWS_AS(fit_linear(cube, spec), ConfigError);
}

TEST_CASE("parameters of a synthetic scene match the generator ground truth") {
    SyntheticSpec spec;
    spec.width = 48;
    spec.height = 48;
    spec.channels = 24;
    spec.transitory_channels = 8;
    spec.noise_sigma = 0.0;
    spec.background_slope = 0.001;
    spec.background_intercept = 0.2;
    spec.background_rise = 0.05;
    spec.regions = {
        {SyntheticRegion::Shape::Disk, 24, 24, 14, 0, 0, 0, 0, -0.01, 1.0, 0.5},
        {SyntheticRegion::Shape::Rect, 0, 0, 0, 20, 20, 28, 28, -0.03, 1.4, 0.9},
    };
    const SyntheticResult scene = generate_synthetic(spec);

    ModelSpec mspec;
    mspec.transitory_channels = 8;
    const HyperCube params = build_parameters(scene.cube, mspec);

    const double slope[3] = {0.001, -0.01, -0.03};
    const double intercept[3] = {0.2, 1.0, 1.4};
    const double amplitude[3] = {0.05, 0.5, 0.9};
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x) {
            const std::size_t cls = static_cast<std::size_t>(scene.truth(x, y)) - 1;
            CHECK(std::abs(params(x, y, 0) - slope[cls]) < 1e-8);
            CHECK(std::abs(params(x, y, 1) - intercept[cls]) < 1e-8);
            CHECK(std::abs(params(x, y, 2) - amplitude[cls]) < 1e-8);
        }
}

} // TEST_SUITE

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "hyperseg/clustering.hpp"
#include "hyperseg/errors.hpp"
#include "hyperseg/morphology.hpp"
#include "hyperseg/rng.hpp"
#include "oracles.hpp"

using namespace hyperseg;

namespace {

PointsView view_of(const std::vector<double>& flat, int dim) {
    return {flat.data(), flat.size() / static_cast<std::size_t>(dim), dim};
}

double euclid(std::span<const double> u, std::span<const double> v) {
    double acc = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) acc += (u[j] - v[j]) * (u[j] - v[j]);
    return std::sqrt(acc);
}

} // namespace

TEST_SUITE("clustering") {

TEST_CASE("pam on two 1-D pairs") {
    const std::vector<double> pts{0.0, 1.0, 10.0, 11.0};
    const ClusteringResult r = pam(view_of(pts, 1), 2, DistanceKind::euclidean());
    CHECK(r.cost == doctest::Approx(2.0).epsilon(1e-12));
    REQUIRE(r.medoids.size() == 2);
    CHECK(r.medoids[0] <= 1);         // one medoid in {0,1}
    CHECK(r.medoids[1] >= 2);         // one in {10,11}
    CHECK(r.assignment == std::vector<int>{0, 0, 1, 1});

    // Equal to the exhaustive optimum.
    const double best = oracles::exhaustive_medoid_cost(
        4, 2, [&](std::size_t i, std::size_t j) { return std::abs(pts[i] - pts[j]); });
    CHECK(r.cost == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("k equal to n: every point its own medoid") {
    const std::vector<double> pts{3.0, 1.0, 4.0};
    const ClusteringResult r = pam(view_of(pts, 1), 3, DistanceKind::euclidean());
    CHECK(r.cost == 0.0);
    CHECK(r.medoids == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("pam stays near the exhaustive optimum on random instances") {
    Rng rng(51);
    int exact = 0;
    const int trials = 20;
    for (int trial = 0; trial < trials; ++trial) {
        const std::size_t n = 8 + rng.uniform_index(5);    // 8..12
        const int k = 2 + static_cast<int>(rng.uniform_index(2));
        std::vector<double> pts(n * 2);
        for (double& v : pts) v = rng.uniform01() * 10.0;
        const PointsView pv = view_of(pts, 2);

        const ClusteringResult r = pam(pv, k, DistanceKind::euclidean());
        const double best = oracles::exhaustive_medoid_cost(
            n, k, [&](std::size_t i, std::size_t j) { return euclid(pv.row(i), pv.row(j)); });
        CHECK(r.cost >= best - 1e-9);
        CHECK(r.cost <= best * 1.05 + 1e-9);
        if (r.cost <= best + 1e-9) ++exact;
    }
    CHECK(exact >= trials * 8 / 10);
}

TEST_CASE("duplicate points keep the search deterministic and finite") {
    const std::vector<double> pts(12, 5.0);    // 12 identical 1-D points
    const ClusteringResult r = pam(view_of(pts, 1), 3, DistanceKind::euclidean());
    CHECK(r.cost == 0.0);
    CHECK(r.medoids.size() == 3);
    const ClusteringResult again = pam(view_of(pts, 1), 3, DistanceKind::euclidean());
    CHECK(r.medoids == again.medoids);
    CHECK(r.assignment == again.assignment);
}

TEST_CASE("clara with a full-size sample degenerates to pam") {
    Rng rng(52);
    std::vector<double> pts(30 * 2);
    for (double& v : pts) v = rng.uniform01() * 5.0;
    const PointsView pv = view_of(pts, 2);

    ClusteringSpec spec;
    spec.k = 3;
    spec.samples = 1;
    spec.sample_size = 30;
    const ClusteringResult c = clara(pv, spec);
    const ClusteringResult p = pam(pv, 3, DistanceKind::euclidean());
    CHECK(c.medoids == p.medoids);
    CHECK(c.assignment == p.assignment);
    CHECK(c.cost == doctest::Approx(p.cost).epsilon(1e-12));
}

TEST_CASE("clara separates well-spread blobs exactly") {
    Rng rng(53);
    std::vector<double> pts;
    std::vector<int> truth;
    for (int i = 0; i < 120; ++i) {
        const bool second = i % 2 == 1;
        // separation 20x the spread
        pts.push_back((second ? 20.0 : 0.0) + rng.gaussian());
        pts.push_back((second ? 20.0 : 0.0) + rng.gaussian());
        truth.push_back(second ? 1 : 0);
    }
    ClusteringSpec spec;
    spec.k = 2;
    spec.samples = 3;
    const ClusteringResult r = clara(view_of(pts, 2), spec);

    // Same blob <=> same cluster.
    for (std::size_t i = 0; i < truth.size(); ++i) {
        CHECK((r.assignment[i] == r.assignment[0]) == (truth[i] == truth[0]));
    }
}

TEST_CASE("clara is deterministic for a seed and never beats the optimum") {
    Rng rng(54);
    std::vector<double> pts(12 * 2);
    for (double& v : pts) v = rng.uniform01() * 8.0;
    const PointsView pv = view_of(pts, 2);

    ClusteringSpec spec;
    spec.k = 3;
    spec.samples = 4;
    spec.sample_size = 8;
    const ClusteringResult a = clara(pv, spec);
    const ClusteringResult b = clara(pv, spec);
    CHECK(a.medoids == b.medoids);
    CHECK(a.assignment == b.assignment);
    CHECK(a.cost == b.cost);

    const double best = oracles::exhaustive_medoid_cost(
        12, 3, [&](std::size_t i, std::size_t j) { return euclid(pv.row(i), pv.row(j)); });
    CHECK(a.cost >= best - 1e-9);

    spec.rng_seed = 99;
    const ClusteringResult c = clara(pv, spec);
    CHECK(c.cost >= best - 1e-9);
}

TEST_CASE("euclidean assignments are invariant under uniform scaling") {
    Rng rng(55);
    std::vector<double> pts(40 * 2);
    for (double& v : pts) v = rng.uniform01() * 3.0;
    ClusteringSpec spec;
    spec.k = 3;
    spec.samples = 2;
    const ClusteringResult base = clara(view_of(pts, 2), spec);

    std::vector<double> scaled = pts;
    for (double& v : scaled) v *= 17.0;
    const ClusteringResult big = clara(view_of(scaled, 2), spec);
    CHECK(base.medoids == big.medoids);
    CHECK(base.assignment == big.assignment);
}

TEST_CASE("clara validation") {
    const std::vector<double> pts{0.0, 1.0, 2.0, 3.0};
    ClusteringSpec spec;
    spec.k = 1;
    CHECK_THROWS_AS(clara(view_of(pts, 1), spec), ConfigError);
    spec.k = 5;
    CHECK_THROWS_AS(clara(view_of(pts, 1), spec), ConfigError);
    spec.k = 2;
    spec.samples = 0;
    CHECK_THROWS_AS(clara(view_of(pts, 1), spec), ConfigError);
    spec.samples = 1;
    spec.sample_size = 1;    // below k
    CHECK_THROWS_AS(clara(view_of(pts, 1), spec), ConfigError);
}

TEST_CASE("marker extraction from a two-blob scene") {
    // 1-channel space: background 0, two square blobs at value 10.
    const int w = 24, h = 16;
    HyperCube space(w, h, 1, 0.0);
    const auto in_blob_a = [](int x, int y) { return x >= 3 && x <= 7 && y >= 3 && y <= 7; };
    const auto in_blob_b = [](int x, int y) { return x >= 15 && x <= 20 && y >= 8 && y <= 13; };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (in_blob_a(x, y) || in_blob_b(x, y)) space(x, y, 0) = 10.0;
        }

    MarkerSpec spec;
    spec.stage1.k = 2;
    spec.stage1.samples = 2;
    spec.opening_radius = 0;
    spec.background = MarkerSpec::Background::None;
    spec.select = MarkerSpec::Select::Smallest;

    SUBCASE("markers are exactly the blob components") {
        const LabelImage markers = extract_markers(space, spec);
        CHECK(markers.max_label() == 2);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (in_blob_a(x, y)) CHECK(markers(x, y) == 1);
                else if (in_blob_b(x, y)) CHECK(markers(x, y) == 2);
                else CHECK(markers(x, y) == 0);
            }
    }

    SUBCASE("an oversized opening radius erases every marker") {
        spec.opening_radius = 8;
        CHECK_THROWS_AS(extract_markers(space, spec), DataError);
    }

    SUBCASE("the background seed is one extra disjoint label") {
        spec.background = MarkerSpec::Background::ErodedComplement;
        spec.background_radius = 2;
        const LabelImage markers = extract_markers(space, spec);
        CHECK(markers.max_label() == 3);
        bool seen = false;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (markers(x, y) == 3) {
                    seen = true;
                    CHECK(!in_blob_a(x, y));
                    CHECK(!in_blob_b(x, y));
                }
            }
        CHECK(seen);
    }

    SUBCASE("marker masks are stable under a second opening") {
        spec.opening_radius = 1;
        const LabelImage markers = extract_markers(space, spec);
        for (std::int32_t label = 1; label <= markers.max_label(); ++label) {
            ScalarImage mask(w, h, 0.0);
            for (std::size_t i = 0; i < markers.size(); ++i) {
                mask.data()[i] = markers.data()[i] == label ? 1.0 : 0.0;
            }
            const ScalarImage reopened = opening(mask, StructuringElement::disk(1));
            CHECK(reopened.data() == mask.data());
        }
    }
}

TEST_CASE("select=all labels every cluster") {
    HyperCube space(12, 4, 1, 0.0);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 12; ++x) space(x, y, 0) = x < 4 ? 0.0 : (x < 8 ? 10.0 : 20.0);
    MarkerSpec spec;
    spec.stage1.k = 3;
    spec.opening_radius = 0;
    spec.background = MarkerSpec::Background::None;
    spec.select = MarkerSpec::Select::All;
    const LabelImage markers = extract_markers(space, spec);
    CHECK(markers.max_label() == 3);
    for (std::size_t i = 0; i < markers.size(); ++i) CHECK(markers.data()[i] > 0);

    spec.stage2 = spec.stage1;
    CHECK_THROWS_AS(extract_markers(space, spec), ConfigError);
}

TEST_CASE("two-stage extraction aggregates outsiders into the largest cluster") {
    // Values: 0 (large background), 10 (blob A, larger), 12 (blob B, smaller).
    const int w = 30, h = 10;
    HyperCube space(w, h, 1, 0.0);
    const auto in_a = [](int x, int y) { return x >= 2 && x <= 12 && y >= 2 && y <= 7; };
    const auto in_b = [](int x, int y) { return x >= 20 && x <= 24 && y >= 3 && y <= 6; };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (in_a(x, y)) space(x, y, 0) = 10.0;
            if (in_b(x, y)) space(x, y, 0) = 12.0;
        }

    MarkerSpec spec;
    spec.stage1.k = 2;
    spec.select = MarkerSpec::Select::Smallest;    // the 10/12 cluster
    ClusteringSpec stage2;
    stage2.k = 2;
    spec.stage2 = stage2;
    spec.opening_radius = 0;
    spec.background = MarkerSpec::Background::None;

    const LabelImage markers = extract_markers(space, spec);
    CHECK(markers.max_label() == 2);
    // Blob B (smaller stage-2 cluster) is one component; blob A absorbed the
    // background, so A's mask is everything else.
    std::set<std::int32_t> b_labels;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (in_b(x, y)) b_labels.insert(markers(x, y));
    CHECK(b_labels.size() == 1);
    CHECK(*b_labels.begin() != 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (!in_b(x, y)) CHECK(markers(x, y) != *b_labels.begin());
}

} // TEST_SUITE

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "hyperseg/core_image.hpp"
#include "hyperseg/errors.hpp"
#include "hyperseg/rng.hpp"

using namespace hyperseg;

TEST_SUITE("core_image") {

TEST_CASE("channel extraction and reassembly") {
    HyperCube cube(2, 2, 2);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) {
            cube(x, y, 0) = x + 2 * y;
            cube(x, y, 1) = 7.0;
        }

    const ScalarImage c1 = cube.channel(1);
    for (double v : c1.data()) CHECK(v == 7.0);

    CHECK_THROWS_AS(cube.channel(2), ConfigError);
    CHECK_THROWS_AS(cube.channel(-1), ConfigError);

    // Reassembling every channel reproduces the cube bit for bit.
    std::vector<ScalarImage> channels;
    for (int j = 0; j < cube.channels(); ++j) channels.push_back(cube.channel(j));
    const HyperCube back = assemble_channels(channels);
    CHECK(back.data() == cube.data());
}

TEST_CASE("container validation") {
    CHECK_THROWS_AS(HyperCube(0, 2, 1), ConfigError);
    CHECK_THROWS_AS(HyperCube(2, 2, 0), ConfigError);
    CHECK_THROWS_AS(ScalarImage(2, 0), ConfigError);

    const HyperCube cube(2, 2, 2);
    CHECK_THROWS_AS(cube.at(2, 0, 0), DataError);
    CHECK_THROWS_AS(cube.at(0, 0, 5), DataError);
    const ScalarImage img(3, 3);
    CHECK_THROWS_AS(img.at(3, 3), DataError);
}

TEST_CASE("structuring element construction") {
    CHECK(StructuringElement::cross4().offsets().size() == 5);
    CHECK(StructuringElement::square8().offsets().size() == 9);
    CHECK(StructuringElement::disk(0).offsets().size() == 1);
    CHECK(StructuringElement::disk(2).offsets().size() == 13);

    // disk(1) is the 4-neighborhood.
    const auto as_set = [](const StructuringElement& se) {
        std::set<std::pair<int, int>> s;
        for (const Offset& o : se.offsets()) s.insert({o.dx, o.dy});
        return s;
    };
    CHECK(as_set(StructuringElement::disk(1)) == as_set(StructuringElement::cross4()));

    CHECK_THROWS_AS(StructuringElement::from_offsets("no-origin", {{1, 0}, {-1, 0}}),
                    ConfigError);
    CHECK_THROWS_AS(StructuringElement::from_offsets("asymmetric", {{0, 0}, {1, 0}}),
                    ConfigError);
    CHECK_THROWS_AS(StructuringElement::from_offsets("empty", {}), ConfigError);
}

TEST_CASE("connected components connectivity") {
    LabelImage mask(4, 4, 0);

    SUBCASE("all zero") {
        const LabelImage cc = connected_components(mask, StructuringElement::cross4());
        CHECK(cc.max_label() == 0);
    }

    SUBCASE("diagonal pair") {
        mask(1, 1) = 1;
        mask(2, 2) = 1;
        CHECK(connected_components(mask, StructuringElement::cross4()).max_label() == 2);
        CHECK(connected_components(mask, StructuringElement::square8()).max_label() == 1);
    }

    SUBCASE("full mask") {
        for (auto& v : mask.data()) v = 1;
        const LabelImage cc = connected_components(mask, StructuringElement::cross4());
        CHECK(cc.max_label() == 1);
        for (auto v : cc.data()) CHECK(v == 1);
    }
}

TEST_CASE("connected components is idempotent on its own support") {
    Rng rng(11);
    LabelImage mask(16, 16, 0);
    for (auto& v : mask.data()) v = rng.uniform01() < 0.4 ? 1 : 0;
    const LabelImage cc = connected_components(mask, StructuringElement::square8());

    for (std::int32_t label = 1; label <= cc.max_label(); ++label) {
        LabelImage one(16, 16, 0);
        for (std::size_t i = 0; i < cc.size(); ++i) {
            one.data()[i] = cc.data()[i] == label ? 1 : 0;
        }
        CHECK(connected_components(one, StructuringElement::square8()).max_label() == 1);
    }
}

TEST_CASE("component partition is invariant under grid reflection") {
    Rng rng(23);
    LabelImage mask(12, 9, 0);
    for (auto& v : mask.data()) v = rng.uniform01() < 0.45 ? 1 : 0;

    LabelImage flipped(12, 9, 0);
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 12; ++x) flipped(11 - x, y) = mask(x, y);

    const LabelImage cc = connected_components(mask, StructuringElement::cross4());
    const LabelImage cf = connected_components(flipped, StructuringElement::cross4());
    CHECK(cc.max_label() == cf.max_label());

    // Same partition up to renumbering: the label correspondence is a bijection.
    std::map<std::int32_t, std::int32_t> fwd, bwd;
    for (int y = 0; y < 9; ++y) {
        for (int x = 0; x < 12; ++x) {
            const std::int32_t a = cc(x, y);
            const std::int32_t b = cf(11 - x, y);
            CHECK((a == 0) == (b == 0));
            if (a == 0) continue;
            if (fwd.count(a)) CHECK(fwd[a] == b); else fwd[a] = b;
            if (bwd.count(b)) CHECK(bwd[b] == a); else bwd[b] = a;
        }
    }
}

} // TEST_SUITE

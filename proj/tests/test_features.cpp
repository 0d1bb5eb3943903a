#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "faultloc/features.hpp"
#include "faultloc/raster.hpp"

using namespace faultloc;

namespace {

NormalizedImage constant_image(int h, int w, double value) {
    NormalizedImage img;
    img.height = h;
    img.width = w;
    img.pixels.assign(static_cast<std::size_t>(h) * w, value);
    return img;
}

NormalizedImage random_image(int h, int w, std::uint64_t seed) {
    NormalizedImage img;
    img.height = h;
    img.width = w;
    img.pixels.resize(static_cast<std::size_t>(h) * w);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<> dist(0.0, 1.0);
    for (auto& p : img.pixels) p = dist(rng);
    return img;
}

}  // namespace

TEST_CASE("reduce: constant image gives constant means and zero stds") {
    const auto img = constant_image(339, 292, 0.37);
    for (const auto mode : {ReductionMode::global(), ReductionMode::per_row(),
                            ReductionMode::per_column(), ReductionMode::block(8)}) {
        const auto fv = reduce(img, mode);
        const std::size_t regions = fv.values.size() / 2;
        for (std::size_t i = 0; i < regions; ++i) {
            CHECK(fv.values[i] == Catch::Approx(0.37).margin(1e-12));
            CHECK(fv.values[regions + i] == Catch::Approx(0.0).margin(1e-12));
        }
    }
}

TEST_CASE("reduce: two-point distribution has mean and std one half") {
    NormalizedImage img = constant_image(10, 10, 0.0);
    for (std::size_t i = 0; i < img.pixels.size(); i += 2) img.pixels[i] = 1.0;
    const auto fv = reduce(img, ReductionMode::global());
    REQUIRE(fv.values.size() == 2);
    CHECK(fv.values[0] == Catch::Approx(0.5).margin(1e-12));
    CHECK(fv.values[1] == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("reduce: feature lengths follow the layout contract") {
    const auto img = random_image(339, 292, 3);
    CHECK(reduce(img, ReductionMode::global()).values.size() == 2);
    CHECK(reduce(img, ReductionMode::per_row()).values.size() == 2u * 339);
    CHECK(reduce(img, ReductionMode::per_column()).values.size() == 2u * 292);
    CHECK(reduce(img, ReductionMode::block(8)).values.size() == 2u * 64);
    CHECK(reduce(img, ReductionMode::block(1)).values.size() == 2);
}

TEST_CASE("reduce: block tiles match a brute-force recomputation") {
    const auto img = random_image(339, 292, 17);
    const int k = 8;
    const auto fv = reduce(img, ReductionMode::block(k));

    // independent recomputation straight from the tile definition
    auto edge = [](int extent, int i) { return extent * i / 8; };
    int region = 0;
    for (int br = 0; br < k; ++br)
        for (int bc = 0; bc < k; ++bc, ++region) {
            double sum = 0.0;
            int count = 0;
            for (int r = edge(339, br); r < edge(339, br + 1); ++r)
                for (int c = edge(292, bc); c < edge(292, bc + 1); ++c) {
                    sum += img.at(r, c);
                    ++count;
                }
            const double mean = sum / count;
            double ss = 0.0;
            for (int r = edge(339, br); r < edge(339, br + 1); ++r)
                for (int c = edge(292, bc); c < edge(292, bc + 1); ++c)
                    ss += (img.at(r, c) - mean) * (img.at(r, c) - mean);
            const double stdev = std::sqrt(ss / count);
            CHECK(fv.values[region] == Catch::Approx(mean).margin(1e-12));
            CHECK(fv.values[64 + region] == Catch::Approx(stdev).margin(1e-12));
        }
}

TEST_CASE("reduce: per-column features see a horizontal mirror") {
    auto img = constant_image(20, 30, 0.0);
    // an off-center vertical stripe
    for (int r = 0; r < 20; ++r) img.pixels[static_cast<std::size_t>(r) * 30 + 5] = 1.0;
    auto mirrored = img;
    for (int r = 0; r < 20; ++r)
        for (int c = 0; c < 30; ++c)
            mirrored.pixels[static_cast<std::size_t>(r) * 30 + c] =
                img.pixels[static_cast<std::size_t>(r) * 30 + (29 - c)];

    const auto a = reduce(img, ReductionMode::per_column());
    const auto b = reduce(mirrored, ReductionMode::per_column());
    CHECK(a.values != b.values);
}

TEST_CASE("reduce: bit-stable across calls") {
    const auto img = random_image(339, 292, 23);
    const auto a = reduce(img, ReductionMode::per_column());
    const auto b = reduce(img, ReductionMode::per_column());
    CHECK(a.values == b.values);
}

TEST_CASE("reduce: rejects a block grid finer than the image") {
    const auto img = random_image(10, 10, 1);
    CHECK_THROWS_AS(reduce(img, ReductionMode::block(11)), std::invalid_argument);
}

TEST_CASE("reduction mode names round-trip through parse") {
    for (const auto mode : {ReductionMode::global(), ReductionMode::per_row(),
                            ReductionMode::per_column(), ReductionMode::block(8)}) {
        const auto back = ReductionMode::parse(mode.name());
        CHECK(back.kind == mode.kind);
        if (mode.kind == ReductionKind::Block) CHECK(back.block_k == mode.block_k);
    }
    CHECK_THROWS_AS(ReductionMode::parse("wavelet"), std::invalid_argument);
}

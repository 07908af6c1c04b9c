#include <catch2/catch_amalgamated.hpp>

#include <queue>
#include <set>

#include "seascan/image.hpp"
#include "seascan/mser.hpp"
#include "seascan/rng.hpp"

using namespace seascan;

namespace {

MserParams params_for(const Image8& img, int min_area = 30, int max_area = -1) {
    MserParams p;
    p.min_area = min_area;
    p.max_area = max_area > 0 ? max_area
                              : std::max(min_area + 1, static_cast<int>(img.px.size() / 100));
    return p;
}

std::set<int32_t> pixel_set(const MserRegion& r) { return {r.pixels.begin(), r.pixels.end()}; }

bool is_4_connected(const MserRegion& r, int cols) {
    if (r.pixels.empty()) return false;
    std::set<int32_t> members(r.pixels.begin(), r.pixels.end());
    std::queue<int32_t> q;
    std::set<int32_t> seen;
    q.push(r.pixels[0]);
    seen.insert(r.pixels[0]);
    while (!q.empty()) {
        int32_t px = q.front();
        q.pop();
        int row = px / cols, col = px % cols;
        const int32_t nbr[4] = {col > 0 ? px - 1 : -1, px + 1, px - cols, px + cols};
        for (int k = 0; k < 4; ++k) {
            int32_t nb = nbr[k];
            if (k == 1 && col + 1 >= cols) continue;
            if (k == 2 && row == 0) continue;
            if (nb < 0) continue;
            if (members.count(nb) && !seen.count(nb)) {
                seen.insert(nb);
                q.push(nb);
            }
        }
    }
    return seen.size() == members.size();
}

}  // namespace

TEST_CASE("uniform tile has no stable regions") {
    Image8 img(64, 64, 190);
    auto regions = mser_detect(img.view(), params_for(img));
    CHECK(regions.empty());
}

TEST_CASE("a dark square on bright ground is exactly one MSER- region") {
    Image8 img(256, 256, 255);
    for (int r = 100; r < 120; ++r)
        for (int c = 60; c < 80; ++c) img.at(r, c) = 0;
    auto regions = mser_detect(img.view(), params_for(img, 30, 2000));
    REQUIRE(regions.size() == 1);
    CHECK(regions[0].dark);
    CHECK(regions[0].pixels.size() == 400);
    std::set<int32_t> expected;
    for (int r = 100; r < 120; ++r)
        for (int c = 60; c < 80; ++c) expected.insert(r * 256 + c);
    CHECK(pixel_set(regions[0]) == expected);
}

TEST_CASE("the area filter rejects small regions") {
    Image8 img(256, 256, 255);
    for (int r = 100; r < 120; ++r)
        for (int c = 60; c < 80; ++c) img.at(r, c) = 0;
    auto regions = mser_detect(img.view(), params_for(img, 500, 2000));
    CHECK(regions.empty());
}

TEST_CASE("MSER- of a tile equals MSER+ of its inversion") {
    Xoshiro256 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        Image8 img(96, 96, 0);
        for (auto& v : img.px) v = static_cast<uint8_t>(40 + rng.below(180));
        // a few planted blobs
        for (int b = 0; b < 3; ++b) {
            int r0 = rng.range(10, 60), c0 = rng.range(10, 60);
            uint8_t v = static_cast<uint8_t>(rng.below(2) ? 5 : 245);
            for (int r = r0; r < r0 + 12; ++r)
                for (int c = c0; c < c0 + 12; ++c) img.at(r, c) = v;
        }
        Image8 inv(img.rows, img.cols);
        for (size_t i = 0; i < img.px.size(); ++i)
            inv.px[i] = static_cast<uint8_t>(255 - img.px[i]);

        auto params = params_for(img, 30, 900);
        auto reg_a = mser_detect(img.view(), params);
        auto reg_b = mser_detect(inv.view(), params);
        std::vector<std::set<int32_t>> minus_a, plus_b;
        for (const auto& r : reg_a)
            if (r.dark) minus_a.push_back(pixel_set(r));
        for (const auto& r : reg_b)
            if (!r.dark) plus_b.push_back(pixel_set(r));
        auto canon = [](std::vector<std::set<int32_t>>& v) {
            std::sort(v.begin(), v.end());
        };
        canon(minus_a);
        canon(plus_b);
        CHECK(minus_a == plus_b);
    }
}

TEST_CASE("every region is 4-connected") {
    Xoshiro256 rng(12);
    Image8 img(128, 128, 0);
    for (auto& v : img.px) v = static_cast<uint8_t>(rng.below(256));
    auto regions = mser_detect(img.view(), params_for(img, 20, 600));
    for (const auto& r : regions) CHECK(is_4_connected(r, img.cols));
}

TEST_CASE("region centroids follow the round-half-up rule") {
    MserRegion r;
    r.pixels = {0 * 10 + 0, 0 * 10 + 2, 2 * 10 + 0, 2 * 10 + 2};
    auto c = region_centroid(r, 10);
    CHECK(c.row == 1);
    CHECK(c.col == 1);

    MserRegion single;
    single.pixels = {5 * 10 + 7};
    c = region_centroid(single, 10);
    CHECK(c.row == 5);
    CHECK(c.col == 7);

    // 20x20 square with corner (10,10): centroid (19.5, 19.5) rounds half-up.
    MserRegion square;
    for (int row = 10; row < 30; ++row)
        for (int col = 10; col < 30; ++col) square.pixels.push_back(row * 64 + col);
    c = region_centroid(square, 64);
    CHECK(c.row == 20);
    CHECK(c.col == 20);
}

TEST_CASE("k disjoint constant blobs give exactly k regions with centroids on truth") {
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        Xoshiro256 rng(seed);
        int k = 1 + static_cast<int>(seed % 5);
        Image8 img(200, 200, 230);
        std::vector<std::pair<double, double>> truth;
        std::vector<std::pair<int, int>> origins;
        for (int b = 0; b < k; ++b) {
            // Non-overlapping 14x14 cells on a coarse lattice.
            int cell = b * 3 + static_cast<int>(rng.below(2));
            int r0 = 10 + (cell / 4) * 45, c0 = 10 + (cell % 4) * 45;
            int h = rng.range(8, 14), w = rng.range(8, 14);
            uint8_t v = static_cast<uint8_t>(10 + rng.below(60));
            for (int r = r0; r < r0 + h; ++r)
                for (int c = c0; c < c0 + w; ++c) img.at(r, c) = v;
            truth.push_back({r0 + (h - 1) / 2.0, c0 + (w - 1) / 2.0});
        }
        auto regions = mser_detect(img.view(), params_for(img, 30, 400));
        std::vector<MserRegion> dark;
        for (auto& r : regions)
            if (r.dark) dark.push_back(r);
        INFO("seed " << seed << " k " << k);
        REQUIRE(static_cast<int>(dark.size()) == k);
        for (const auto& r : dark) {
            auto c = region_centroid(r, img.cols);
            double best = 1e9;
            for (auto& t : truth)
                best = std::min(best, std::max(std::abs(t.first - c.row),
                                               std::abs(t.second - c.col)));
            CHECK(best <= 1.0);
        }
    }
}

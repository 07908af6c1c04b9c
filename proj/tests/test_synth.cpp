#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "fixtures.hpp"
#include "seascan/synth.hpp"

using namespace seascan;

TEST_CASE("same seed produces byte-identical output") {
    auto sc = fixtures::small_target_scenario(42);
    auto [pings_a, truth_a] = gen_survey(sc);
    auto [pings_b, truth_b] = gen_survey(sc);
    auto bytes_a = xtf_bytes(make_header(sc), pings_a);
    auto bytes_b = xtf_bytes(make_header(sc), pings_b);
    CHECK(bytes_a == bytes_b);
}

TEST_CASE("different seeds share geometry but differ in speckle") {
    auto sc1 = fixtures::small_target_scenario(1);
    auto sc2 = fixtures::small_target_scenario(2);
    auto [pings_1, truth_1] = gen_survey(sc1);
    auto [pings_2, truth_2] = gen_survey(sc2);
    REQUIRE(truth_1.size() == truth_2.size());
    for (size_t i = 0; i < truth_1.size(); ++i) {
        CHECK(truth_1[i].position->lat == truth_2[i].position->lat);
        CHECK(truth_1[i].position->lon == truth_2[i].position->lon);
        CHECK(truth_1[i].extent_along_m == truth_2[i].extent_along_m);
    }
    CHECK(pings_1.size() == pings_2.size());
    bool any_diff = false;
    for (size_t i = 0; i < pings_1.size() && !any_diff; ++i)
        any_diff = pings_1[i].samples != pings_2[i].samples;
    CHECK(any_diff);
}

TEST_CASE("targets outside the swath are rejected") {
    auto sc = fixtures::small_target_scenario(1);
    sc.targets[0].center_ground_m = sc.ground_max_m() - 1.0;  // shadow spills past the swath
    CHECK_THROWS_AS(gen_survey(sc), ScenarioError);
    sc = fixtures::small_target_scenario(1);
    sc.targets[0].center_ping = 1;  // along extent spills past the first ping
    CHECK_THROWS_AS(gen_survey(sc), ScenarioError);
}

TEST_CASE("highlights are brighter than background in expectation") {
    int ok = 0;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        auto sc = fixtures::small_target_scenario(seed);
        const auto& t = sc.targets[0];
        auto [pings, truth] = gen_survey(sc);
        const double g_max = sc.ground_max_m();
        const int n = sc.samples_per_ping;
        double hi_sum = 0, hi_n = 0, bg_sum = 0, bg_n = 0;
        for (const auto& p : pings) {
            if (p.channel != 1) continue;  // starboard target
            bool in_rows = std::abs(static_cast<int>(p.ping_number) - t.center_ping) <=
                           static_cast<int>(t.along_m / 2.0 / sc.along_m_per_ping()) - 1;
            for (int j = 0; j < n; ++j) {
                double s = static_cast<double>(j) * sc.slant_range_max_m / n;
                // Outside the water column and the first-return band.
                if (s <= sc.altitude_m + sc.first_return_band_m + 0.5) continue;
                double g = std::sqrt(s * s - sc.altitude_m * sc.altitude_m);
                // Margins account for the silhouette jitter (< 0.7 m).
                bool in_target = in_rows && std::abs(g - t.center_ground_m) < t.across_m / 2.0 - 1.0;
                bool clear_of_target =
                    g < t.center_ground_m - t.across_m || g > t.center_ground_m + t.across_m + t.shadow_m + 2;
                if (in_target) {
                    hi_sum += p.samples[static_cast<size_t>(j)];
                    hi_n++;
                } else if (clear_of_target && g < g_max - 2) {
                    bg_sum += p.samples[static_cast<size_t>(j)];
                    bg_n++;
                }
            }
        }
        double sigma_mean = sc.bg_sigma * std::sqrt(M_PI / 2.0);
        double needed = (sc.targets[0].highlight_gain - 1.0) / 2.0 * sigma_mean;
        if (hi_sum / hi_n - bg_sum / bg_n >= needed) ok++;
    }
    CHECK(ok >= 19);  // wide-tolerance statistical check
}

TEST_CASE("shadow bins sit below the background 5th percentile") {
    auto sc = fixtures::small_target_scenario(9);
    const auto& t = sc.targets[0];
    auto [pings, truth] = gen_survey(sc);
    const int n = sc.samples_per_ping;
    std::vector<uint16_t> background, shadow;
    for (const auto& p : pings) {
        if (p.channel != 1) continue;
        bool in_rows = std::abs(static_cast<int>(p.ping_number) - t.center_ping) <
                       static_cast<int>(t.along_m / 2.0 / sc.along_m_per_ping()) - 1;
        for (int j = 0; j < n; ++j) {
            double s = static_cast<double>(j) * sc.slant_range_max_m / n;
            if (s <= sc.altitude_m + sc.first_return_band_m + 0.5) continue;
            double g = std::sqrt(s * s - sc.altitude_m * sc.altitude_m);
            if (g >= sc.ground_max_m() - 2) continue;
            // Contact-edge jitter reaches 0.6 m; keep a margin past it.
            bool in_shadow = in_rows && g > t.center_ground_m + t.across_m / 2.0 + 1.0 &&
                             g < t.center_ground_m + t.across_m / 2.0 + t.shadow_m - 0.5;
            bool clear = g < t.center_ground_m - t.across_m ||
                         g > t.center_ground_m + t.across_m / 2.0 + t.shadow_m + 2.0;
            if (in_shadow) shadow.push_back(p.samples[static_cast<size_t>(j)]);
            else if (clear) background.push_back(p.samples[static_cast<size_t>(j)]);
        }
    }
    REQUIRE(!shadow.empty());
    std::sort(background.begin(), background.end());
    uint16_t p5 = background[background.size() / 20];
    for (uint16_t v : shadow) CHECK(v < p5);
}

TEST_CASE("16-bit scenarios round-trip through the writer") {
    auto sc = fixtures::small_target_scenario(3);
    sc.ping_count = 20;
    sc.bytes_per_sample = 2;
    sc.targets.clear();
    auto [pings, truth] = gen_survey(sc);
    REQUIRE(!pings.empty());
    bool any_wide = false;
    for (const auto& p : pings)
        for (uint16_t s : p.samples) any_wide |= s > 255;
    CHECK(any_wide);

    MemorySource src(xtf_bytes(make_header(sc), pings));
    XtfReader reader(src);
    CHECK(reader.header().channels[0].bytes_per_sample == 2);
    size_t i = 0;
    for (;;) {
        auto pkt = reader.next();
        if (!pkt) break;
        auto* batch = std::get_if<PingBatch>(&*pkt);
        REQUIRE(batch);
        for (const auto& p : *batch) {
            REQUIRE(i < pings.size());
            CHECK(p.samples == pings[i].samples);
            ++i;
        }
    }
    CHECK(i == pings.size());
}

TEST_CASE("truth sidecar and nav stride behave") {
    auto sc = fixtures::small_target_scenario(4);
    sc.nav_stride = 5;
    sc.ping_count = 50;
    sc.targets.clear();
    auto [pings, truth] = gen_survey(sc);
    int with_nav = 0;
    for (const auto& p : pings)
        if (p.channel == 0 && p.nav) with_nav++;
    CHECK(with_nav == 10);
}

#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include "oracles.hpp"
#include "seascan/georef.hpp"
#include "seascan/rng.hpp"

using namespace seascan;

namespace {

std::vector<RowNav> straight_track(int rows, double lat0, double lon0, float heading,
                                   double step_m) {
    std::vector<RowNav> out;
    LatLon p{lat0, lon0};
    for (int i = 0; i < rows; ++i) {
        out.push_back({static_cast<uint32_t>(i), static_cast<int64_t>(i) * 100000,
                       NavFix{p.lat, p.lon, heading, static_cast<int64_t>(i) * 100000}, false});
        p = offset_position(p, heading, step_m);
    }
    return out;
}

PixelGeoContext ctx_of(const std::vector<RowNav>& rows, ChannelSide side, double gpc) {
    PixelGeoContext ctx;
    ctx.rows = rows;
    ctx.side = side;
    ctx.ground_range_per_col = gpc;
    ctx.source = "test";
    return ctx;
}

}  // namespace

TEST_CASE("column zero maps exactly to the nav position") {
    auto rows = straight_track(5, 48.0, -68.0, 37.f, 1.0);
    for (float heading : {0.f, 37.f, 90.f, 270.f, 359.f}) {
        auto track = straight_track(5, 48.0, -68.0, heading, 1.0);
        auto p = pixel_to_geo(2, 0.0, ctx_of(track, ChannelSide::Starboard, 0.1));
        CHECK(p.lat == track[2].nav->latitude);
        CHECK(p.lon == track[2].nav->longitude);
    }
}

TEST_CASE("starboard offset at heading north goes due east") {
    auto rows = straight_track(3, 48.0, -68.0, 0.f, 1.0);
    double d = 100.0;
    auto p = pixel_to_geo(0, d / 0.5, ctx_of(rows, ChannelSide::Starboard, 0.5));
    double expected_dlon = d / (kEarthRadiusM * std::cos(48.0 * M_PI / 180.0)) * 180.0 / M_PI;
    CHECK_THAT(p.lat, Catch::Matchers::WithinAbs(48.0, 1e-12));
    CHECK_THAT(p.lon - (-68.0), Catch::Matchers::WithinAbs(expected_dlon, 1e-12));

    auto q = pixel_to_geo(0, d / 0.5, ctx_of(rows, ChannelSide::Port, 0.5));
    CHECK_THAT(q.lon - (-68.0), Catch::Matchers::WithinAbs(-expected_dlon, 1e-12));
}

TEST_CASE("port and starboard offsets reflect through the track line") {
    Xoshiro256 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        double lat = rng.uniform(-70.0, 70.0), lon = rng.uniform(-179.0, 179.0);
        float heading = static_cast<float>(rng.uniform(0.0, 360.0));
        auto rows = straight_track(1, lat, lon, heading, 1.0);
        double col = rng.uniform(0.0, 500.0);
        auto s = pixel_to_geo(0, col, ctx_of(rows, ChannelSide::Starboard, 0.3));
        auto p = pixel_to_geo(0, col, ctx_of(rows, ChannelSide::Port, 0.3));
        CHECK_THAT((s.lat + p.lat) / 2.0, Catch::Matchers::WithinAbs(lat, 1e-9));
        CHECK_THAT((s.lon + p.lon) / 2.0, Catch::Matchers::WithinAbs(lon, 1e-9));
    }
}

TEST_CASE("rows without nav raise UngeoreferencedRow") {
    std::vector<RowNav> rows(3);
    rows[0] = {0, 0, std::nullopt, false};
    CHECK_THROWS_AS(pixel_to_geo(0, 10.0, ctx_of(rows, ChannelSide::Port, 0.1)),
                    UngeoreferencedRow);
    CHECK_THROWS_AS(pixel_to_geo(99, 10.0, ctx_of(rows, ChannelSide::Port, 0.1)),
                    UngeoreferencedRow);
}

TEST_CASE("flat-earth stays within 0.1 m of the spherical geodesic") {
    // d <= 500 m, |lat| <= 70.
    for (double lat : {-70.0, -45.0, 0.0, 30.0, 60.0, 70.0}) {
        for (double bearing : {0.0, 45.0, 90.0, 135.0, 200.0, 300.0}) {
            for (double d : {10.0, 100.0, 500.0}) {
                LatLon flat = offset_position({lat, 5.0}, bearing, d);
                double glat, glon;
                oracles::geodesic_destination(lat, 5.0, bearing, d, kEarthRadiusM, glat, glon);
                double err = oracles::haversine_m(flat.lat, flat.lon, glat, glon, kEarthRadiusM);
                INFO("lat " << lat << " bearing " << bearing << " d " << d);
                CHECK(err < 0.1);
            }
        }
    }
}

TEST_CASE("roi_to_object computes extents from the bbox and the track") {
    auto rows = straight_track(40, 48.0, -68.0, 90.f, 0.5);
    auto ctx = ctx_of(rows, ChannelSide::Starboard, 0.2);

    RegionOfInterest roi;
    roi.members = {{10, 100, Detector::Fast, 1.0}, {30, 150, Detector::Fast, 1.0}};
    roi.row_min = 10;
    roi.row_max = 30;  // 20 inter-ping gaps at 0.5 m
    roi.col_min = 100;
    roi.col_max = 150;  // width 50 cols at 0.2 m
    roi.centroid_row = 20;
    roi.centroid_col = 125;
    roi.padding_applied = 0;

    auto obj = roi_to_object(roi, ctx);
    CHECK_THAT(obj.extent_across_m, Catch::Matchers::WithinAbs(10.0, 1e-9));
    CHECK_THAT(obj.extent_along_m, Catch::Matchers::WithinRel(10.0, 1e-6));
    CHECK(obj.ping_first == 10);
    CHECK(obj.ping_last == 30);
    CHECK(obj.feature_count == 2);
    CHECK(obj.position.has_value());
    CHECK_FALSE(obj.degenerate_track);
}

TEST_CASE("a stationary track yields a degenerate-track flag") {
    std::vector<RowNav> rows;
    for (int i = 0; i < 20; ++i)
        rows.push_back({static_cast<uint32_t>(i), static_cast<int64_t>(i) * 100000,
                        NavFix{48.0, -68.0, 0.f, static_cast<int64_t>(i) * 100000}, false});
    auto ctx = ctx_of(rows, ChannelSide::Port, 0.2);
    RegionOfInterest roi;
    roi.members = {{2, 10, Detector::Fast, 1.0}, {15, 30, Detector::Fast, 1.0}};
    roi.row_min = 2;
    roi.row_max = 15;
    roi.col_min = 10;
    roi.col_max = 30;
    roi.centroid_row = 8;
    roi.centroid_col = 20;
    auto obj = roi_to_object(roi, ctx);
    CHECK(obj.extent_along_m == 0.0);
    CHECK(obj.degenerate_track);
}

TEST_CASE("objects without nav are emitted with pixel coordinates, flagged") {
    std::vector<RowNav> rows(20);
    for (int i = 0; i < 20; ++i)
        rows[static_cast<size_t>(i)] = {static_cast<uint32_t>(i),
                                        static_cast<int64_t>(i) * 100000, std::nullopt, false};
    auto ctx = ctx_of(rows, ChannelSide::Port, 0.2);
    RegionOfInterest roi;
    roi.members = {{2, 10, Detector::Fast, 1.0}};
    roi.row_min = 2;
    roi.row_max = 2;
    roi.col_min = 10;
    roi.col_max = 10;
    roi.centroid_row = 2;
    roi.centroid_col = 10;
    auto obj = roi_to_object(roi, ctx);
    CHECK_FALSE(obj.position.has_value());
    CHECK(obj.pixel_row == 2.0);
    auto j = nlohmann::json::parse(object_jsonl(obj));
    CHECK(j["georeferenced"] == false);
}

// ---------------------------------------------------------------------------
// catalog writers
// ---------------------------------------------------------------------------

namespace {

GeoObject random_object(Xoshiro256& rng, int id) {
    GeoObject o;
    o.object_id = id;
    o.position = LatLon{rng.uniform(-80.0, 80.0), rng.uniform(-179.0, 179.0)};
    o.pixel_row = rng.uniform(0, 5000);
    o.pixel_col = rng.uniform(0, 1024);
    o.extent_along_m = rng.uniform(0.5, 30.0);
    o.extent_across_m = rng.uniform(0.5, 30.0);
    o.channel = rng.below(2) ? ChannelSide::Port : ChannelSide::Starboard;
    o.ping_first = static_cast<uint32_t>(rng.below(5000));
    o.ping_last = o.ping_first + static_cast<uint32_t>(rng.below(100));
    o.feature_count = static_cast<int>(rng.below(500)) + 1;
    o.source = "survey,one.xtf";  // comma exercises CSV quoting
    o.detected_at_us = 1577836800000000 + static_cast<int64_t>(rng.below(86400000)) * 1000;
    return o;
}

}  // namespace

TEST_CASE("empty catalog is a valid FeatureCollection and a header-only CSV") {
    auto geojson = nlohmann::json::parse(catalog_geojson({}));
    CHECK(geojson["type"] == "FeatureCollection");
    CHECK(geojson["features"].empty());
    std::string csv = catalog_csv({});
    CHECK(csv ==
          "object_id,latitude,longitude,extent_along_m,extent_across_m,channel,"
          "ping_first,ping_last,feature_count,source,detected_at\r\n");
}

TEST_CASE("GeoJSON uses [longitude, latitude] coordinate order") {
    Xoshiro256 rng(3);
    auto obj = random_object(rng, 0);
    auto fc = nlohmann::json::parse(catalog_geojson({obj}));
    REQUIRE(fc["features"].size() == 1);
    auto& coords = fc["features"][0]["geometry"]["coordinates"];
    CHECK(coords[0].get<double>() == obj.position->lon);
    CHECK(coords[1].get<double>() == obj.position->lat);
    CHECK(fc["features"][0]["properties"]["object_id"] == 0);
}

TEST_CASE("catalog round-trips objects through GeoJSON") {
    Xoshiro256 rng(4);
    std::vector<GeoObject> objects;
    for (int i = 0; i < 50; ++i) objects.push_back(random_object(rng, i));
    auto fc = nlohmann::json::parse(catalog_geojson(objects));
    REQUIRE(fc["features"].size() == 50);
    std::map<int, const GeoObject*> by_id;
    for (const auto& o : objects) by_id[o.object_id] = &o;
    for (const auto& f : fc["features"]) {
        const GeoObject& src = *by_id.at(f["properties"]["object_id"].get<int>());
        CHECK_THAT(f["geometry"]["coordinates"][1].get<double>(),
                   Catch::Matchers::WithinAbs(src.position->lat, 1e-7));
        CHECK_THAT(f["geometry"]["coordinates"][0].get<double>(),
                   Catch::Matchers::WithinAbs(src.position->lon, 1e-7));
        CHECK(f["properties"]["ping_first"].get<uint32_t>() == src.ping_first);
        CHECK(f["properties"]["ping_last"].get<uint32_t>() == src.ping_last);
        CHECK(f["properties"]["feature_count"].get<int>() == src.feature_count);
        CHECK(f["properties"]["channel"].get<std::string>() == to_string(src.channel));
        CHECK_THAT(f["properties"]["extent_along_m"].get<double>(),
                   Catch::Matchers::WithinRel(src.extent_along_m, 1e-12));
    }
}

TEST_CASE("catalog output is deterministic and sorted by detected ping order") {
    Xoshiro256 rng(5);
    std::vector<GeoObject> objects;
    for (int i = 0; i < 20; ++i) objects.push_back(random_object(rng, i));
    auto a = catalog_geojson(objects);
    auto b = catalog_geojson(objects);
    CHECK(a == b);
    auto csv_a = catalog_csv(objects);
    auto csv_b = catalog_csv(objects);
    CHECK(csv_a == csv_b);

    auto fc = nlohmann::json::parse(a);
    uint32_t prev = 0;
    for (const auto& f : fc["features"]) {
        uint32_t first = f["properties"]["ping_first"].get<uint32_t>();
        CHECK(first >= prev);
        prev = first;
    }
}

TEST_CASE("CSV rows quote fields with commas and parse back") {
    Xoshiro256 rng(6);
    auto obj = random_object(rng, 7);
    std::string csv = catalog_csv({obj});
    auto eol = csv.find("\r\n");
    std::string row = csv.substr(eol + 2);
    CHECK(row.find("\"survey,one.xtf\"") != std::string::npos);
    char latbuf[32];
    std::snprintf(latbuf, sizeof latbuf, "%.8f", obj.position->lat);
    CHECK(row.find(latbuf) != std::string::npos);
}

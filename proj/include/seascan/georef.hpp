#ifndef SEASCAN_GEOREF_HPP
#define SEASCAN_GEOREF_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "seascan/clustering.hpp"
#include "seascan/xtf.hpp"

namespace seascan {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kDegPerRad = 180.0 / M_PI;

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

// Local tangent plane (equirectangular) forward step. Swath-scale distances
// only; the flat-earth error at 500 m is centimetres.
inline LatLon offset_position(const LatLon& p, double bearing_deg, double dist_m) {
    double beta = bearing_deg / kDegPerRad;
    double dlat = dist_m * std::cos(beta) / kEarthRadiusM * kDegPerRad;
    double dlon = dist_m * std::sin(beta) / (kEarthRadiusM * std::cos(p.lat / kDegPerRad)) * kDegPerRad;
    return {p.lat + dlat, p.lon + dlon};
}

inline double local_distance_m(const LatLon& a, const LatLon& b) {
    double mean_lat = (a.lat + b.lat) / 2.0 / kDegPerRad;
    double dy = (b.lat - a.lat) / kDegPerRad * kEarthRadiusM;
    double dx = (b.lon - a.lon) / kDegPerRad * kEarthRadiusM * std::cos(mean_lat);
    return std::hypot(dx, dy);
}

struct UngeoreferencedRow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RowNav {
    uint32_t ping_number = 0;
    int64_t timestamp_us = 0;
    std::optional<NavFix> nav;
    bool extrapolated = false;
};

// Per-channel context mapping (global row, ground bin) pixels to geography.
struct PixelGeoContext {
    std::span<const RowNav> rows;  // indexed by global row
    double ground_range_per_col = 0.0;
    ChannelSide side = ChannelSide::Other;
    // Layback hook: fixed sensor offset from the nav antenna, metres.
    double layback_along_m = 0.0;
    double layback_across_m = 0.0;
    std::string source;
};

// Across-track offset col * ground_range_per_col applied perpendicular to the
// ping heading: port is heading - 90, starboard heading + 90.
inline LatLon pixel_to_geo(int64_t row, double col, const PixelGeoContext& ctx) {
    if (row < 0 || row >= static_cast<int64_t>(ctx.rows.size()))
        throw UngeoreferencedRow("row " + std::to_string(row) + " outside nav context");
    const RowNav& rn = ctx.rows[static_cast<size_t>(row)];
    if (!rn.nav) throw UngeoreferencedRow("row " + std::to_string(row) + " has no nav fix");
    const NavFix& fix = *rn.nav;
    LatLon p{fix.latitude, fix.longitude};
    double heading = fix.heading_deg;
    if (ctx.layback_along_m != 0.0) p = offset_position(p, heading + 180.0, ctx.layback_along_m);
    if (ctx.layback_across_m != 0.0) p = offset_position(p, heading + 90.0, ctx.layback_across_m);
    double d = col * ctx.ground_range_per_col;
    if (d == 0.0) return p;
    double beta = ctx.side == ChannelSide::Port ? heading - 90.0 : heading + 90.0;
    return offset_position(p, beta, d);
}

struct GeoObject {
    int object_id = 0;
    std::optional<LatLon> position;  // absent when nav was unavailable
    double pixel_row = 0.0;          // global row (ping axis)
    double pixel_col = 0.0;          // ground bin
    double extent_along_m = 0.0;
    double extent_across_m = 0.0;
    ChannelSide channel = ChannelSide::Other;
    uint32_t ping_first = 0;
    uint32_t ping_last = 0;
    int feature_count = 0;
    std::string source;
    int64_t detected_at_us = 0;
    bool degenerate_track = false;
    bool nav_extrapolated = false;
};

// Georeferences one merged ROI. Objects with missing nav are still emitted,
// carrying pixel coordinates only.
inline GeoObject roi_to_object(const RegionOfInterest& roi, const PixelGeoContext& ctx) {
    GeoObject obj;
    obj.pixel_row = roi.centroid_row;
    obj.pixel_col = roi.centroid_col;
    obj.channel = ctx.side;
    obj.feature_count = static_cast<int>(roi.members.size());
    obj.source = ctx.source;
    obj.extent_across_m = static_cast<double>(roi.col_max - roi.col_min) * ctx.ground_range_per_col;

    int64_t row_first = roi.row_min, row_last = roi.row_max;
    row_first = std::clamp<int64_t>(row_first, 0, static_cast<int64_t>(ctx.rows.size()) - 1);
    row_last = std::clamp<int64_t>(row_last, 0, static_cast<int64_t>(ctx.rows.size()) - 1);
    obj.ping_first = ctx.rows[static_cast<size_t>(row_first)].ping_number;
    obj.ping_last = ctx.rows[static_cast<size_t>(row_last)].ping_number;
    obj.detected_at_us = ctx.rows[static_cast<size_t>(row_last)].timestamp_us;

    double along = 0.0;
    bool have_all_nav = true;
    for (int64_t r = row_first; r < row_last; ++r) {
        const auto& a = ctx.rows[static_cast<size_t>(r)].nav;
        const auto& b = ctx.rows[static_cast<size_t>(r + 1)].nav;
        if (!a || !b) {
            have_all_nav = false;
            break;
        }
        along += local_distance_m({a->latitude, a->longitude}, {b->latitude, b->longitude});
    }
    obj.extent_along_m = have_all_nav ? along : 0.0;
    if (have_all_nav && row_last > row_first && along == 0.0) obj.degenerate_track = true;

    int64_t crow = static_cast<int64_t>(std::llround(roi.centroid_row));
    crow = std::clamp<int64_t>(crow, 0, static_cast<int64_t>(ctx.rows.size()) - 1);
    try {
        obj.position = pixel_to_geo(crow, roi.centroid_col, ctx);
        obj.nav_extrapolated = ctx.rows[static_cast<size_t>(crow)].extrapolated;
    } catch (const UngeoreferencedRow&) {
        obj.position.reset();
    }
    return obj;
}

// ---------------------------------------------------------------------------
// Catalog output
// ---------------------------------------------------------------------------

enum class CatalogFormat { GeoJson, Csv };

inline nlohmann::json object_properties(const GeoObject& o) {
    nlohmann::json p;
    p["object_id"] = o.object_id;
    p["extent_along_m"] = o.extent_along_m;
    p["extent_across_m"] = o.extent_across_m;
    p["channel"] = to_string(o.channel);
    p["ping_first"] = o.ping_first;
    p["ping_last"] = o.ping_last;
    p["feature_count"] = o.feature_count;
    p["source"] = o.source;
    p["detected_at"] = iso8601_utc(o.detected_at_us);
    p["pixel_row"] = o.pixel_row;
    p["pixel_col"] = o.pixel_col;
    p["georeferenced"] = o.position.has_value();
    if (o.degenerate_track) p["degenerate_track"] = true;
    if (o.nav_extrapolated) p["nav_extrapolated"] = true;
    return p;
}

inline nlohmann::json object_feature(const GeoObject& o) {
    nlohmann::json f;
    f["type"] = "Feature";
    if (o.position) {
        f["geometry"] = {{"type", "Point"},
                         {"coordinates", {o.position->lon, o.position->lat}}};
    } else {
        f["geometry"] = nullptr;
    }
    f["properties"] = object_properties(o);
    return f;
}

// Catalog entries sorted by detected ping order.
inline std::vector<GeoObject> sorted_catalog(std::vector<GeoObject> objects) {
    std::sort(objects.begin(), objects.end(), [](const GeoObject& a, const GeoObject& b) {
        if (a.ping_first != b.ping_first) return a.ping_first < b.ping_first;
        if (a.channel != b.channel) return a.channel < b.channel;
        return a.object_id < b.object_id;
    });
    return objects;
}

inline std::string catalog_geojson(const std::vector<GeoObject>& objects) {
    nlohmann::json fc;
    fc["type"] = "FeatureCollection";
    fc["features"] = nlohmann::json::array();
    for (const auto& o : sorted_catalog(objects)) fc["features"].push_back(object_feature(o));
    return fc.dump(2) + "\n";
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

inline std::string catalog_csv(const std::vector<GeoObject>& objects) {
    std::ostringstream out;
    out << "object_id,latitude,longitude,extent_along_m,extent_across_m,channel,"
           "ping_first,ping_last,feature_count,source,detected_at\r\n";
    char buf[64];
    for (const auto& o : sorted_catalog(objects)) {
        out << o.object_id << ",";
        if (o.position) {
            std::snprintf(buf, sizeof buf, "%.8f", o.position->lat);
            out << buf << ",";
            std::snprintf(buf, sizeof buf, "%.8f", o.position->lon);
            out << buf << ",";
        } else {
            out << ",,";
        }
        std::snprintf(buf, sizeof buf, "%.3f", o.extent_along_m);
        out << buf << ",";
        std::snprintf(buf, sizeof buf, "%.3f", o.extent_across_m);
        out << buf << ",";
        out << to_string(o.channel) << "," << o.ping_first << "," << o.ping_last << ","
            << o.feature_count << "," << csv_quote(o.source) << "," << iso8601_utc(o.detected_at_us)
            << "\r\n";
    }
    return out.str();
}

inline void write_catalog(const std::vector<GeoObject>& objects, CatalogFormat format,
                          const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open catalog for writing: " + path);
    out << (format == CatalogFormat::GeoJson ? catalog_geojson(objects) : catalog_csv(objects));
    if (!out) throw std::runtime_error("catalog write failed: " + path);
}

// One-object JSON line for the live event stream.
inline std::string object_jsonl(const GeoObject& o) {
    nlohmann::json j = object_properties(o);
    if (o.position) {
        j["latitude"] = o.position->lat;
        j["longitude"] = o.position->lon;
    }
    return j.dump();
}

}  // namespace seascan

#endif  // SEASCAN_GEOREF_HPP

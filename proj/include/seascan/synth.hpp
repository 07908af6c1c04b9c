#ifndef SEASCAN_SYNTH_HPP
#define SEASCAN_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "seascan/georef.hpp"
#include "seascan/rng.hpp"
#include "seascan/xtf.hpp"

namespace seascan {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TargetSpec {
    enum class Shape { Rect, Ellipse, LineRope };
    Shape shape = Shape::Rect;
    int center_ping = 0;
    double center_ground_m = 0.0;
    ChannelSide side = ChannelSide::Starboard;
    double along_m = 5.0;
    double across_m = 5.0;
    double highlight_gain = 4.0;  // multiplicative, > 1
    double shadow_m = 8.0;        // metres away from nadir behind the target
};

inline const char* to_string(TargetSpec::Shape s) {
    switch (s) {
        case TargetSpec::Shape::Rect: return "rect";
        case TargetSpec::Shape::Ellipse: return "ellipse";
        default: return "line_rope";
    }
}

// Peak-to-peak silhouette raggedness applied to footprint edges.
inline double target_edge_jitter_m(const TargetSpec& t) {
    if (t.shape == TargetSpec::Shape::LineRope) return 0.0;
    return std::min(1.2, 0.25 * t.across_m);
}

struct SurveyScenario {
    uint64_t seed = 1;
    std::string name = "survey";
    int ping_count = 2000;
    int samples_per_ping = 1024;
    double slant_range_max_m = 80.0;
    double altitude_m = 6.0;
    double sound_velocity_mps = 1500.0;
    double start_lat = 48.4500;
    double start_lon = -68.5500;
    double heading_deg = 90.0;
    double speed_mps = 2.0;
    double ping_rate_hz = 10.0;
    // Background: Rayleigh speckle on a resolution-cell grid plus a floor.
    // Cells are coarser than output bins, matching the sonar footprint; the
    // values are bilinearly interpolated between cell centres.
    // The background needs enough raw dynamic range that per-tile
    // equalization does not collapse it onto a coarse intensity ladder.
    double bg_sigma = 40.0;
    double bg_floor = 22.0;
    double speckle_cell_across_m = 10.0;
    int speckle_cell_along_pings = 40;
    // Specular first bottom return: a bright band this many slant-metres past
    // the nadir point, fading quadratically into the diffuse field. It also
    // covers the most stretched part of the corrected image, where pixels
    // interpolate from very few slant samples.
    double first_return_band_m = 3.0;
    int nav_stride = 1;          // a fix every N pings
    int bytes_per_sample = 1;    // 1 or 2
    int64_t start_time_us = 1577836800000000;  // 2020-01-01T00:00:00Z
    std::vector<TargetSpec> targets;

    double ground_max_m() const {
        return std::sqrt(slant_range_max_m * slant_range_max_m - altitude_m * altitude_m);
    }
    double along_m_per_ping() const { return speed_mps / ping_rate_hz; }

    void validate() const {
        if (ping_count < 0) throw ScenarioError("ping_count must be >= 0");
        if (samples_per_ping < 1) throw ScenarioError("samples_per_ping must be >= 1");
        if (!(altitude_m < slant_range_max_m))
            throw ScenarioError("altitude must be below slant_range_max");
        if (!(ping_rate_hz > 0)) throw ScenarioError("ping_rate must be > 0");
        if (!(speed_mps > 0)) throw ScenarioError("speed must be > 0");
        if (bytes_per_sample != 1 && bytes_per_sample != 2)
            throw ScenarioError("bytes_per_sample must be 1 or 2");
        if (nav_stride < 1) throw ScenarioError("nav_stride must be >= 1");
        const double g_max = ground_max_m();
        for (const auto& t : targets) {
            double half_across = t.across_m / 2.0 + target_edge_jitter_m(t) / 2.0;
            // End raggedness can extend the along span by up to 15%.
            int half_along =
                static_cast<int>(std::ceil(t.along_m / 2.0 / along_m_per_ping() * 1.2));
            if (t.center_ground_m - half_across <= 0.0 ||
                t.center_ground_m + half_across + t.shadow_m >= g_max)
                throw ScenarioError("target at ground " + std::to_string(t.center_ground_m) +
                                    " m does not fit inside the swath");
            if (t.center_ping - half_along < 0 || t.center_ping + half_along >= ping_count)
                throw ScenarioError("target at ping " + std::to_string(t.center_ping) +
                                    " does not fit inside the survey");
            if (!(t.highlight_gain > 1.0)) throw ScenarioError("highlight_gain must be > 1");
            if (t.shadow_m < 0.0) throw ScenarioError("shadow length must be >= 0");
            if (t.side == ChannelSide::Other) throw ScenarioError("target side must be port/starboard");
        }
    }
};

namespace detail {

// Across-track footprint [lo, hi] of a target at one ping, or false.
// half_along_scale lets the caller roughen the along-track ends.
inline bool target_span_at(const TargetSpec& t, int ping, double along_m_per_ping, double& lo,
                           double& hi, double half_along_scale = 1.0) {
    double half_along_p = t.along_m / 2.0 / along_m_per_ping * half_along_scale;
    double dp = ping - t.center_ping;
    if (std::abs(dp) > half_along_p) return false;
    switch (t.shape) {
        case TargetSpec::Shape::Rect:
            lo = t.center_ground_m - t.across_m / 2.0;
            hi = t.center_ground_m + t.across_m / 2.0;
            return true;
        case TargetSpec::Shape::Ellipse: {
            double u = half_along_p > 0 ? dp / half_along_p : 0.0;
            double w = t.across_m / 2.0 * std::sqrt(std::max(0.0, 1.0 - u * u));
            if (w <= 0) return false;
            lo = t.center_ground_m - w;
            hi = t.center_ground_m + w;
            return true;
        }
        case TargetSpec::Shape::LineRope: {
            // Thin diagonal streak from one corner of the extent to the other.
            double u = half_along_p > 0 ? dp / half_along_p : 0.0;  // [-1, 1]
            double center = t.center_ground_m + u * t.across_m / 2.0;
            const double rope_half_width = 0.25;  // metres
            lo = center - rope_half_width;
            hi = center + rope_half_width;
            return true;
        }
    }
    return false;
}

class GroundField {
public:
    GroundField(const SurveyScenario& sc, int channel) : sc_(sc), channel_(channel) {
        cell_across_bins_ = std::max(1.0, sc.speckle_cell_across_m / (sc.ground_max_m() /
                                                                       sc.samples_per_ping));
    }

    // Diffuse backscatter falls off with grazing angle across the swath; this
    // also guarantees every tile spans a healthy dynamic range before
    // equalization.
    double falloff(double ground_m) const {
        return 1.25 - 0.5 * ground_m / sc_.ground_max_m();
    }

    // Background + targets + shadows at (ping, ground range in metres).
    double value(int ping, double ground_m) const {
        double v = sc_.bg_floor + falloff(ground_m) * speckle(ping, ground_m);
        bool in_shadow = false;
        for (size_t ti = 0; ti < sc_.targets.size(); ++ti) {
            const auto& t = sc_.targets[ti];
            if (static_cast<int>(t.side) != channel_side_int()) continue;
            double lo, hi;
            if (!target_span_at(t, ping, sc_.along_m_per_ping(), lo, hi)) continue;
            // Real debris has a ragged silhouette; jitter the footprint edges
            // on a short along-track correlation so the outline is irregular.
            double amp = target_edge_jitter_m(t);
            lo += amp * (hashed_unit(sc_.seed, 0xE1A0 + ti, static_cast<uint64_t>(ping >> 1),
                                     static_cast<uint64_t>(channel_)) -
                         0.5);
            hi += amp * (hashed_unit(sc_.seed, 0xE1B0 + ti, static_cast<uint64_t>(ping >> 1),
                                     static_cast<uint64_t>(channel_)) -
                         0.5);
            bool in_footprint = ground_m >= lo && ground_m <= hi;
            // Rects additionally get ragged along-track ends, bucketed
            // across-track (only the footprint, not the shadow rows).
            if (in_footprint && t.shape == TargetSpec::Shape::Rect) {
                uint64_t g_bucket = static_cast<uint64_t>(std::max(0.0, ground_m) / 0.6) + 1;
                double end_scale = 1.0 + 0.25 * (hashed_unit(sc_.seed, 0xE1C0 + ti, g_bucket,
                                                             static_cast<uint64_t>(channel_)) -
                                                 0.5);
                double lo2, hi2;
                in_footprint =
                    target_span_at(t, ping, sc_.along_m_per_ping(), lo2, hi2, end_scale);
            }
            if (in_footprint) {
                v = sc_.bg_floor + t.highlight_gain * falloff(ground_m) * speckle(ping, ground_m);
            } else if (t.shadow_m > 0 && ground_m > hi &&
                       ground_m <= t.center_ground_m + t.across_m / 2.0 + t.shadow_m) {
                // A shadow slab behind the silhouette: the contact edge keeps
                // the raggedness, the far end is flat.
                in_shadow = true;
            }
        }
        if (in_shadow) v = sc_.bg_floor;  // zero intensity plus floor
        return v;
    }


private:
    int channel_side_int() const {
        return channel_ == 0 ? static_cast<int>(ChannelSide::Port)
                             : static_cast<int>(ChannelSide::Starboard);
    }

    double knot(int64_t kr, int64_t kc) const {
        double u = hashed_unit(sc_.seed, static_cast<uint64_t>(channel_ + 1),
                               static_cast<uint64_t>(kr + 1), static_cast<uint64_t>(kc + 1));
        return rayleigh_from_unit(u, sc_.bg_sigma);
    }

    double speckle(int ping, double ground_m) const {
        double bin_m = sc_.ground_max_m() / sc_.samples_per_ping;
        double fr = static_cast<double>(ping) / sc_.speckle_cell_along_pings;
        double fc = ground_m / bin_m / cell_across_bins_;
        int64_t r0 = static_cast<int64_t>(std::floor(fr));
        int64_t c0 = static_cast<int64_t>(std::floor(fc));
        double ar = fr - static_cast<double>(r0);
        double ac = fc - static_cast<double>(c0);
        double v00 = knot(r0, c0), v01 = knot(r0, c0 + 1);
        double v10 = knot(r0 + 1, c0), v11 = knot(r0 + 1, c0 + 1);
        double top = v00 + ac * (v01 - v00);
        double bot = v10 + ac * (v11 - v10);
        return top + ar * (bot - top);
    }

    const SurveyScenario& sc_;
    int channel_;
    double cell_across_bins_;
};

}  // namespace detail

inline XtfFileHeader make_header(const SurveyScenario& sc) {
    XtfFileHeader h;
    h.system_type = 1;
    h.sonar_name = "seascan-synth";
    h.sonar_type = 0;
    h.nav_units = 3;
    ChannelInfo port;
    port.side = ChannelSide::Port;
    port.type_byte = 1;
    port.bytes_per_sample = static_cast<uint8_t>(sc.bytes_per_sample);
    port.samples_per_ping_hint = static_cast<uint32_t>(sc.samples_per_ping);
    port.name = "port";
    port.tilt_angle_deg = 30.f;
    ChannelInfo stbd = port;
    stbd.side = ChannelSide::Starboard;
    stbd.type_byte = 2;
    stbd.name = "starboard";
    h.channels = {port, stbd};
    return h;
}

inline LatLon track_position(const SurveyScenario& sc, double ping_index) {
    return offset_position({sc.start_lat, sc.start_lon}, sc.heading_deg,
                           ping_index * sc.along_m_per_ping());
}

// Generates the survey: ping sequence in stream order (port then starboard per
// transmit) plus the georeferenced ground-truth objects. Per-ping content
// depends only on (seed, ping, channel), never on generation order.
inline std::pair<std::vector<SonarPing>, std::vector<GeoObject>> gen_survey(
    const SurveyScenario& sc) {
    sc.validate();
    const int n = sc.samples_per_ping;
    const double s_max = sc.slant_range_max_m;
    const double h = sc.altitude_m;
    const double g_max = sc.ground_max_m();
    const double sample_scale = sc.bytes_per_sample == 2 ? 257.0 : 1.0;
    const double sample_max = sc.bytes_per_sample == 2 ? 65535.0 : 255.0;
    const int64_t ping_period_us = static_cast<int64_t>(std::llround(1e6 / sc.ping_rate_hz));

    std::vector<SonarPing> pings;
    pings.reserve(static_cast<size_t>(sc.ping_count) * 2);
    detail::GroundField fields[2] = {{sc, 0}, {sc, 1}};
    for (int i = 0; i < sc.ping_count; ++i) {
        // Timestamps snap to centiseconds, the XTF native resolution.
        int64_t t = sc.start_time_us + i * ping_period_us;
        t -= t % 10000;
        std::optional<NavFix> nav;
        if (i % sc.nav_stride == 0) {
            LatLon pos = track_position(sc, i);
            nav = NavFix{pos.lat, pos.lon, static_cast<float>(sc.heading_deg), t};
        }
        for (int ch = 0; ch < 2; ++ch) {
            SonarPing p;
            p.ping_number = static_cast<uint32_t>(i);
            p.timestamp_us = t;
            p.channel = static_cast<uint16_t>(ch);
            p.slant_range_max_m = static_cast<float>(s_max);
            p.sensor_altitude_m = static_cast<float>(h);
            p.sound_velocity_mps = static_cast<float>(sc.sound_velocity_mps);
            p.nav = nav;
            p.tilt_angle_deg = 30.f;
            p.samples.resize(static_cast<size_t>(n));
            for (int j = 0; j < n; ++j) {
                double s = static_cast<double>(j) * s_max / n;
                double v;
                if (s < h) {
                    v = sc.bg_floor;  // water column: no return above the floor
                } else {
                    double g = std::sqrt(s * s - h * h);
                    v = fields[ch].value(i, std::min(g, g_max));
                    if (sc.first_return_band_m > 0 && s < h + sc.first_return_band_m) {
                        // Specular first return; the quadratic fade keeps the
                        // junction with the diffuse field smooth.
                        double w = 1.0 - (s - h) / sc.first_return_band_m;
                        w *= w;
                        v = w * (sc.bg_floor + 5.0 * sc.bg_sigma) + (1.0 - w) * v;
                    }
                }
                double q = std::clamp(std::round(v * sample_scale), 0.0, sample_max);
                p.samples[static_cast<size_t>(j)] = static_cast<uint16_t>(q);
            }
            pings.push_back(std::move(p));
        }
    }

    // Ground truth, georeferenced through the same pixel math the pipeline uses.
    std::vector<RowNav> rows(static_cast<size_t>(sc.ping_count));
    for (int i = 0; i < sc.ping_count; ++i) {
        LatLon pos = track_position(sc, i);
        int64_t t = sc.start_time_us + i * ping_period_us;
        t -= t % 10000;
        rows[static_cast<size_t>(i)] = {static_cast<uint32_t>(i), t,
                                        NavFix{pos.lat, pos.lon,
                                               static_cast<float>(sc.heading_deg), t},
                                        false};
    }
    const double gpc = g_max / n;
    std::vector<GeoObject> truth;
    for (size_t ti = 0; ti < sc.targets.size(); ++ti) {
        const auto& t = sc.targets[ti];
        PixelGeoContext ctx;
        ctx.rows = rows;
        ctx.ground_range_per_col = gpc;
        ctx.side = t.side;
        ctx.source = sc.name;
        GeoObject obj;
        obj.object_id = static_cast<int>(ti);
        obj.pixel_row = t.center_ping;
        obj.pixel_col = t.center_ground_m / gpc;
        obj.position = pixel_to_geo(t.center_ping, obj.pixel_col, ctx);
        obj.extent_along_m = t.along_m;
        obj.extent_across_m = t.across_m;
        obj.channel = t.side;
        int half_along = static_cast<int>(std::ceil(t.along_m / 2.0 / sc.along_m_per_ping()));
        obj.ping_first = static_cast<uint32_t>(std::max(0, t.center_ping - half_along));
        obj.ping_last = static_cast<uint32_t>(
            std::min(sc.ping_count - 1, t.center_ping + half_along));
        obj.feature_count = 0;
        obj.source = sc.name;
        obj.detected_at_us = rows[static_cast<size_t>(t.center_ping)].timestamp_us;
        truth.push_back(std::move(obj));
    }
    return {std::move(pings), std::move(truth)};
}

// Serializes pings as an XTF byte stream (header + one sonar record per
// transmit). Consecutive pings sharing a ping_number form one record.
inline std::vector<uint8_t> xtf_bytes(const XtfFileHeader& header,
                                      std::span<const SonarPing> pings) {
    std::vector<uint8_t> out = encode_file_header(header);
    size_t i = 0;
    while (i < pings.size()) {
        PingBatch batch;
        uint32_t pn = pings[i].ping_number;
        while (i < pings.size() && pings[i].ping_number == pn &&
               batch.size() < header.channels.size()) {
            batch.push_back(pings[i]);
            ++i;
        }
        auto rec = encode_ping_packet(header, batch);
        out.insert(out.end(), rec.begin(), rec.end());
    }
    return out;
}

inline void write_xtf(const XtfFileHeader& header, std::span<const SonarPing> pings,
                      const std::string& path) {
    auto bytes = xtf_bytes(header, pings);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

// Truth sidecar written next to the XTF as {name}.truth.geojson.
inline void write_truth_sidecar(const std::vector<GeoObject>& truth, const std::string& xtf_path) {
    std::string path = xtf_path;
    auto dot = path.rfind(".xtf");
    if (dot != std::string::npos) path = path.substr(0, dot);
    write_catalog(truth, CatalogFormat::GeoJson, path + ".truth.geojson");
}

}  // namespace seascan

#endif  // SEASCAN_SYNTH_HPP

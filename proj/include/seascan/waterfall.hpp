#ifndef SEASCAN_WATERFALL_HPP
#define SEASCAN_WATERFALL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "seascan/image.hpp"
#include "seascan/xtf.hpp"

namespace seascan {

struct WaterColumnSample : std::domain_error {
    using std::domain_error::domain_error;
};
struct DegenerateGeometry : std::domain_error {
    using std::domain_error::domain_error;
};

// Ground range from slant range: sqrt(slant^2 - h^2).
inline double slant_to_ground(double d_slant, double h) {
    if (d_slant < h)
        throw WaterColumnSample("slant " + std::to_string(d_slant) + " m is above the bottom (h=" +
                                std::to_string(h) + " m)");
    return std::sqrt(d_slant * d_slant - h * h);
}

// Slant range from two-way travel time: c * t / 2.
inline double slant_from_twtt(double c_mps, double t_twtt_s) {
    if (!(c_mps > 0)) throw std::invalid_argument("sound speed must be positive");
    if (t_twtt_s < 0) throw std::invalid_argument("two-way travel time must be non-negative");
    return c_mps * t_twtt_s / 2.0;
}

// Altitude from the first bottom return and the beam depression angle.
// Convention: tilt is depression from horizontal; roll shifts the effective
// depression on the ensonified side and is subtracted when present.
inline double altitude_from_geometry(double d_slant_first_m, double tilt_deg,
                                     std::optional<double> roll_deg = std::nullopt) {
    double depression = tilt_deg - roll_deg.value_or(0.0);
    if (!(depression > 0.0) || !(depression < 90.0))
        throw DegenerateGeometry("depression angle " + std::to_string(depression) +
                                 " deg outside (0, 90)");
    return d_slant_first_m * std::sin(depression * M_PI / 180.0);
}

struct SlantGeometry {
    double altitude_m = 0.0;
    double slant_max_m = 0.0;
    double sound_velocity_mps = 1500.0;
    int n_samples = 0;

    bool degenerate() const { return !(slant_max_m > altitude_m); }
    double ground_max_m() const {
        return std::sqrt(slant_max_m * slant_max_m - altitude_m * altitude_m);
    }
    double ground_range_per_bin() const { return ground_max_m() / n_samples; }
};

// Slant-range correction of one ping. Output bin k sits at ground range
// k*G/n and takes the linearly interpolated input intensity at slant
// sqrt(g^2 + h^2); the water column (slant < h) never maps to an output bin.
// Degenerate geometry yields an all-zero row (the caller flags it).
inline std::vector<float> correct_ping(std::span<const float> samples, const SlantGeometry& geom) {
    const int n = geom.n_samples;
    if (static_cast<int>(samples.size()) != n)
        throw std::invalid_argument("sample count does not match geometry");
    std::vector<float> out(static_cast<size_t>(n), 0.f);
    if (geom.degenerate() || n == 0) return out;
    const double h = geom.altitude_m;
    const double s_max = geom.slant_max_m;
    const double g_max = geom.ground_max_m();
    const double bins_per_m = n / s_max;
    for (int k = 0; k < n; ++k) {
        double g = static_cast<double>(k) * g_max / n;
        double s = std::sqrt(g * g + h * h);
        double x = s * bins_per_m;
        int i0 = static_cast<int>(x);
        if (i0 >= n - 1) {
            out[static_cast<size_t>(k)] = samples[static_cast<size_t>(n - 1)];
            continue;
        }
        double f = x - i0;
        float a = samples[static_cast<size_t>(i0)];
        float b = samples[static_cast<size_t>(i0 + 1)];
        out[static_cast<size_t>(k)] = static_cast<float>(a + f * (b - a));
    }
    return out;
}

// 256-bin CDF histogram equalization, in place. Single-valued images are left
// unchanged. The mapping is monotone and hits 0 and 255 whenever at least two
// distinct values are present.
inline void equalize(std::span<uint8_t> pixels) {
    if (pixels.empty()) return;
    size_t hist[256] = {};
    for (uint8_t v : pixels) hist[v]++;
    size_t cdf[256];
    size_t acc = 0;
    for (int i = 0; i < 256; ++i) {
        acc += hist[i];
        cdf[i] = acc;
    }
    size_t cdf_min = 0;
    for (int i = 0; i < 256; ++i)
        if (hist[i]) {
            cdf_min = cdf[i];
            break;
        }
    const size_t n = pixels.size();
    if (cdf_min == n) return;  // single-valued
    uint8_t lut[256];
    const double denom = static_cast<double>(n - cdf_min);
    for (int i = 0; i < 256; ++i) {
        double v = 255.0 * (static_cast<double>(cdf[i]) - static_cast<double>(cdf_min)) / denom;
        lut[i] = static_cast<uint8_t>(std::llround(std::clamp(v, 0.0, 255.0)));
    }
    for (auto& p : pixels) p = lut[p];
}

struct WaterfallTile {
    ChannelSide side = ChannelSide::Other;
    int rows = 0;
    int cols = 0;
    std::vector<uint8_t> px;         // corrected + equalized
    std::vector<uint8_t> corrected;  // pre-equalization copy, kept for debug dumps
    std::vector<uint32_t> ping_number_of_row;
    double ground_range_per_col = 0.0;
    int64_t tile_origin_row = 0;
    int overlap_rows = 0;
    bool equalized = true;
    int degenerate_rows = 0;

    uint8_t at(int r, int c) const { return px[static_cast<size_t>(r) * cols + c]; }
    GrayView view() const { return {px.data(), rows, cols, cols}; }
    GrayView corrected_view() const { return {corrected.data(), rows, cols, cols}; }
};

struct AltitudeEstimate {
    double h = 0.0;
    bool low_confidence = false;
};

// First sample exceeding 3x the median of the ping's leading 10%.
inline int first_bottom_return_index(std::span<const uint16_t> samples) {
    size_t lead = std::max<size_t>(1, samples.size() / 10);
    std::vector<uint16_t> head(samples.begin(), samples.begin() + static_cast<ptrdiff_t>(lead));
    std::nth_element(head.begin(), head.begin() + static_cast<ptrdiff_t>(head.size() / 2),
                     head.end());
    double median = head[head.size() / 2];
    double threshold = 3.0 * median;
    for (size_t i = 0; i < samples.size(); ++i)
        if (samples[i] > threshold) return static_cast<int>(i);
    return -1;
}

// Altitude source priority: the sensor's own value, then beam-geometry from
// the first return, then the first return slant itself (nadir distance).
inline AltitudeEstimate resolve_altitude(const SonarPing& ping) {
    if (ping.sensor_altitude_m && *ping.sensor_altitude_m > 0.f)
        return {static_cast<double>(*ping.sensor_altitude_m), false};
    int idx = first_bottom_return_index(ping.samples);
    if (idx < 0 || ping.samples.empty()) return {0.0, true};
    double first_slant =
        static_cast<double>(idx) * ping.slant_range_max_m / static_cast<double>(ping.samples.size());
    double tilt = ping.tilt_angle_deg;
    if (tilt > 0.f && tilt < 90.f) {
        std::optional<double> roll;
        if (ping.roll_angle_deg != 0.f) roll = ping.roll_angle_deg;
        try {
            return {altitude_from_geometry(first_slant, tilt, roll), false};
        } catch (const DegenerateGeometry&) {
            // fall through to the nadir heuristic
        }
    }
    return {first_slant, true};
}

// 16-bit samples are scaled to the 8-bit pipeline range before correction.
inline std::vector<float> samples_as_float(const SonarPing& ping, uint8_t bytes_per_sample) {
    std::vector<float> out(ping.samples.size());
    if (bytes_per_sample == 2) {
        for (size_t i = 0; i < out.size(); ++i)
            out[i] = static_cast<float>(ping.samples[i]) * 255.f / 65535.f;
    } else {
        for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(ping.samples[i]);
    }
    return out;
}

// Builds overlapping tiles from one channel's ping sequence. Correction is
// per ping, equalization per tile. Consecutive tiles share exactly
// overlap_rows rows; a short final tile covers the remainder.
inline std::vector<WaterfallTile> build_tiles(std::span<const SonarPing> pings, ChannelSide side,
                                              uint8_t bytes_per_sample, int tile_rows,
                                              int overlap_rows, bool do_equalize = true,
                                              int64_t base_row = 0) {
    if (!(tile_rows > overlap_rows) || overlap_rows < 0)
        throw std::invalid_argument("tile_rows must exceed overlap_rows >= 0");
    std::vector<WaterfallTile> tiles;
    const int total = static_cast<int>(pings.size());
    if (total == 0) return tiles;
    const int cols = static_cast<int>(pings.front().samples.size());
    const int stride = tile_rows - overlap_rows;

    // Rows are corrected once and shared by the overlapping tiles.
    std::vector<std::vector<uint8_t>> rows8(static_cast<size_t>(total));
    std::vector<double> row_gpc(static_cast<size_t>(total), 0.0);
    std::vector<bool> row_degenerate(static_cast<size_t>(total), false);
    for (int i = 0; i < total; ++i) {
        const SonarPing& p = pings[static_cast<size_t>(i)];
        SlantGeometry geom;
        geom.altitude_m = resolve_altitude(p).h;
        geom.slant_max_m = p.slant_range_max_m;
        geom.sound_velocity_mps = p.sound_velocity_mps;
        geom.n_samples = static_cast<int>(p.samples.size());
        std::vector<float> raw = samples_as_float(p, bytes_per_sample);
        if (static_cast<int>(raw.size()) != cols) raw.resize(static_cast<size_t>(cols), 0.f);
        if (geom.n_samples != cols) geom.n_samples = cols;
        std::vector<float> corrected = correct_ping(raw, geom);
        auto& r8 = rows8[static_cast<size_t>(i)];
        r8.resize(static_cast<size_t>(cols));
        for (int c = 0; c < cols; ++c)
            r8[static_cast<size_t>(c)] = static_cast<uint8_t>(
                std::llround(std::clamp(corrected[static_cast<size_t>(c)], 0.f, 255.f)));
        row_degenerate[static_cast<size_t>(i)] = geom.degenerate();
        row_gpc[static_cast<size_t>(i)] = geom.degenerate() ? 0.0 : geom.ground_range_per_bin();
    }

    for (int origin = 0; origin < total; origin += stride) {
        if (origin > 0 && origin + overlap_rows >= total) break;  // tail fully covered already
        int nrows = std::min(tile_rows, total - origin);
        WaterfallTile tile;
        tile.side = side;
        tile.rows = nrows;
        tile.cols = cols;
        tile.tile_origin_row = base_row + origin;
        tile.overlap_rows = overlap_rows;
        tile.equalized = do_equalize;
        tile.px.resize(static_cast<size_t>(nrows) * cols);
        tile.ping_number_of_row.resize(static_cast<size_t>(nrows));
        std::vector<double> gpcs;
        for (int r = 0; r < nrows; ++r) {
            const auto& src = rows8[static_cast<size_t>(origin + r)];
            std::copy(src.begin(), src.end(), tile.px.begin() + static_cast<ptrdiff_t>(r) * cols);
            tile.ping_number_of_row[static_cast<size_t>(r)] =
                pings[static_cast<size_t>(origin + r)].ping_number;
            if (row_degenerate[static_cast<size_t>(origin + r)])
                tile.degenerate_rows++;
            else
                gpcs.push_back(row_gpc[static_cast<size_t>(origin + r)]);
        }
        if (!gpcs.empty()) {
            std::nth_element(gpcs.begin(), gpcs.begin() + static_cast<ptrdiff_t>(gpcs.size() / 2),
                             gpcs.end());
            tile.ground_range_per_col = gpcs[gpcs.size() / 2];
        }
        tile.corrected = tile.px;
        if (do_equalize) equalize(tile.px);
        tiles.push_back(std::move(tile));
        if (origin + nrows >= total) break;
    }
    return tiles;
}

}  // namespace seascan

#endif  // SEASCAN_WATERFALL_HPP

#ifndef SEASCAN_FAST_HPP
#define SEASCAN_FAST_HPP

#include <algorithm>
#include <cstdint>
#include <vector>

#include "seascan/image.hpp"

namespace seascan {

enum class Detector : uint8_t { Fast, MserPlus, MserMinus };

inline const char* to_string(Detector d) {
    switch (d) {
        case Detector::Fast: return "fast";
        case Detector::MserPlus: return "mser+";
        default: return "mser-";
    }
}

struct FeaturePoint {
    int row = 0;
    int col = 0;
    Detector detector = Detector::Fast;
    double score = 0.0;

    bool operator==(const FeaturePoint&) const = default;
};

// 16-pixel Bresenham circle of radius 3, clockwise from 12 o'clock.
inline constexpr int kFastRingRow[16] = {-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3};
inline constexpr int kFastRingCol[16] = {0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1};

namespace detail {

// True if the 16-bit ring mask contains a circular run of at least arc_len set bits.
inline bool has_contiguous_arc(unsigned mask, int arc_len) {
    unsigned d = mask | (mask << 16);
    for (int k = 1; k < arc_len; ++k) d &= d >> 1;
    return (d & 0xFFFFu) != 0;
}

// Full segment test at threshold t for a pixel with ring values v[16].
inline bool segment_test(const uint8_t v[16], int p, int t, int arc_len) {
    unsigned bright = 0, dark = 0;
    const int hi = p + t, lo = p - t;
    for (int i = 0; i < 16; ++i) {
        bright |= static_cast<unsigned>(v[i] > hi) << i;
        dark |= static_cast<unsigned>(v[i] < lo) << i;
    }
    return has_contiguous_arc(bright, arc_len) || has_contiguous_arc(dark, arc_len);
}

}  // namespace detail

// Segment-test corners without non-maximum suppression, sorted by (row, col).
// score = largest threshold at which the test still passes.
inline std::vector<FeaturePoint> fast_segment_corners(const GrayView& img, int t, int arc_len = 9) {
    std::vector<FeaturePoint> out;
    if (img.rows < 7 || img.cols < 7 || t < 1) return out;
    ptrdiff_t off[16];
    for (int i = 0; i < 16; ++i) off[i] = kFastRingRow[i] * img.stride + kFastRingCol[i];
    // An arc of arc_len pixels covers at least this many of the 4 compass points.
    const int compass_need = (arc_len - 3 + 3) / 4;
    for (int r = 3; r < img.rows - 3; ++r) {
        const uint8_t* row = img.row(r);
        for (int c = 3; c < img.cols - 3; ++c) {
            const uint8_t* p = row + c;
            const int center = *p;
            const int hi = center + t, lo = center - t;
            // Compass pretest: cheap rejection only, never affects correctness.
            int nb = (p[off[0]] > hi) + (p[off[4]] > hi) + (p[off[8]] > hi) + (p[off[12]] > hi);
            int nd = (p[off[0]] < lo) + (p[off[4]] < lo) + (p[off[8]] < lo) + (p[off[12]] < lo);
            if (nb < compass_need && nd < compass_need) continue;
            uint8_t ring[16];
            for (int i = 0; i < 16; ++i) ring[i] = p[off[i]];
            if (!detail::segment_test(ring, center, t, arc_len)) continue;
            // Binary search for the largest passing threshold.
            int pass = t, fail = 256;
            while (fail - pass > 1) {
                int mid = (pass + fail) / 2;
                if (detail::segment_test(ring, center, mid, arc_len))
                    pass = mid;
                else
                    fail = mid;
            }
            out.push_back({r, c, Detector::Fast, static_cast<double>(pass)});
        }
    }
    return out;
}

// 3x3 non-maximum suppression. A corner survives unless an 8-neighbour corner
// has a higher score, or an equal score and an earlier (row, col) position.
inline std::vector<FeaturePoint> fast_nonmax_suppress(const std::vector<FeaturePoint>& corners,
                                                      int rows, int cols) {
    if (corners.empty()) return {};
    std::vector<double> score(static_cast<size_t>(rows) * cols, -1.0);
    for (const auto& f : corners) score[static_cast<size_t>(f.row) * cols + f.col] = f.score;
    std::vector<FeaturePoint> kept;
    kept.reserve(corners.size());
    for (const auto& f : corners) {
        bool suppressed = false;
        for (int dr = -1; dr <= 1 && !suppressed; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc == 0) continue;
                int nr = f.row + dr, nc = f.col + dc;
                if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
                double s = score[static_cast<size_t>(nr) * cols + nc];
                if (s > f.score ||
                    (s == f.score && (nr < f.row || (nr == f.row && nc < f.col)))) {
                    suppressed = true;
                    break;
                }
            }
        }
        if (!suppressed) kept.push_back(f);
    }
    return kept;
}

// FAST corner detection: full segment test plus 3x3 non-maximum suppression.
inline std::vector<FeaturePoint> fast_detect(const GrayView& img, int t, int arc_len = 9) {
    return fast_nonmax_suppress(fast_segment_corners(img, t, arc_len), img.rows, img.cols);
}

}  // namespace seascan

#endif  // SEASCAN_FAST_HPP

#ifndef SEASCAN_FEATURES_HPP
#define SEASCAN_FEATURES_HPP

#include <algorithm>
#include <vector>

#include "seascan/fast.hpp"
#include "seascan/image.hpp"
#include "seascan/mser.hpp"
#include "seascan/waterfall.hpp"

namespace seascan {

struct FeatureConfig {
    bool use_fast = true;
    bool use_mser = true;
    int fast_threshold = 20;
    int fast_arc_len = 9;
    int mser_delta = 5;
    int mser_min_area = 30;
    double mser_max_area_frac = 0.01;
    double mser_max_variation = 0.5;
};

inline MserParams mser_params_for(const FeatureConfig& cfg, size_t pixel_count) {
    MserParams p;
    p.delta = cfg.mser_delta;
    p.min_area = cfg.mser_min_area;
    p.max_area = std::max(cfg.mser_min_area + 1,
                          static_cast<int>(cfg.mser_max_area_frac * static_cast<double>(pixel_count)));
    p.max_variation = cfg.mser_max_variation;
    return p;
}

// Feature cloud of one equalized tile view: FAST corners plus one centroid per
// MSER region, sorted by (row, col).
inline std::vector<FeaturePoint> detect_features(const GrayView& img, const FeatureConfig& cfg) {
    std::vector<FeaturePoint> cloud;
    if (cfg.use_fast) cloud = fast_detect(img, cfg.fast_threshold, cfg.fast_arc_len);
    if (cfg.use_mser) {
        auto regions = mser_detect(img, mser_params_for(cfg, img.pixel_count()));
        for (const auto& region : regions) cloud.push_back(region_centroid(region, img.cols));
    }
    std::sort(cloud.begin(), cloud.end(), [](const FeaturePoint& a, const FeaturePoint& b) {
        if (a.row != b.row) return a.row < b.row;
        if (a.col != b.col) return a.col < b.col;
        return a.detector < b.detector;
    });
    return cloud;
}

inline std::vector<FeaturePoint> detect_features(const WaterfallTile& tile,
                                                 const FeatureConfig& cfg) {
    return detect_features(tile.view(), cfg);
}

// Debug overlay mirroring the detector output: FAST red, MSER centroids green.
inline ImageRgb render_feature_overlay(const GrayView& img,
                                       const std::vector<FeaturePoint>& cloud) {
    ImageRgb out(img.rows, img.cols);
    for (int r = 0; r < img.rows; ++r)
        for (int c = 0; c < img.cols; ++c) {
            uint8_t v = img.at(r, c);
            out.set(r, c, v, v, v);
        }
    auto mark = [&](int r, int c, uint8_t red, uint8_t green, uint8_t blue) {
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc)
                if ((dr == 0 || dc == 0) && out.in_bounds(r + dr, c + dc))
                    out.set(r + dr, c + dc, red, green, blue);
    };
    for (const auto& f : cloud) {
        if (f.detector == Detector::Fast)
            mark(f.row, f.col, 255, 0, 0);
        else
            mark(f.row, f.col, 0, 255, 0);
    }
    return out;
}

}  // namespace seascan

#endif  // SEASCAN_FEATURES_HPP

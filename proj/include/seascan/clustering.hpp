#ifndef SEASCAN_CLUSTERING_HPP
#define SEASCAN_CLUSTERING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "seascan/fast.hpp"
#include "seascan/image.hpp"

namespace seascan {

struct DbscanParams {
    double eps = 40.0;  // pixels, Euclidean
    int min_pts = 5;    // neighbours within eps, self included

    void validate() const {
        if (!(eps > 0)) throw std::invalid_argument("dbscan.eps must be > 0");
        if (min_pts < 1) throw std::invalid_argument("dbscan.min_pts must be >= 1");
    }
};

inline constexpr int kNoise = -1;

namespace detail {

// Uniform grid with cell size eps; neighbour queries touch at most 9 cells.
class PointGrid {
public:
    PointGrid(const std::vector<FeaturePoint>& pts, double eps) : pts_(pts), eps_(eps) {
        cells_.reserve(pts.size());
        for (size_t i = 0; i < pts.size(); ++i)
            cells_[key(pts[i].row, pts[i].col)].push_back(static_cast<int>(i));
    }

    // Indexes within eps (inclusive), sorted by (row, col, index) scan order.
    std::vector<int> query(int idx) const {
        const auto& p = pts_[static_cast<size_t>(idx)];
        std::vector<int> out;
        const double e2 = eps_ * eps_;
        int cr = cell_of(p.row), cc = cell_of(p.col);
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                auto it = cells_.find(pack(cr + dr, cc + dc));
                if (it == cells_.end()) continue;
                for (int j : it->second) {
                    const auto& q = pts_[static_cast<size_t>(j)];
                    double drow = q.row - p.row, dcol = q.col - p.col;
                    if (drow * drow + dcol * dcol <= e2) out.push_back(j);
                }
            }
        std::sort(out.begin(), out.end(), [&](int a, int b) {
            const auto& pa = pts_[static_cast<size_t>(a)];
            const auto& pb = pts_[static_cast<size_t>(b)];
            if (pa.row != pb.row) return pa.row < pb.row;
            if (pa.col != pb.col) return pa.col < pb.col;
            return a < b;
        });
        return out;
    }

private:
    int cell_of(double v) const { return static_cast<int>(std::floor(v / eps_)); }
    static int64_t pack(int r, int c) {
        return (static_cast<int64_t>(r) << 32) ^ (static_cast<uint32_t>(c));
    }
    int64_t key(int r, int c) const { return pack(cell_of(r), cell_of(c)); }

    const std::vector<FeaturePoint>& pts_;
    double eps_;
    std::unordered_map<int64_t, std::vector<int>> cells_;
};

}  // namespace detail

// Classical DBSCAN over pixel coordinates. Returns one label per input point:
// a cluster id >= 0 or kNoise. Points are processed in (row, col) scan order,
// which pins the border-point assignment ambiguity.
inline std::vector<int> dbscan(const std::vector<FeaturePoint>& points,
                               const DbscanParams& params) {
    params.validate();
    const int n = static_cast<int>(points.size());
    constexpr int kUndefined = -2;
    std::vector<int> labels(static_cast<size_t>(n), kUndefined);
    if (n == 0) return labels;
    detail::PointGrid grid(points, params.eps);

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& pa = points[static_cast<size_t>(a)];
        const auto& pb = points[static_cast<size_t>(b)];
        if (pa.row != pb.row) return pa.row < pb.row;
        if (pa.col != pb.col) return pa.col < pb.col;
        return a < b;
    });

    int next_cluster = 0;
    for (int i : order) {
        if (labels[static_cast<size_t>(i)] != kUndefined) continue;
        std::vector<int> seeds = grid.query(i);
        if (static_cast<int>(seeds.size()) < params.min_pts) {
            labels[static_cast<size_t>(i)] = kNoise;
            continue;
        }
        const int cid = next_cluster++;
        labels[static_cast<size_t>(i)] = cid;
        for (size_t k = 0; k < seeds.size(); ++k) {
            int j = seeds[k];
            if (labels[static_cast<size_t>(j)] == kNoise)
                labels[static_cast<size_t>(j)] = cid;  // border point claimed
            if (labels[static_cast<size_t>(j)] != kUndefined) continue;
            labels[static_cast<size_t>(j)] = cid;
            std::vector<int> nbrs = grid.query(j);
            if (static_cast<int>(nbrs.size()) >= params.min_pts)
                seeds.insert(seeds.end(), nbrs.begin(), nbrs.end());
        }
    }
    for (auto& l : labels)
        if (l == kUndefined) l = kNoise;
    return labels;
}

struct RegionOfInterest {
    int cluster_id = 0;
    std::vector<FeaturePoint> members;
    double centroid_row = 0.0;
    double centroid_col = 0.0;
    int64_t row_min = 0, col_min = 0, row_max = 0, col_max = 0;  // padded, clamped
    int padding_applied = 0;
};

namespace detail {

inline void recompute_roi(RegionOfInterest& roi, int padding, int64_t rows, int64_t cols) {
    int64_t rmin = roi.members.front().row, rmax = rmin;
    int64_t cmin = roi.members.front().col, cmax = cmin;
    double sr = 0, sc = 0;
    for (const auto& m : roi.members) {
        rmin = std::min<int64_t>(rmin, m.row);
        rmax = std::max<int64_t>(rmax, m.row);
        cmin = std::min<int64_t>(cmin, m.col);
        cmax = std::max<int64_t>(cmax, m.col);
        sr += m.row;
        sc += m.col;
    }
    const double n = static_cast<double>(roi.members.size());
    roi.centroid_row = sr / n;
    roi.centroid_col = sc / n;
    roi.row_min = std::max<int64_t>(0, rmin - padding);
    roi.col_min = std::max<int64_t>(0, cmin - padding);
    roi.row_max = std::min<int64_t>(rows - 1, rmax + padding);
    roi.col_max = std::min<int64_t>(cols - 1, cmax + padding);
    roi.padding_applied = padding;
}

inline double roi_iou(const RegionOfInterest& a, const RegionOfInterest& b) {
    int64_t ir0 = std::max(a.row_min, b.row_min), ir1 = std::min(a.row_max, b.row_max);
    int64_t ic0 = std::max(a.col_min, b.col_min), ic1 = std::min(a.col_max, b.col_max);
    if (ir1 < ir0 || ic1 < ic0) return 0.0;
    double inter = static_cast<double>(ir1 - ir0 + 1) * static_cast<double>(ic1 - ic0 + 1);
    double area_a = static_cast<double>(a.row_max - a.row_min + 1) *
                    static_cast<double>(a.col_max - a.col_min + 1);
    double area_b = static_cast<double>(b.row_max - b.row_min + 1) *
                    static_cast<double>(b.col_max - b.col_min + 1);
    return inter / (area_a + area_b - inter);
}

}  // namespace detail

// One padded ROI per non-noise cluster; centroid is the unweighted member
// mean, bbox the member extent padded and clamped to the image bounds.
inline std::vector<RegionOfInterest> clusters_to_rois(const std::vector<FeaturePoint>& points,
                                                      const std::vector<int>& labels, int padding,
                                                      int64_t rows, int64_t cols) {
    if (points.size() != labels.size())
        throw std::invalid_argument("labels/points size mismatch");
    std::unordered_map<int, RegionOfInterest> by_id;
    for (size_t i = 0; i < points.size(); ++i) {
        if (labels[i] == kNoise) continue;
        auto& roi = by_id[labels[i]];
        roi.cluster_id = labels[i];
        roi.members.push_back(points[i]);
    }
    std::vector<RegionOfInterest> rois;
    rois.reserve(by_id.size());
    for (auto& [id, roi] : by_id) {
        detail::recompute_roi(roi, padding, rows, cols);
        rois.push_back(std::move(roi));
    }
    std::sort(rois.begin(), rois.end(), [](const RegionOfInterest& a, const RegionOfInterest& b) {
        return a.cluster_id < b.cluster_id;
    });
    return rois;
}

// Transitively merges ROIs whose padded boxes overlap with IoU above the
// threshold, repeating until no pair qualifies, so the result is a fixpoint
// (hence idempotent). Intended for global-coordinate ROIs from overlapping
// tiles.
inline std::vector<RegionOfInterest> merge_rois(std::vector<RegionOfInterest> rois,
                                                double iou_threshold, int64_t rows, int64_t cols) {
    bool merged_any = true;
    while (merged_any && rois.size() > 1) {
        merged_any = false;
        std::vector<int> uf(rois.size());
        std::iota(uf.begin(), uf.end(), 0);
        auto find = [&](int x) {
            while (uf[static_cast<size_t>(x)] != x) {
                uf[static_cast<size_t>(x)] = uf[static_cast<size_t>(uf[static_cast<size_t>(x)])];
                x = uf[static_cast<size_t>(x)];
            }
            return x;
        };
        for (size_t i = 0; i < rois.size(); ++i)
            for (size_t j = i + 1; j < rois.size(); ++j)
                if (detail::roi_iou(rois[i], rois[j]) > iou_threshold) {
                    int a = find(static_cast<int>(i)), b = find(static_cast<int>(j));
                    if (a != b) {
                        uf[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
                        merged_any = true;
                    }
                }
        if (!merged_any) break;
        std::unordered_map<int, RegionOfInterest> groups;
        for (size_t i = 0; i < rois.size(); ++i) {
            int root = find(static_cast<int>(i));
            auto& dst = groups[root];
            if (dst.members.empty()) {
                dst.cluster_id = rois[i].cluster_id;
                dst.padding_applied = rois[i].padding_applied;
            } else {
                dst.cluster_id = std::min(dst.cluster_id, rois[i].cluster_id);
                dst.padding_applied = std::max(dst.padding_applied, rois[i].padding_applied);
            }
            dst.members.insert(dst.members.end(), rois[i].members.begin(), rois[i].members.end());
        }
        std::vector<RegionOfInterest> next;
        next.reserve(groups.size());
        for (auto& [root, roi] : groups) {
            detail::recompute_roi(roi, roi.padding_applied, rows, cols);
            next.push_back(std::move(roi));
        }
        rois = std::move(next);
    }
    std::sort(rois.begin(), rois.end(), [](const RegionOfInterest& a, const RegionOfInterest& b) {
        if (a.row_min != b.row_min) return a.row_min < b.row_min;
        if (a.col_min != b.col_min) return a.col_min < b.col_min;
        return a.cluster_id < b.cluster_id;
    });
    return rois;
}

// Debug overlay: white ROI boxes, green clustered features, red noise.
inline ImageRgb render_roi_overlay(const GrayView& img, const std::vector<FeaturePoint>& points,
                                   const std::vector<int>& labels,
                                   const std::vector<RegionOfInterest>& rois) {
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
    for (size_t i = 0; i < points.size(); ++i) {
        if (labels[i] == kNoise)
            mark(points[i].row, points[i].col, 255, 0, 0);
        else
            mark(points[i].row, points[i].col, 0, 255, 0);
    }
    for (const auto& roi : rois) {
        for (int64_t c = roi.col_min; c <= roi.col_max; ++c) {
            if (out.in_bounds(static_cast<int>(roi.row_min), static_cast<int>(c)))
                out.set(static_cast<int>(roi.row_min), static_cast<int>(c), 255, 255, 255);
            if (out.in_bounds(static_cast<int>(roi.row_max), static_cast<int>(c)))
                out.set(static_cast<int>(roi.row_max), static_cast<int>(c), 255, 255, 255);
        }
        for (int64_t r = roi.row_min; r <= roi.row_max; ++r) {
            if (out.in_bounds(static_cast<int>(r), static_cast<int>(roi.col_min)))
                out.set(static_cast<int>(r), static_cast<int>(roi.col_min), 255, 255, 255);
            if (out.in_bounds(static_cast<int>(r), static_cast<int>(roi.col_max)))
                out.set(static_cast<int>(r), static_cast<int>(roi.col_max), 255, 255, 255);
        }
    }
    return out;
}

}  // namespace seascan

#endif  // SEASCAN_CLUSTERING_HPP

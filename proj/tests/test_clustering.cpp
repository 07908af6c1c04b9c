#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "oracles.hpp"
#include "seascan/clustering.hpp"
#include "seascan/rng.hpp"

using namespace seascan;

namespace {

FeaturePoint pt(int r, int c) { return {r, c, Detector::Fast, 1.0}; }

std::vector<FeaturePoint> random_points(uint64_t seed, int n, int extent) {
    Xoshiro256 rng(seed);
    std::vector<FeaturePoint> pts;
    pts.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        pts.push_back(pt(rng.range(0, extent - 1), rng.range(0, extent - 1)));
    return pts;
}

// Blob of points within the given radius around a centre.
void add_blob(std::vector<FeaturePoint>& pts, Xoshiro256& rng, int r0, int c0, int radius,
              int count) {
    for (int i = 0; i < count; ++i)
        pts.push_back(pt(r0 + rng.range(-radius, radius), c0 + rng.range(-radius, radius)));
}

// Labels agree up to a cluster-id permutation.
bool partitions_equal(const std::vector<int>& a, const std::vector<int>& b,
                      const std::vector<bool>& mask) {
    std::map<int, int> fwd, rev;
    for (size_t i = 0; i < a.size(); ++i) {
        if (!mask[i]) continue;
        if (a[i] == kNoise || b[i] == kNoise) {
            if (a[i] != b[i]) return false;
            continue;
        }
        auto f = fwd.find(a[i]);
        auto r = rev.find(b[i]);
        if (f == fwd.end() && r == rev.end()) {
            fwd[a[i]] = b[i];
            rev[b[i]] = a[i];
        } else if (f == fwd.end() || r == rev.end() || f->second != b[i] || r->second != a[i]) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("a lone point cannot be core") {
    auto labels = dbscan({pt(10, 10)}, {40.0, 2});
    REQUIRE(labels.size() == 1);
    CHECK(labels[0] == kNoise);
}

TEST_CASE("two separated blobs form two clusters with no noise") {
    Xoshiro256 rng(31);
    std::vector<FeaturePoint> pts;
    add_blob(pts, rng, 100, 100, 5, 30);
    add_blob(pts, rng, 100, 600, 5, 30);
    auto labels = dbscan(pts, {40.0, 5});
    std::set<int> ids(labels.begin(), labels.end());
    CHECK(ids.size() == 2);
    CHECK(ids.count(kNoise) == 0);
    // first 30 together, last 30 together
    for (int i = 1; i < 30; ++i) CHECK(labels[static_cast<size_t>(i)] == labels[0]);
    for (int i = 31; i < 60; ++i) CHECK(labels[static_cast<size_t>(i)] == labels[30]);
    CHECK(labels[0] != labels[30]);
}

TEST_CASE("sparse uniform points are almost entirely noise") {
    int noise_total = 0, n_total = 0;
    for (uint64_t seed = 1; seed <= 50; ++seed) {
        auto pts = random_points(seed, 200, 2048);
        auto labels = dbscan(pts, {10.0, 8});
        for (int l : labels) noise_total += l == kNoise;
        n_total += 200;
    }
    CHECK(noise_total >= n_total * 95 / 100);
}

TEST_CASE("labels match the quadratic reference on random point sets") {
    for (uint64_t seed = 1; seed <= 50; ++seed) {
        Xoshiro256 rng(seed * 977);
        int n = 50 + static_cast<int>(rng.below(450));
        std::vector<FeaturePoint> pts;
        int blobs = rng.range(0, 6);
        for (int b = 0; b < blobs; ++b)
            add_blob(pts, rng, rng.range(50, 1950), rng.range(50, 1950), rng.range(3, 30),
                     rng.range(5, 40));
        while (static_cast<int>(pts.size()) < n)
            pts.push_back(pt(rng.range(0, 2000), rng.range(0, 2000)));
        DbscanParams params{static_cast<double>(rng.range(10, 60)), rng.range(3, 8)};

        auto fast_labels = dbscan(pts, params);
        auto ref_labels = oracles::dbscan_reference(pts, params.eps, params.min_pts);
        auto core = oracles::dbscan_core_points(pts, params.eps, params.min_pts);

        INFO("seed " << seed << " n " << pts.size() << " eps " << params.eps << " min_pts "
                     << params.min_pts);
        // Core-point partition identical (up to label permutation).
        REQUIRE(partitions_equal(fast_labels, ref_labels, core));
        // Noise agrees pointwise and satisfies the definition.
        for (size_t i = 0; i < pts.size(); ++i) {
            CHECK((fast_labels[i] == kNoise) == (ref_labels[i] == kNoise));
            if (fast_labels[i] == kNoise) CHECK_FALSE(core[i]);
        }
        // Cluster count bound.
        std::set<int> ids;
        for (int l : fast_labels)
            if (l != kNoise) ids.insert(l);
        CHECK(static_cast<int>(ids.size()) <=
              static_cast<int>(pts.size()) / params.min_pts);
    }
}

TEST_CASE("core partition is invariant under input permutation") {
    Xoshiro256 rng(77);
    std::vector<FeaturePoint> pts;
    add_blob(pts, rng, 200, 200, 20, 40);
    add_blob(pts, rng, 500, 500, 25, 35);
    for (int i = 0; i < 60; ++i) pts.push_back(pt(rng.range(0, 900), rng.range(0, 900)));
    DbscanParams params{30.0, 5};
    auto base = dbscan(pts, params);
    auto core = oracles::dbscan_core_points(pts, params.eps, params.min_pts);

    auto shuffled = pts;
    std::vector<size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), size_t{0});
    for (size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    for (size_t i = 0; i < perm.size(); ++i) shuffled[i] = pts[perm[i]];
    auto shuffled_labels = dbscan(shuffled, params);
    std::vector<int> unshuffled(pts.size());
    for (size_t i = 0; i < perm.size(); ++i) unshuffled[perm[i]] = shuffled_labels[i];
    CHECK(partitions_equal(base, unshuffled, core));
}

// ---------------------------------------------------------------------------
// ROIs
// ---------------------------------------------------------------------------

TEST_CASE("cluster to ROI arithmetic") {
    std::vector<FeaturePoint> pts = {pt(100, 100), pt(110, 120)};
    std::vector<int> labels = {0, 0};
    auto rois = clusters_to_rois(pts, labels, 20, 1000, 1000);
    REQUIRE(rois.size() == 1);
    CHECK(rois[0].row_min == 80);
    CHECK(rois[0].col_min == 80);
    CHECK(rois[0].row_max == 130);
    CHECK(rois[0].col_max == 140);
    CHECK(rois[0].centroid_row == 105.0);
    CHECK(rois[0].centroid_col == 110.0);
    CHECK(rois[0].members.size() == 2);
}

TEST_CASE("all-noise input yields no ROIs") {
    std::vector<FeaturePoint> pts = {pt(1, 1), pt(5, 5)};
    std::vector<int> labels = {kNoise, kNoise};
    CHECK(clusters_to_rois(pts, labels, 20, 100, 100).empty());
}

TEST_CASE("ROIs clamp to tile bounds") {
    std::vector<FeaturePoint> pts = {pt(3, 5), pt(10, 9)};
    std::vector<int> labels = {0, 0};
    auto rois = clusters_to_rois(pts, labels, 20, 100, 100);
    REQUIRE(rois.size() == 1);
    CHECK(rois[0].row_min == 0);
    CHECK(rois[0].col_min == 0);
    CHECK(rois[0].row_max == 30);
    CHECK(rois[0].col_max == 29);
}

TEST_CASE("bbox contains every member and count matches labels") {
    Xoshiro256 rng(55);
    auto pts = random_points(56, 300, 500);
    auto labels = dbscan(pts, {25.0, 4});
    auto rois = clusters_to_rois(pts, labels, 20, 500, 500);
    std::set<int> distinct;
    for (int l : labels)
        if (l != kNoise) distinct.insert(l);
    CHECK(rois.size() == distinct.size());
    for (const auto& roi : rois) {
        CHECK(roi.members.size() >= 1);
        for (const auto& m : roi.members) {
            CHECK(m.row >= roi.row_min);
            CHECK(m.row <= roi.row_max);
            CHECK(m.col >= roi.col_min);
            CHECK(m.col <= roi.col_max);
        }
    }
}

namespace {

RegionOfInterest make_roi(int r0, int c0, int r1, int c1) {
    RegionOfInterest roi;
    roi.members = {pt(r0 + 20, c0 + 20), pt(r1 - 20, c1 - 20)};
    roi.row_min = r0;
    roi.col_min = c0;
    roi.row_max = r1;
    roi.col_max = c1;
    roi.padding_applied = 20;
    return roi;
}

}  // namespace

TEST_CASE("identical ROIs from overlapping tiles merge to one") {
    auto a = make_roi(100, 100, 200, 200);
    auto merged = merge_rois({a, a}, 0.3, 10000, 10000);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].members.size() == 4);
}

TEST_CASE("disjoint ROIs stay separate") {
    auto merged = merge_rois({make_roi(0, 0, 50, 50), make_roi(500, 500, 600, 600)}, 0.3,
                             10000, 10000);
    CHECK(merged.size() == 2);
}

TEST_CASE("IoU chains merge transitively") {
    // A overlaps B, B overlaps C, A and C are disjoint.
    auto a = make_roi(100, 100, 200, 200);
    auto b = make_roi(100, 150, 200, 250);
    auto c = make_roi(100, 201, 200, 301);
    REQUIRE(seascan::detail::roi_iou(a, b) > 0.3);
    REQUIRE(seascan::detail::roi_iou(b, c) > 0.3);
    REQUIRE(seascan::detail::roi_iou(a, c) == 0.0);
    auto merged = merge_rois({a, b, c}, 0.3, 10000, 10000);
    CHECK(merged.size() == 1);
}

TEST_CASE("merge_rois is idempotent") {
    Xoshiro256 rng(91);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<RegionOfInterest> rois;
        int n = rng.range(2, 12);
        for (int i = 0; i < n; ++i) {
            int r0 = rng.range(0, 800), c0 = rng.range(0, 800);
            rois.push_back(make_roi(r0, c0, r0 + rng.range(60, 200), c0 + rng.range(60, 200)));
        }
        auto once = merge_rois(rois, 0.3, 10000, 10000);
        auto twice = merge_rois(once, 0.3, 10000, 10000);
        REQUIRE(once.size() == twice.size());
        for (size_t i = 0; i < once.size(); ++i) {
            CHECK(once[i].row_min == twice[i].row_min);
            CHECK(once[i].col_min == twice[i].col_min);
            CHECK(once[i].row_max == twice[i].row_max);
            CHECK(once[i].col_max == twice[i].col_max);
            CHECK(once[i].members.size() == twice[i].members.size());
        }
    }
}

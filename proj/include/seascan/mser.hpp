#ifndef SEASCAN_MSER_HPP
#define SEASCAN_MSER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "seascan/fast.hpp"
#include "seascan/image.hpp"

namespace seascan {

struct MserParams {
    int delta = 5;
    int min_area = 30;
    int max_area = 0;  // pixels; callers usually derive it from a tile-area fraction
    double max_variation = 0.5;

    void validate() const {
        if (delta < 1) throw std::invalid_argument("mser.delta must be >= 1");
        if (!(0 < min_area && min_area < max_area))
            throw std::invalid_argument("mser requires 0 < min_area < max_area");
    }
};

struct MserRegion {
    std::vector<int32_t> pixels;  // linear indexes, row * cols + col
    bool dark = true;             // true: MSER- (dark region), false: MSER+ (bright)
    double stability = 0.0;       // variation q at the emitted level; lower is more stable
    int level = 0;
};

namespace detail {

// Threshold-sweep component tree over 4-connectivity, built with union-find.
// Components carry a run-length area history and a pixel chain so that the
// region at any level of a branch can be recovered as a chain prefix.
class MserSweep {
public:
    MserSweep(const uint8_t* data, int rows, int cols) : rows_(rows), cols_(cols) {
        const int n = rows * cols;
        parent_.assign(static_cast<size_t>(n), -1);
        comp_of_.assign(static_cast<size_t>(n), -1);
        next_px_.assign(static_cast<size_t>(n), -1);
        // Counting sort into 256 buckets keeps (row, col) order within a level.
        std::vector<int> count(257, 0);
        for (int i = 0; i < n; ++i) count[data[i] + 1]++;
        for (int v = 0; v < 256; ++v) count[v + 1] += count[v];
        order_.resize(static_cast<size_t>(n));
        bucket_start_ = count;
        std::vector<int> cursor(count.begin(), count.end() - 1);
        for (int i = 0; i < n; ++i) order_[static_cast<size_t>(cursor[data[i]]++)] = i;
    }

    void run(const MserParams& params, bool dark, std::vector<MserRegion>& out) {
        build();
        extract(params, dark, out);
    }

private:
    struct Comp {
        int32_t head = -1, tail = -1;
        int32_t parent_comp = -1;
        int area = 0;
        int16_t birth = 0;
        int16_t death = 256;  // level at which it merged away; 256 = survived
        bool dirty = false;
        std::vector<std::pair<int16_t, int32_t>> hist;  // (level, area) checkpoints
    };

    int find(int px) {
        int root = px;
        while (parent_[static_cast<size_t>(root)] != root) root = parent_[static_cast<size_t>(root)];
        while (parent_[static_cast<size_t>(px)] != root) {
            int up = parent_[static_cast<size_t>(px)];
            parent_[static_cast<size_t>(px)] = root;
            px = up;
        }
        return root;
    }

    void touch(int32_t cid) {
        if (!comps_[static_cast<size_t>(cid)].dirty) {
            comps_[static_cast<size_t>(cid)].dirty = true;
            dirty_.push_back(cid);
        }
    }

    void merge(int root_a, int root_b, int level) {
        if (root_a == root_b) return;
        int32_t ca = comp_of_[static_cast<size_t>(root_a)];
        int32_t cb = comp_of_[static_cast<size_t>(root_b)];
        Comp& a = comps_[static_cast<size_t>(ca)];
        Comp& b = comps_[static_cast<size_t>(cb)];
        // Survivor: larger area, then earlier birth, then lower id.
        bool a_wins = a.area != b.area ? a.area > b.area
                      : a.birth != b.birth ? a.birth < b.birth
                                           : ca < cb;
        int32_t cs = a_wins ? ca : cb;
        int32_t cl = a_wins ? cb : ca;
        int root_s = a_wins ? root_a : root_b;
        int root_l = a_wins ? root_b : root_a;
        Comp& survivor = comps_[static_cast<size_t>(cs)];
        Comp& loser = comps_[static_cast<size_t>(cl)];
        parent_[static_cast<size_t>(root_l)] = root_s;
        loser.death = static_cast<int16_t>(level);
        loser.parent_comp = cs;
        next_px_[static_cast<size_t>(survivor.tail)] = loser.head;
        survivor.tail = loser.tail;
        survivor.area += loser.area;
        touch(cs);
    }

    void build() {
        for (int level = 0; level < 256; ++level) {
            for (int i = bucket_start_[static_cast<size_t>(level)];
                 i < bucket_start_[static_cast<size_t>(level) + 1]; ++i) {
                const int px = order_[static_cast<size_t>(i)];
                parent_[static_cast<size_t>(px)] = px;
                comp_of_[static_cast<size_t>(px)] = static_cast<int32_t>(comps_.size());
                Comp c;
                c.head = c.tail = px;
                c.area = 1;
                c.birth = static_cast<int16_t>(level);
                comps_.push_back(std::move(c));
                touch(comp_of_[static_cast<size_t>(px)]);
                const int r = px / cols_, cc = px % cols_;
                const int nbr[4] = {r > 0 ? px - cols_ : -1, cc > 0 ? px - 1 : -1,
                                    cc + 1 < cols_ ? px + 1 : -1, r + 1 < rows_ ? px + cols_ : -1};
                for (int q : nbr) {
                    if (q < 0 || parent_[static_cast<size_t>(q)] < 0) continue;
                    int ra = find(px), rb = find(q);
                    if (ra != rb) merge(ra, rb, level);
                }
            }
            for (int32_t cid : dirty_) {
                Comp& c = comps_[static_cast<size_t>(cid)];
                c.dirty = false;
                if (c.death != 256) continue;  // merged away during this level
                if (c.hist.empty() || c.hist.back().second != c.area)
                    c.hist.push_back({static_cast<int16_t>(level), c.area});
            }
            dirty_.clear();
        }
    }

    // Area of the branch's region at a given level, following parents once the
    // branch has merged away.
    struct Cursor {
        int32_t comp;
        size_t hist_idx = 0;
    };

    int32_t area_at(Cursor& cur, int level) const {
        while (level >= comps_[static_cast<size_t>(cur.comp)].death) {
            cur.comp = comps_[static_cast<size_t>(cur.comp)].parent_comp;
            cur.hist_idx = 0;
        }
        const auto& hist = comps_[static_cast<size_t>(cur.comp)].hist;
        while (cur.hist_idx + 1 < hist.size() && hist[cur.hist_idx + 1].first <= level)
            cur.hist_idx++;
        return hist[cur.hist_idx].second;
    }

    void extract(const MserParams& params, bool dark, std::vector<MserRegion>& out) const {
        std::vector<double> q;
        for (size_t ci = 0; ci < comps_.size(); ++ci) {
            const Comp& c = comps_[ci];
            if (c.hist.empty()) continue;  // born and merged within one level
            const int last = std::min<int>(c.death - 1, 255);
            if (last < c.birth) continue;
            const int span = last - c.birth + 1;
            q.assign(static_cast<size_t>(span), 0.0);
            Cursor cur_plus{static_cast<int32_t>(ci)};
            Cursor cur_minus{static_cast<int32_t>(ci)};
            Cursor cur_self{static_cast<int32_t>(ci)};
            for (int li = 0; li < span; ++li) {
                const int level = c.birth + li;
                int plus_level = std::min(level + params.delta, 255);
                int minus_level = std::max(level - params.delta, static_cast<int>(c.birth));
                double plus = area_at(cur_plus, plus_level);
                double minus = area_at(cur_minus, minus_level);
                double self = area_at(cur_self, level);
                q[static_cast<size_t>(li)] = (plus - minus) / self;
            }
            // Plateau local minima of q are candidates; the branch emits its
            // single most stable one. Quantization makes q oscillate, so one
            // visual region produces several nested near-duplicates otherwise.
            bool have_best = false;
            int best_level = 0;
            int32_t best_area = 0;
            double best_q = 0.0;
            int i = 0;
            while (i < span) {
                int j = i;
                while (j + 1 < span && q[static_cast<size_t>(j + 1)] == q[static_cast<size_t>(i)])
                    j++;
                bool left_ok = i == 0 || q[static_cast<size_t>(i - 1)] > q[static_cast<size_t>(i)];
                bool right_ok =
                    j == span - 1 || q[static_cast<size_t>(j + 1)] > q[static_cast<size_t>(i)];
                if (left_ok && right_ok && q[static_cast<size_t>(i)] <= params.max_variation) {
                    Cursor cs{static_cast<int32_t>(ci)};
                    int32_t area = area_at(cs, c.birth + i);
                    if (area >= params.min_area && area <= params.max_area &&
                        (!have_best || q[static_cast<size_t>(i)] < best_q)) {
                        have_best = true;
                        best_level = c.birth + i;
                        best_area = area;
                        best_q = q[static_cast<size_t>(i)];
                    }
                }
                i = j + 1;
            }
            if (have_best) {
                MserRegion region;
                region.dark = dark;
                region.stability = best_q;
                region.level = best_level;
                region.pixels.reserve(static_cast<size_t>(best_area));
                int32_t px = c.head;
                for (int32_t k = 0; k < best_area; ++k) {
                    region.pixels.push_back(px);
                    px = next_px_[static_cast<size_t>(px)];
                }
                out.push_back(std::move(region));
            }
        }
    }

    int rows_, cols_;
    std::vector<int> parent_;
    std::vector<int32_t> comp_of_;
    std::vector<int32_t> next_px_;
    std::vector<int> order_;
    std::vector<int> bucket_start_;
    std::vector<Comp> comps_;
    std::vector<int32_t> dirty_;
};

}  // namespace detail

// Dark-region sweep of a contiguous intensity buffer.
inline std::vector<MserRegion> mser_sweep_dark(const uint8_t* data, int rows, int cols,
                                               const MserParams& params) {
    params.validate();
    std::vector<MserRegion> out;
    if (rows <= 0 || cols <= 0) return out;
    detail::MserSweep sweep(data, rows, cols);
    sweep.run(params, true, out);
    return out;
}

// MSER detection, both polarities: MSER- from the image itself, MSER+ from its
// inversion. Pixel sets are 4-connected by construction.
inline std::vector<MserRegion> mser_detect(const GrayView& img, const MserParams& params) {
    params.validate();
    std::vector<MserRegion> out;
    if (img.rows <= 0 || img.cols <= 0) return out;
    std::vector<uint8_t> buf(img.pixel_count());
    for (int r = 0; r < img.rows; ++r)
        std::copy_n(img.row(r), img.cols, buf.begin() + static_cast<ptrdiff_t>(r) * img.cols);
    {
        detail::MserSweep sweep(buf.data(), img.rows, img.cols);
        sweep.run(params, true, out);
    }
    for (auto& v : buf) v = static_cast<uint8_t>(255 - v);
    {
        detail::MserSweep sweep(buf.data(), img.rows, img.cols);
        sweep.run(params, false, out);
    }
    return out;
}

// Unweighted centroid of a region, rounded half-up to the nearest pixel.
inline FeaturePoint region_centroid(const MserRegion& region, int cols) {
    if (region.pixels.empty()) throw std::invalid_argument("empty region");
    double sr = 0, sc = 0;
    for (int32_t px : region.pixels) {
        sr += px / cols;
        sc += px % cols;
    }
    const double n = static_cast<double>(region.pixels.size());
    FeaturePoint f;
    f.row = static_cast<int>(std::floor(sr / n + 0.5));
    f.col = static_cast<int>(std::floor(sc / n + 0.5));
    f.detector = region.dark ? Detector::MserMinus : Detector::MserPlus;
    f.score = region.stability;
    return f;
}

}  // namespace seascan

#endif  // SEASCAN_MSER_HPP

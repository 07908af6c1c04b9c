#ifndef SEASCAN_PIPELINE_HPP
#define SEASCAN_PIPELINE_HPP

#include <deque>
#include <functional>
#include <future>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "seascan/clustering.hpp"
#include "seascan/config.hpp"
#include "seascan/features.hpp"
#include "seascan/georef.hpp"
#include "seascan/waterfall.hpp"
#include "seascan/xtf.hpp"

namespace seascan {

struct TileReport {
    const WaterfallTile* tile = nullptr;
    const std::vector<FeaturePoint>* features = nullptr;   // tile coordinates
    const std::vector<int>* labels = nullptr;               // parallel to features
    const std::vector<RegionOfInterest>* rois = nullptr;    // tile coordinates
};

struct DetectOptions {
    PipelineConfig cfg;
    std::string source_name = "input";
    bool live_events = false;          // also forces synchronous per-tile processing
    std::ostream* event_out = nullptr;
    XtfReader::WarnFn warn;
    std::function<void(const TileReport&)> on_tile;  // called in tile order
};

struct DetectResult {
    std::vector<GeoObject> objects;              // emission order; ids assigned in this order
    std::vector<int64_t> emission_watermark;     // channel rows ingested when each object emitted
    std::vector<int64_t> last_member_row;        // last feature row per object
    XtfReader::Stats reader_stats;
    uint64_t ping_cycles = 0;
    uint64_t tiles = 0;
    uint64_t feature_points = 0;
    bool truncated = false;
};

namespace detail {

struct TileWork {
    WaterfallTile tile;
    std::vector<FeaturePoint> features;          // tile coordinates
    std::vector<int> labels;
    std::vector<RegionOfInterest> tile_rois;     // tile coordinates
    std::vector<RegionOfInterest> global_rois;   // translated via tile_origin_row
    int channel = 0;
};

inline FeatureConfig feature_config_of(const PipelineConfig& cfg) {
    FeatureConfig fc;
    fc.use_fast = cfg.detector_fast;
    fc.use_mser = cfg.detector_mser;
    fc.fast_threshold = cfg.fast.threshold;
    fc.fast_arc_len = cfg.fast.arc_len;
    fc.mser_delta = cfg.mser.delta;
    fc.mser_min_area = cfg.mser.min_area;
    fc.mser_max_area_frac = cfg.mser.max_area_frac;
    fc.mser_max_variation = cfg.mser.max_variation;
    return fc;
}

// Pure per-tile stage: features -> clustering -> padded ROIs -> global coords.
inline void process_tile(TileWork& work, const PipelineConfig& cfg) {
    const WaterfallTile& tile = work.tile;
    work.features = detect_features(tile, feature_config_of(cfg));
    DbscanParams dp{cfg.dbscan.eps, cfg.dbscan.min_pts};
    work.labels = dbscan(work.features, dp);
    work.tile_rois =
        clusters_to_rois(work.features, work.labels, cfg.roi.padding, tile.rows, tile.cols);
    work.global_rois = work.tile_rois;
    for (auto& roi : work.global_rois) {
        roi.row_min += tile.tile_origin_row;
        roi.row_max += tile.tile_origin_row;
        roi.centroid_row += static_cast<double>(tile.tile_origin_row);
        for (auto& m : roi.members) m.row += static_cast<int>(tile.tile_origin_row);
    }
}

struct ChannelState {
    int channel_index = 0;
    ChannelSide side = ChannelSide::Other;
    uint8_t bytes_per_sample = 1;
    std::vector<SonarPing> pending;  // rows [base_row, rows_seen)
    int64_t base_row = 0;
    int64_t rows_seen = 0;
    int64_t next_origin = 0;
    std::vector<NavFix> fixes;
    std::vector<RowNav> rows_nav;    // grows to cover every cut tile row
    std::vector<RegionOfInterest> open_rois;
    double ground_range_per_col = 0.0;
    int64_t cols = 0;
};

}  // namespace detail

// Incremental detection engine shared by file and stream inputs. Tiles are cut
// as soon as their rows (plus overlap context) have arrived, processed by a
// bounded pool, and applied in cut order, so results are identical to a fully
// sequential run.
class DetectEngine {
public:
    // Row clamp used while the survey length is still unknown; vertical ROI
    // clamping to real bounds happened per tile already.
    static constexpr int64_t kRowBound = int64_t{1} << 60;

    DetectEngine(const DetectOptions& opts) : o_(opts) { o_.cfg.validate(); }

    DetectResult run(ByteSource& src) {
        XtfReader reader(src);
        if (o_.warn) reader.set_warn(o_.warn);
        const XtfFileHeader& hdr = reader.header();
        channels_.clear();
        for (size_t i = 0; i < hdr.channels.size(); ++i) {
            if (!channel_selected(o_.cfg.channels, hdr.channels[i].side)) continue;
            detail::ChannelState st;
            st.channel_index = static_cast<int>(i);
            st.side = hdr.channels[i].side;
            st.bytes_per_sample = hdr.channels[i].bytes_per_sample;
            channels_.push_back(std::move(st));
        }
        try {
            for (;;) {
                auto pkt = reader.next();
                if (!pkt) break;
                if (auto* batch = std::get_if<PingBatch>(&*pkt)) {
                    result_.ping_cycles++;
                    for (auto& ping : *batch) ingest(std::move(ping));
                }
            }
        } catch (const TruncatedPacket& e) {
            result_.truncated = true;
            if (o_.warn) o_.warn("truncated_packet", e.what(), e.offset);
        }
        for (auto& st : channels_) cut_tail(st);
        drain_all();
        for (auto& st : channels_) {
            final_merge(st);
            finalize_rois(st, kRowBound);  // end of stream: everything is final
        }
        result_.reader_stats = reader.stats();
        return std::move(result_);
    }

private:
    void ingest(SonarPing ping) {
        for (auto& st : channels_) {
            if (st.channel_index != ping.channel) continue;
            if (ping.nav)
                if (st.fixes.empty() || ping.nav->fix_time_us > st.fixes.back().fix_time_us)
                    st.fixes.push_back(*ping.nav);
            if (st.cols == 0) st.cols = static_cast<int64_t>(ping.samples.size());
            st.pending.push_back(std::move(ping));
            st.rows_seen++;
            while (st.rows_seen >= st.next_origin + o_.cfg.tile.rows) cut(st, o_.cfg.tile.rows);
            return;
        }
    }

    void cut(detail::ChannelState& st, int nrows) {
        fill_nav(st, st.next_origin + nrows);
        size_t offset = static_cast<size_t>(st.next_origin - st.base_row);
        std::span<const SonarPing> rows(st.pending.data() + offset, static_cast<size_t>(nrows));
        auto tiles = build_tiles(rows, st.side, st.bytes_per_sample, nrows, 0, true,
                                 st.next_origin);
        // A single-tile build: build_tiles with tile_rows == nrows yields one tile.
        detail::TileWork work;
        work.tile = std::move(tiles.front());
        work.tile.overlap_rows = o_.cfg.tile.overlap;
        work.channel = static_cast<int>(&st - channels_.data());
        submit(std::move(work));
        const int stride = o_.cfg.tile.rows - o_.cfg.tile.overlap;
        st.next_origin += stride;
        // Drop rows no future tile needs (a short tail tile ends the stream,
        // so the frontier may lie past the buffered rows).
        int64_t keep_from = std::min(st.next_origin, st.rows_seen);
        if (keep_from > st.base_row) {
            st.pending.erase(st.pending.begin(),
                             st.pending.begin() + static_cast<ptrdiff_t>(keep_from - st.base_row));
            st.base_row = keep_from;
        }
    }

    void cut_tail(detail::ChannelState& st) {
        int64_t remaining = st.rows_seen - st.next_origin;
        if (remaining <= 0) return;
        if (st.next_origin > 0 && st.next_origin + o_.cfg.tile.overlap >= st.rows_seen)
            return;  // tail rows are all overlap, already covered
        cut(st, static_cast<int>(remaining));
    }

    void fill_nav(detail::ChannelState& st, int64_t up_to_row) {
        size_t offset = static_cast<size_t>(st.base_row);
        while (static_cast<int64_t>(st.rows_nav.size()) < up_to_row) {
            int64_t row = static_cast<int64_t>(st.rows_nav.size());
            const SonarPing& p = st.pending[static_cast<size_t>(row) - offset];
            RowNav rn;
            rn.ping_number = p.ping_number;
            rn.timestamp_us = p.timestamp_us;
            if (p.nav) {
                rn.nav = p.nav;
            } else if (st.fixes.size() >= 2) {
                auto [fix, extrapolated] = interpolate_fix(st.fixes, p.timestamp_us);
                rn.nav = fix;
                rn.extrapolated = extrapolated;
            }
            st.rows_nav.push_back(std::move(rn));
        }
    }

    void submit(detail::TileWork work) {
        const PipelineConfig& cfg = o_.cfg;
        if (o_.live_events || cfg.workers <= 1) {
            detail::process_tile(work, cfg);
            apply(std::move(work));
            return;
        }
        inflight_.push_back(std::async(std::launch::async, [work = std::move(work), &cfg]() mutable {
            detail::process_tile(work, cfg);
            return std::move(work);
        }));
        while (static_cast<int>(inflight_.size()) >= cfg.workers) apply_front();
    }

    void apply_front() {
        detail::TileWork work = inflight_.front().get();
        inflight_.pop_front();
        apply(std::move(work));
    }

    void drain_all() {
        while (!inflight_.empty()) apply_front();
    }

    void apply(detail::TileWork work) {
        result_.tiles++;
        result_.feature_points += work.features.size();
        detail::ChannelState& st = channels_[static_cast<size_t>(work.channel)];
        if (work.tile.ground_range_per_col > 0) st.ground_range_per_col = work.tile.ground_range_per_col;
        if (o_.on_tile) {
            TileReport report{&work.tile, &work.features, &work.labels, &work.tile_rois};
            o_.on_tile(report);
        }
        if (!work.global_rois.empty()) {
            st.open_rois.insert(st.open_rois.end(), work.global_rois.begin(),
                                work.global_rois.end());
            st.open_rois = merge_rois(std::move(st.open_rois), o_.cfg.roi.merge_iou, kRowBound,
                                      st.cols ? st.cols : 1);
        }
        // Future tiles of this channel start at the applied tile's origin plus
        // one stride; anything entirely above that line can no longer merge.
        int64_t applied_frontier =
            work.tile.tile_origin_row + (o_.cfg.tile.rows - o_.cfg.tile.overlap);
        finalize_rois(st, applied_frontier);
    }

    void final_merge(detail::ChannelState& st) {
        if (!st.open_rois.empty())
            st.open_rois = merge_rois(std::move(st.open_rois), o_.cfg.roi.merge_iou, kRowBound,
                                      st.cols ? st.cols : 1);
    }

    void finalize_rois(detail::ChannelState& st, int64_t frontier) {
        std::vector<RegionOfInterest> still_open;
        for (auto& roi : st.open_rois) {
            if (roi.row_max >= frontier) {
                still_open.push_back(std::move(roi));
                continue;
            }
            emit(st, roi);
        }
        st.open_rois = std::move(still_open);
    }

    void emit(detail::ChannelState& st, const RegionOfInterest& roi) {
        PixelGeoContext ctx;
        ctx.rows = st.rows_nav;
        ctx.ground_range_per_col = st.ground_range_per_col;
        ctx.side = st.side;
        ctx.layback_along_m = o_.cfg.georef.layback_along;
        ctx.layback_across_m = o_.cfg.georef.layback_across;
        ctx.source = o_.source_name;
        GeoObject obj = roi_to_object(roi, ctx);
        obj.object_id = static_cast<int>(result_.objects.size());
        int64_t last_member = roi.members.empty() ? roi.row_max : roi.members.front().row;
        for (const auto& m : roi.members) last_member = std::max<int64_t>(last_member, m.row);
        if (o_.live_events && o_.event_out) (*o_.event_out) << object_jsonl(obj) << "\n";
        result_.objects.push_back(std::move(obj));
        result_.emission_watermark.push_back(st.rows_seen);
        result_.last_member_row.push_back(last_member);
    }

    DetectOptions o_;
    std::vector<detail::ChannelState> channels_;
    std::deque<std::future<detail::TileWork>> inflight_;
    DetectResult result_;
};

inline DetectResult run_detect(ByteSource& src, const DetectOptions& opts) {
    DetectEngine engine(opts);
    return engine.run(src);
}

}  // namespace seascan

#endif  // SEASCAN_PIPELINE_HPP

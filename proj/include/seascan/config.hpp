#ifndef SEASCAN_CONFIG_HPP
#define SEASCAN_CONFIG_HPP

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "seascan/synth.hpp"
#include "seascan/xtf.hpp"

namespace seascan {

struct ConfigError : std::runtime_error {
    std::string field;
    ConfigError(std::string f, const std::string& msg)
        : std::runtime_error(f + ": " + msg), field(std::move(f)) {}
};

enum class ChannelFilter { All, Port, Starboard };

inline bool channel_selected(ChannelFilter f, ChannelSide side) {
    if (side == ChannelSide::Other) return false;
    if (f == ChannelFilter::All) return true;
    return (f == ChannelFilter::Port) == (side == ChannelSide::Port);
}

struct PipelineConfig {
    struct {
        int threshold = 20;
        int arc_len = 9;
    } fast;
    struct {
        int delta = 5;
        int min_area = 30;
        double max_area_frac = 0.01;
        double max_variation = 0.5;
    } mser;
    struct {
        double eps = 40.0;
        int min_pts = 5;
    } dbscan;
    struct {
        int padding = 20;
        double merge_iou = 0.3;
    } roi;
    struct {
        int rows = 512;
        int overlap = 128;
    } tile;
    struct {
        double layback_along = 0.0;
        double layback_across = 0.0;
    } georef;
    ChannelFilter channels = ChannelFilter::All;
    bool detector_fast = true;
    bool detector_mser = true;
    int workers = 4;

    void validate() const {
        if (fast.threshold < 1) throw ConfigError("fast.threshold", "must be >= 1");
        if (fast.arc_len < 9 || fast.arc_len > 16)
            throw ConfigError("fast.arc_len", "must be in [9, 16]");
        if (mser.delta < 1) throw ConfigError("mser.delta", "must be >= 1");
        if (mser.min_area < 1) throw ConfigError("mser.min_area", "must be >= 1");
        if (!(mser.max_area_frac > 0.0 && mser.max_area_frac <= 1.0))
            throw ConfigError("mser.max_area_frac", "must be in (0, 1]");
        if (!(mser.max_variation > 0.0)) throw ConfigError("mser.max_variation", "must be > 0");
        if (!(dbscan.eps > 0.0)) throw ConfigError("dbscan.eps", "must be > 0");
        if (dbscan.min_pts < 1) throw ConfigError("dbscan.min_pts", "must be >= 1");
        if (roi.padding < 0) throw ConfigError("roi.padding", "must be >= 0");
        if (!(roi.merge_iou >= 0.0 && roi.merge_iou < 1.0))
            throw ConfigError("roi.merge_iou", "must be in [0, 1)");
        if (tile.overlap < 0) throw ConfigError("tile.overlap", "must be >= 0");
        if (tile.rows <= tile.overlap) throw ConfigError("tile.rows", "must exceed tile.overlap");
        if (workers < 1 || workers > 64) throw ConfigError("pipeline.workers", "must be in [1, 64]");
        if (!detector_fast && !detector_mser)
            throw ConfigError("pipeline.detectors", "at least one detector must be enabled");
    }
};

// ---------------------------------------------------------------------------
// INI-style parsing: [section] headers, key = value, '#'/';' comments.
// ---------------------------------------------------------------------------

struct ConfigEntry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
    bool section_start = false;  // marks the [section] line itself
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<ConfigEntry> parse_ini(const std::string& text) {
    std::vector<ConfigEntry> entries;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno), "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            entries.push_back({section, "", "", lineno, true});
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno), "expected key = value");
        ConfigEntry e;
        e.section = section;
        e.key = trim(line.substr(0, eq));
        e.value = trim(line.substr(eq + 1));
        e.line = lineno;
        if (e.key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
        entries.push_back(std::move(e));
    }
    return entries;
}

inline double to_double(const ConfigEntry& e) {
    try {
        size_t used = 0;
        double v = std::stod(e.value, &used);
        if (used != e.value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(e.section + "." + e.key, "not a number: '" + e.value + "'");
    }
}

inline int to_int(const ConfigEntry& e) {
    int v = 0;
    auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc() || p != e.value.data() + e.value.size())
        throw ConfigError(e.section + "." + e.key, "not an integer: '" + e.value + "'");
    return v;
}

inline uint64_t to_u64(const ConfigEntry& e) {
    uint64_t v = 0;
    auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc() || p != e.value.data() + e.value.size())
        throw ConfigError(e.section + "." + e.key, "not an unsigned integer: '" + e.value + "'");
    return v;
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace detail

inline PipelineConfig parse_pipeline_config(const std::string& text) {
    PipelineConfig cfg;
    for (const auto& e : detail::parse_ini(text)) {
        if (e.section_start) {
            if (e.section != "fast" && e.section != "mser" && e.section != "dbscan" &&
                e.section != "roi" && e.section != "tile" && e.section != "georef" &&
                e.section != "pipeline")
                throw ConfigError(e.section, "unknown section");
            continue;
        }
        const std::string field = e.section + "." + e.key;
        if (e.section == "fast") {
            if (e.key == "threshold") cfg.fast.threshold = detail::to_int(e);
            else if (e.key == "arc_len") cfg.fast.arc_len = detail::to_int(e);
            else throw ConfigError(field, "unknown key");
        } else if (e.section == "mser") {
            if (e.key == "delta") cfg.mser.delta = detail::to_int(e);
            else if (e.key == "min_area") cfg.mser.min_area = detail::to_int(e);
            else if (e.key == "max_area_frac") cfg.mser.max_area_frac = detail::to_double(e);
            else if (e.key == "max_variation") cfg.mser.max_variation = detail::to_double(e);
            else throw ConfigError(field, "unknown key");
        } else if (e.section == "dbscan") {
            if (e.key == "eps") cfg.dbscan.eps = detail::to_double(e);
            else if (e.key == "min_pts") cfg.dbscan.min_pts = detail::to_int(e);
            else throw ConfigError(field, "unknown key");
        } else if (e.section == "roi") {
            if (e.key == "padding") cfg.roi.padding = detail::to_int(e);
            else if (e.key == "merge_iou") cfg.roi.merge_iou = detail::to_double(e);
            else throw ConfigError(field, "unknown key");
        } else if (e.section == "tile") {
            if (e.key == "rows") cfg.tile.rows = detail::to_int(e);
            else if (e.key == "overlap") cfg.tile.overlap = detail::to_int(e);
            else throw ConfigError(field, "unknown key");
        } else if (e.section == "georef") {
            if (e.key == "layback_along") cfg.georef.layback_along = detail::to_double(e);
            else if (e.key == "layback_across") cfg.georef.layback_across = detail::to_double(e);
            else throw ConfigError(field, "unknown key");
        } else if (e.section == "pipeline") {
            if (e.key == "channels") {
                if (e.value == "all") cfg.channels = ChannelFilter::All;
                else if (e.value == "port") cfg.channels = ChannelFilter::Port;
                else if (e.value == "starboard") cfg.channels = ChannelFilter::Starboard;
                else throw ConfigError(field, "expected all|port|starboard");
            } else if (e.key == "detectors") {
                cfg.detector_fast = e.value.find("fast") != std::string::npos;
                cfg.detector_mser = e.value.find("mser") != std::string::npos;
                if (!cfg.detector_fast && !cfg.detector_mser)
                    throw ConfigError(field, "expected a comma list of fast,mser");
            } else if (e.key == "workers") {
                cfg.workers = detail::to_int(e);
            } else {
                throw ConfigError(field, "unknown key");
            }
        } else {
            throw ConfigError(field.empty() ? e.key : field, "key outside a known section");
        }
    }
    cfg.validate();
    return cfg;
}

inline std::string dump_pipeline_config(const PipelineConfig& cfg) {
    std::ostringstream out;
    out << "[fast]\n";
    out << "threshold = " << cfg.fast.threshold << "\n";
    out << "arc_len = " << cfg.fast.arc_len << "\n\n";
    out << "[mser]\n";
    out << "delta = " << cfg.mser.delta << "\n";
    out << "min_area = " << cfg.mser.min_area << "\n";
    out << "max_area_frac = " << detail::fmt_double(cfg.mser.max_area_frac) << "\n";
    out << "max_variation = " << detail::fmt_double(cfg.mser.max_variation) << "\n\n";
    out << "[dbscan]\n";
    out << "eps = " << detail::fmt_double(cfg.dbscan.eps) << "\n";
    out << "min_pts = " << cfg.dbscan.min_pts << "\n\n";
    out << "[roi]\n";
    out << "padding = " << cfg.roi.padding << "\n";
    out << "merge_iou = " << detail::fmt_double(cfg.roi.merge_iou) << "\n\n";
    out << "[tile]\n";
    out << "rows = " << cfg.tile.rows << "\n";
    out << "overlap = " << cfg.tile.overlap << "\n\n";
    out << "[georef]\n";
    out << "layback_along = " << detail::fmt_double(cfg.georef.layback_along) << "\n";
    out << "layback_across = " << detail::fmt_double(cfg.georef.layback_across) << "\n\n";
    out << "[pipeline]\n";
    out << "channels = "
        << (cfg.channels == ChannelFilter::All
                ? "all"
                : cfg.channels == ChannelFilter::Port ? "port" : "starboard")
        << "\n";
    out << "detectors = "
        << (cfg.detector_fast && cfg.detector_mser ? "fast,mser"
            : cfg.detector_fast                    ? "fast"
                                                   : "mser")
        << "\n";
    out << "workers = " << cfg.workers << "\n";
    return out.str();
}

// Scenario files share the INI format; [target] sections may repeat.
inline SurveyScenario parse_scenario(const std::string& text) {
    SurveyScenario sc;
    TargetSpec* current_target = nullptr;
    for (const auto& e : detail::parse_ini(text)) {
        if (e.section_start) {
            if (e.section == "target") {
                sc.targets.emplace_back();
                current_target = &sc.targets.back();
            } else if (e.section != "survey" && e.section != "background" && e.section != "track") {
                throw ConfigError(e.section, "unknown section");
            }
            continue;
        }
        const std::string field = e.section + "." + e.key;
        if (e.section == "survey") {
            if (e.key == "seed") sc.seed = detail::to_u64(e);
            else if (e.key == "name") sc.name = e.value;
            else if (e.key == "ping_count") sc.ping_count = detail::to_int(e);
            else if (e.key == "samples_per_ping") sc.samples_per_ping = detail::to_int(e);
            else if (e.key == "slant_range_max") sc.slant_range_max_m = detail::to_double(e);
            else if (e.key == "altitude") sc.altitude_m = detail::to_double(e);
            else if (e.key == "sound_velocity") sc.sound_velocity_mps = detail::to_double(e);
            else if (e.key == "bytes_per_sample") sc.bytes_per_sample = detail::to_int(e);
            else if (e.key == "nav_stride") sc.nav_stride = detail::to_int(e);
            else throw ConfigError(field, "unknown key");
        } else if (e.section == "background") {
            if (e.key == "sigma") sc.bg_sigma = detail::to_double(e);
            else if (e.key == "floor") sc.bg_floor = detail::to_double(e);
            else if (e.key == "cell_across_m") sc.speckle_cell_across_m = detail::to_double(e);
            else if (e.key == "cell_along_pings") sc.speckle_cell_along_pings = detail::to_int(e);
            else throw ConfigError(field, "unknown key");
        } else if (e.section == "track") {
            if (e.key == "start_lat") sc.start_lat = detail::to_double(e);
            else if (e.key == "start_lon") sc.start_lon = detail::to_double(e);
            else if (e.key == "heading") sc.heading_deg = detail::to_double(e);
            else if (e.key == "speed") sc.speed_mps = detail::to_double(e);
            else if (e.key == "ping_rate") sc.ping_rate_hz = detail::to_double(e);
            else throw ConfigError(field, "unknown key");
        } else if (e.section == "target") {
            if (!current_target) throw ConfigError(field, "key before [target] header");
            TargetSpec& t = *current_target;
            if (e.key == "shape") {
                if (e.value == "rect") t.shape = TargetSpec::Shape::Rect;
                else if (e.value == "ellipse") t.shape = TargetSpec::Shape::Ellipse;
                else if (e.value == "line_rope") t.shape = TargetSpec::Shape::LineRope;
                else throw ConfigError(field, "expected rect|ellipse|line_rope");
            } else if (e.key == "ping") t.center_ping = detail::to_int(e);
            else if (e.key == "ground_range") t.center_ground_m = detail::to_double(e);
            else if (e.key == "side") {
                if (e.value == "port") t.side = ChannelSide::Port;
                else if (e.value == "starboard") t.side = ChannelSide::Starboard;
                else throw ConfigError(field, "expected port|starboard");
            } else if (e.key == "along_m") t.along_m = detail::to_double(e);
            else if (e.key == "across_m") t.across_m = detail::to_double(e);
            else if (e.key == "gain") t.highlight_gain = detail::to_double(e);
            else if (e.key == "shadow_m") t.shadow_m = detail::to_double(e);
            else throw ConfigError(field, "unknown key");
        } else {
            throw ConfigError(field.empty() ? e.key : field, "key outside a known section");
        }
    }
    sc.validate();
    return sc;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace seascan

#endif  // SEASCAN_CONFIG_HPP

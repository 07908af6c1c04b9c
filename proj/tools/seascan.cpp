// seascan: sidescan sonar object detection pipeline.
//
// Subcommands:
//   detect     run the full pipeline on an XTF file/stream, write the catalog
//   synth      generate a synthetic survey from a scenario file
//   info       summarize an XTF file
//   waterfall  dump corrected/equalized tiles (and optional overlays)

#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "seascan/config.hpp"
#include "seascan/georef.hpp"
#include "seascan/image.hpp"
#include "seascan/log.hpp"
#include "seascan/net.hpp"
#include "seascan/pipeline.hpp"
#include "seascan/synth.hpp"
#include "seascan/waterfall.hpp"
#include "seascan/xtf.hpp"

namespace fs = std::filesystem;
using namespace seascan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;

std::unique_ptr<ByteSource> open_source(const std::string& input, const std::string& live) {
    if (!live.empty()) {
        auto colon = live.rfind(':');
        if (colon == std::string::npos) throw XtfError("--live expects HOST:PORT");
        return std::make_unique<FdSource>(
            tcp_connect(live.substr(0, colon), live.substr(colon + 1)));
    }
    if (input == "-") return std::make_unique<IStreamSource>(std::cin);
    return std::make_unique<FileSource>(input);
}

std::string source_label(const std::string& input, const std::string& live) {
    if (!live.empty()) return "tcp:" + live;
    if (input == "-") return "stdin";
    return input;
}

std::string survey_name(const std::string& input, const std::string& live) {
    if (!live.empty() || input == "-") return "stream";
    return fs::path(input).stem().string();
}

PipelineConfig load_config(const std::string& path) {
    if (path.empty()) return PipelineConfig{};
    return parse_pipeline_config(read_text_file(path));
}

XtfReader::WarnFn stderr_warn() {
    return [](std::string_view event, std::string_view detail, uint64_t offset) {
        log_json("warn", event, {{"detail", std::string(detail)}, {"offset", offset}});
    };
}

enum class OverlayMode { None, Features, Rois };

int cmd_detect(const std::string& input, const std::string& live, const std::string& config_path,
               const std::string& out_dir, const std::string& format, OverlayMode overlay,
               const std::string& channels, bool dump_config) {
    PipelineConfig cfg;
    try {
        cfg = load_config(config_path);
        if (channels == "port") cfg.channels = ChannelFilter::Port;
        else if (channels == "starboard") cfg.channels = ChannelFilter::Starboard;
        else if (channels == "port,starboard" || channels == "starboard,port" ||
                 channels == "all" || channels.empty()) {
            if (!channels.empty()) cfg.channels = ChannelFilter::All;
        } else {
            throw ConfigError("channels", "expected a comma list of port,starboard");
        }
        cfg.validate();
    } catch (const ConfigError& e) {
        log_json("error", "invalid_config", {{"field", e.field}, {"detail", e.what()}});
        return kExitConfig;
    }
    if (dump_config) {
        std::cout << dump_pipeline_config(cfg);
        return kExitOk;
    }

    fs::create_directories(out_dir);
    std::string name = survey_name(input, live);

    DetectOptions opts;
    opts.cfg = cfg;
    opts.source_name = source_label(input, live);
    opts.live_events = !live.empty() || input == "-";
    opts.event_out = &std::cout;
    opts.warn = stderr_warn();
    if (overlay != OverlayMode::None) {
        opts.on_tile = [&](const TileReport& report) {
            const WaterfallTile& tile = *report.tile;
            std::string base = name + "_" + to_string(tile.side) + "_" +
                               std::to_string(tile.tile_origin_row);
            if (overlay == OverlayMode::Features) {
                auto img = render_feature_overlay(tile.view(), *report.features);
                write_ppm(fs::path(out_dir) / (base + "_features.ppm"), img);
            } else {
                auto img =
                    render_roi_overlay(tile.view(), *report.features, *report.labels, *report.rois);
                write_ppm(fs::path(out_dir) / (base + "_rois.ppm"), img);
            }
        };
    }

    DetectResult result;
    try {
        auto src = open_source(input, live);
        result = run_detect(*src, opts);
    } catch (const XtfError& e) {
        log_json("error", "unreadable_input", {{"detail", e.what()}});
        return kExitInput;
    }

    auto catalog = sorted_catalog(result.objects);
    if (format == "geojson" || format == "both")
        write_catalog(catalog, CatalogFormat::GeoJson, (fs::path(out_dir) / "catalog.geojson").string());
    if (format == "csv" || format == "both")
        write_catalog(catalog, CatalogFormat::Csv, (fs::path(out_dir) / "catalog.csv").string());
    log_json("info", "detect_done",
             {{"objects", result.objects.size()},
              {"ping_cycles", result.ping_cycles},
              {"tiles", result.tiles},
              {"features", result.feature_points},
              {"skipped_packets", result.reader_stats.skipped_unknown},
              {"resyncs", result.reader_stats.resyncs},
              {"truncated", result.truncated}});
    return kExitOk;
}

int cmd_synth(const std::string& scenario_path, const std::string& out_path, int64_t seed_override) {
    SurveyScenario sc;
    try {
        sc = parse_scenario(read_text_file(scenario_path));
        if (seed_override >= 0) sc.seed = static_cast<uint64_t>(seed_override);
        sc.validate();
    } catch (const ConfigError& e) {
        log_json("error", "invalid_config", {{"field", e.field}, {"detail", e.what()}});
        return kExitConfig;
    } catch (const ScenarioError& e) {
        log_json("error", "invalid_scenario", {{"detail", e.what()}});
        return kExitConfig;
    } catch (const std::runtime_error& e) {
        log_json("error", "unreadable_input", {{"detail", e.what()}});
        return kExitInput;
    }
    auto [pings, truth] = gen_survey(sc);
    write_xtf(make_header(sc), pings, out_path);
    write_truth_sidecar(truth, out_path);
    log_json("info", "synth_done",
             {{"path", out_path}, {"pings", sc.ping_count}, {"targets", sc.targets.size()},
              {"seed", sc.seed}});
    return kExitOk;
}

int cmd_info(const std::string& input) {
    try {
        FileSource src(input);
        XtfReader reader(src);
        reader.set_warn(stderr_warn());
        const XtfFileHeader& hdr = reader.header();
        std::cout << "sonar: " << hdr.sonar_name << "\n";
        std::cout << "channels: " << hdr.channels.size() << "\n";
        for (size_t i = 0; i < hdr.channels.size(); ++i) {
            const auto& c = hdr.channels[i];
            std::cout << "  [" << i << "] " << to_string(c.side) << ", "
                      << int(c.bytes_per_sample) * 8 << "-bit samples, hint "
                      << c.samples_per_ping_hint << " samples/ping\n";
        }
        uint64_t cycles = 0, with_nav = 0;
        int64_t t_min = 0, t_max = 0;
        bool truncated = false;
        try {
            for (;;) {
                auto pkt = reader.next();
                if (!pkt) break;
                auto* batch = std::get_if<PingBatch>(&*pkt);
                if (!batch || batch->empty()) continue;
                cycles++;
                if (batch->front().nav) with_nav++;
                int64_t t = batch->front().timestamp_us;
                if (cycles == 1) t_min = t_max = t;
                t_min = std::min(t_min, t);
                t_max = std::max(t_max, t);
            }
        } catch (const TruncatedPacket& e) {
            truncated = true;
            log_json("warn", "truncated_packet", {{"offset", e.offset}});
        }
        std::cout << "pings: " << cycles << "\n";
        if (cycles) {
            std::cout << "time span: " << iso8601_utc(t_min) << " .. " << iso8601_utc(t_max)
                      << "\n";
            std::cout << "nav coverage: "
                      << static_cast<int>(
                             std::llround(100.0 * static_cast<double>(with_nav) /
                                          static_cast<double>(cycles)))
                      << "%\n";
        }
        if (reader.stats().skipped_unknown)
            std::cout << "skipped packets: " << reader.stats().skipped_unknown << "\n";
        if (truncated) std::cout << "warning: file truncated mid-packet\n";
        return kExitOk;
    } catch (const XtfError& e) {
        log_json("error", "unreadable_input", {{"detail", e.what()}});
        return kExitInput;
    }
}

int cmd_waterfall(const std::string& input, const std::string& config_path,
                  const std::string& out_dir, bool no_equalize, OverlayMode overlay) {
    PipelineConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        log_json("error", "invalid_config", {{"field", e.field}, {"detail", e.what()}});
        return kExitConfig;
    }
    try {
        FileSource src(input);
        XtfReader reader(src);
        reader.set_warn(stderr_warn());
        const XtfFileHeader& hdr = reader.header();
        std::vector<std::vector<SonarPing>> per_channel(hdr.channels.size());
        try {
            for (;;) {
                auto pkt = reader.next();
                if (!pkt) break;
                if (auto* batch = std::get_if<PingBatch>(&*pkt))
                    for (auto& p : *batch) per_channel[p.channel].push_back(std::move(p));
            }
        } catch (const TruncatedPacket& e) {
            log_json("warn", "truncated_packet", {{"offset", e.offset}});
        }
        fs::create_directories(out_dir);
        std::string name = survey_name(input, "");
        for (size_t ci = 0; ci < per_channel.size(); ++ci) {
            if (!channel_selected(cfg.channels, hdr.channels[ci].side)) continue;
            auto tiles = build_tiles(per_channel[ci], hdr.channels[ci].side,
                                     hdr.channels[ci].bytes_per_sample, cfg.tile.rows,
                                     cfg.tile.overlap, !no_equalize);
            for (const auto& tile : tiles) {
                std::string base = name + "_" + to_string(tile.side) + "_" +
                                   std::to_string(tile.tile_origin_row);
                write_pgm(fs::path(out_dir) / (base + ".pgm"), tile.view());
                write_pgm(fs::path(out_dir) / (base + "_corrected.pgm"), tile.corrected_view());
                if (overlay == OverlayMode::None) continue;
                auto features = detect_features(tile, detail::feature_config_of(cfg));
                if (overlay == OverlayMode::Features) {
                    auto img = render_feature_overlay(tile.view(), features);
                    write_ppm(fs::path(out_dir) / (base + "_features.ppm"), img);
                } else {
                    DbscanParams dp{cfg.dbscan.eps, cfg.dbscan.min_pts};
                    auto labels = dbscan(features, dp);
                    auto rois =
                        clusters_to_rois(features, labels, cfg.roi.padding, tile.rows, tile.cols);
                    auto img = render_roi_overlay(tile.view(), features, labels, rois);
                    write_ppm(fs::path(out_dir) / (base + "_rois.ppm"), img);
                }
            }
        }
        return kExitOk;
    } catch (const XtfError& e) {
        log_json("error", "unreadable_input", {{"detail", e.what()}});
        return kExitInput;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sidescan sonar object detection pipeline"};
    app.require_subcommand(1);

    std::string input, live, config_path, out_dir = "out", format = "both";
    std::string overlay_str = "none", channels;
    bool dump_config = false, no_equalize = false;
    int64_t seed_override = -1;
    std::string scenario_path, synth_out = "survey.xtf";

    auto* detect = app.add_subcommand("detect", "Detect objects and write the catalog");
    detect->add_option("input", input, "XTF file path, or - for stdin");
    detect->add_option("--live", live, "Read the stream from HOST:PORT instead of a file");
    detect->add_option("--config", config_path, "Pipeline config file");
    detect->add_option("--out", out_dir, "Output directory");
    detect->add_option("--format", format, "Catalog format: geojson|csv|both")
        ->check(CLI::IsMember({"geojson", "csv", "both"}));
    detect->add_option("--overlay", overlay_str, "Debug overlays: features|rois|none")
        ->check(CLI::IsMember({"features", "rois", "none"}));
    detect->add_option("--channels", channels, "Channel filter, e.g. port or port,starboard");
    detect->add_flag("--dump-config", dump_config, "Print the effective config and exit");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic survey");
    synth->add_option("scenario", scenario_path, "Scenario config file")->required();
    synth->add_option("--out", synth_out, "Output XTF path");
    synth->add_option("--seed", seed_override, "Override the scenario seed");

    auto* info = app.add_subcommand("info", "Summarize an XTF file");
    info->add_option("input", input, "XTF file path")->required();

    auto* waterfall = app.add_subcommand("waterfall", "Dump waterfall tiles as PGM images");
    waterfall->add_option("input", input, "XTF file path")->required();
    waterfall->add_option("--config", config_path, "Pipeline config file");
    waterfall->add_option("--out", out_dir, "Output directory");
    waterfall->add_flag("--no-equalize", no_equalize, "Skip the equalization stage");
    waterfall->add_option("--overlay", overlay_str, "Debug overlays: features|rois|none")
        ->check(CLI::IsMember({"features", "rois", "none"}));

    CLI11_PARSE(app, argc, argv);

    OverlayMode overlay = overlay_str == "features" ? OverlayMode::Features
                          : overlay_str == "rois"   ? OverlayMode::Rois
                                                    : OverlayMode::None;

    if (detect->parsed()) {
        if (input.empty() && live.empty() && !dump_config) {
            log_json("error", "unreadable_input", {{"detail", "no input given"}});
            return kExitInput;
        }
        return cmd_detect(input, live, config_path, out_dir, format, overlay, channels,
                          dump_config);
    }
    if (synth->parsed()) return cmd_synth(scenario_path, synth_out, seed_override);
    if (info->parsed()) return cmd_info(input);
    if (waterfall->parsed()) return cmd_waterfall(input, config_path, out_dir, no_equalize, overlay);
    return kExitOk;
}

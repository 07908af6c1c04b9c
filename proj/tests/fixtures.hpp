// Shared test fixtures: deterministic random surveys and ping sequences.
#ifndef SEASCAN_TESTS_FIXTURES_HPP
#define SEASCAN_TESTS_FIXTURES_HPP

#include <vector>

#include "seascan/rng.hpp"
#include "seascan/synth.hpp"
#include "seascan/xtf.hpp"

namespace fixtures {

// Random ping sequence with the quirks the parser must survive: 8/16-bit
// samples, missing nav, varying sample counts. Timestamps snap to
// centiseconds, the format's resolution.
inline std::pair<seascan::XtfFileHeader, std::vector<seascan::SonarPing>> random_pings(
    uint64_t seed) {
    seascan::Xoshiro256 rng(seed);
    seascan::XtfFileHeader hdr;
    hdr.sonar_name = "fixture";
    hdr.nav_units = 3;
    const uint8_t bps = rng.uniform() < 0.5 ? 1 : 2;
    const int nsamp = rng.range(16, 257);
    for (int ch = 0; ch < 2; ++ch) {
        seascan::ChannelInfo ci;
        ci.side = ch == 0 ? seascan::ChannelSide::Port : seascan::ChannelSide::Starboard;
        ci.type_byte = static_cast<uint8_t>(ch + 1);
        ci.bytes_per_sample = bps;
        ci.samples_per_ping_hint = static_cast<uint32_t>(nsamp);
        ci.name = ch == 0 ? "port" : "starboard";
        ci.tilt_angle_deg = 30.f;
        hdr.channels.push_back(ci);
    }
    const int ping_count = rng.range(1, 40);
    const uint16_t max_sample = bps == 1 ? 255 : 65535;
    std::vector<seascan::SonarPing> pings;
    int64_t t = 1577836800000000 + static_cast<int64_t>(rng.below(1000)) * 10000;
    for (int i = 0; i < ping_count; ++i) {
        bool has_nav = rng.uniform() < 0.7;
        std::optional<seascan::NavFix> nav;
        if (has_nav) {
            seascan::NavFix fix;
            fix.latitude = rng.uniform(-80.0, 80.0);
            fix.longitude = rng.uniform(-179.0, 179.0);
            fix.heading_deg = static_cast<float>(rng.uniform(0.0, 359.0));
            fix.fix_time_us = t;
            nav = fix;
        }
        // Nav, altitude, sound velocity and roll live in the shared ping
        // header; only samples and slant range vary per channel.
        std::optional<float> altitude;
        if (rng.uniform() < 0.8) altitude = static_cast<float>(rng.uniform(1.0, 10.0));
        float sound_velocity = static_cast<float>(rng.uniform(1400.0, 1550.0));
        float roll = static_cast<float>(rng.uniform(-5.0, 5.0));
        for (int ch = 0; ch < 2; ++ch) {
            seascan::SonarPing p;
            p.ping_number = static_cast<uint32_t>(i);
            p.timestamp_us = t;
            p.channel = static_cast<uint16_t>(ch);
            p.slant_range_max_m = static_cast<float>(rng.uniform(20.0, 120.0));
            p.sensor_altitude_m = altitude;
            p.sound_velocity_mps = sound_velocity;
            p.nav = nav;
            p.tilt_angle_deg = 30.f;
            p.roll_angle_deg = roll;
            p.samples.resize(static_cast<size_t>(nsamp));
            for (auto& s : p.samples) s = static_cast<uint16_t>(rng.below(max_sample + 1u));
            p.degenerate =
                p.sensor_altitude_m && !(p.slant_range_max_m > *p.sensor_altitude_m);
            pings.push_back(std::move(p));
        }
        t += 100000;  // 10 Hz
    }
    return {hdr, pings};
}

// Small detection scenario with one strong target, used by pipeline tests.
inline seascan::SurveyScenario small_target_scenario(uint64_t seed) {
    seascan::SurveyScenario sc;
    sc.seed = seed;
    sc.name = "smoke";
    sc.ping_count = 400;
    sc.samples_per_ping = 512;
    sc.slant_range_max_m = 60.0;
    sc.altitude_m = 5.0;
    seascan::TargetSpec t;
    t.shape = seascan::TargetSpec::Shape::Rect;
    t.center_ping = 200;
    t.center_ground_m = 25.0;
    t.side = seascan::ChannelSide::Starboard;
    t.along_m = 6.0;
    t.across_m = 6.0;
    t.highlight_gain = 4.0;
    t.shadow_m = 8.0;
    sc.targets.push_back(t);
    return sc;
}

}  // namespace fixtures

#endif  // SEASCAN_TESTS_FIXTURES_HPP

#ifndef SEASCAN_XTF_HPP
#define SEASCAN_XTF_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "seascan/bytes.hpp"

namespace seascan {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct XtfError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnrecognizedFormat : XtfError {
    using XtfError::XtfError;
};
struct EmptyChannelLayout : XtfError {
    using XtfError::XtfError;
};
struct UnsupportedSampleWidth : XtfError {
    using XtfError::XtfError;
};
struct NeedMoreData : XtfError {
    using XtfError::XtfError;
};
struct TruncatedPacket : XtfError {
    uint64_t offset;
    TruncatedPacket(const std::string& msg, uint64_t off) : XtfError(msg), offset(off) {}
};
struct InsufficientNav : XtfError {
    using XtfError::XtfError;
};

// ---------------------------------------------------------------------------
// Format constants (Triton XTF, little endian)
// ---------------------------------------------------------------------------

inline constexpr uint8_t kXtfFileFormat = 0x7B;
inline constexpr uint16_t kPacketMagic = 0xFACE;
inline constexpr size_t kFileHeaderBytes = 1024;
inline constexpr size_t kChanInfoBytes = 128;
inline constexpr size_t kChanInfoOffset = 256;
inline constexpr size_t kMaxChannels = 6;  // keeps the file header at one 1024-byte block
inline constexpr size_t kPacketCommonBytes = 14;
inline constexpr size_t kPingHeaderBytes = 256;
inline constexpr size_t kChanHeaderBytes = 64;
inline constexpr size_t kAttitudeBytes = 64;
inline constexpr uint8_t kHeaderTypeSonar = 0;
inline constexpr uint8_t kHeaderTypeAttitude = 3;
// Anything larger than this in NumBytesThisRecord is treated as corruption.
inline constexpr uint32_t kMaxRecordBytes = 64u << 20;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class ChannelSide : uint8_t { Port, Starboard, Other };

inline const char* to_string(ChannelSide s) {
    switch (s) {
        case ChannelSide::Port: return "port";
        case ChannelSide::Starboard: return "starboard";
        default: return "other";
    }
}

struct ChannelInfo {
    ChannelSide side = ChannelSide::Other;
    uint8_t type_byte = 0;  // raw TypeOfChannel (1 = port, 2 = starboard)
    uint8_t bytes_per_sample = 1;
    uint32_t samples_per_ping_hint = 0;
    std::string name;
    float frequency_khz = 0.f;
    float tilt_angle_deg = 0.f;  // beam depression from horizontal
};

struct XtfFileHeader {
    uint8_t format_version = kXtfFileFormat;
    uint8_t system_type = 1;
    std::string sonar_name;
    uint16_t sonar_type = 0;
    uint16_t nav_units = 3;  // 3 = degrees lat/lon
    std::vector<ChannelInfo> channels;

    size_t channel_count() const { return channels.size(); }
};

struct NavFix {
    double latitude = 0.0;    // degrees, [-90, 90]
    double longitude = 0.0;   // degrees, [-180, 180]
    float heading_deg = 0.f;  // [0, 360)
    int64_t fix_time_us = 0;  // UTC

    bool operator==(const NavFix&) const = default;
};

struct SonarPing {
    uint32_t ping_number = 0;
    int64_t timestamp_us = 0;  // UTC
    uint16_t channel = 0;      // index into XtfFileHeader::channels
    std::vector<uint16_t> samples;
    float slant_range_max_m = 0.f;
    std::optional<float> sensor_altitude_m;  // absent when the sonar did not report it
    float sound_velocity_mps = 1500.f;
    std::optional<NavFix> nav;
    bool nav_extrapolated = false;
    float tilt_angle_deg = 0.f;
    float roll_angle_deg = 0.f;
    bool degenerate = false;  // slant_range_max <= altitude
};

struct AttitudeRecord {
    int64_t timestamp_us = 0;
    float pitch_deg = 0.f;
    float roll_deg = 0.f;
    float heave_m = 0.f;
    float yaw_deg = 0.f;
    float heading_deg = 0.f;
};

using PingBatch = std::vector<SonarPing>;  // one ping per channel, same transmit
using XtfPacket = std::variant<PingBatch, AttitudeRecord>;

// ---------------------------------------------------------------------------
// Civil time <-> epoch microseconds (UTC, proleptic Gregorian)
// ---------------------------------------------------------------------------

struct CivilTime {
    int year, month, day, hour, minute, second;
    int micros;
};

inline int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

inline void civil_from_days(int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t yr = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yr + (m <= 2));
}

inline int64_t civil_to_us(const CivilTime& t) {
    int64_t days = days_from_civil(t.year, t.month, t.day);
    int64_t secs = days * 86400 + t.hour * 3600 + t.minute * 60 + t.second;
    return secs * 1000000 + t.micros;
}

inline CivilTime us_to_civil(int64_t us) {
    int64_t secs = us / 1000000;
    int64_t rem = us % 1000000;
    if (rem < 0) {
        rem += 1000000;
        secs -= 1;
    }
    int64_t days = secs / 86400;
    int64_t sod = secs % 86400;
    if (sod < 0) {
        sod += 86400;
        days -= 1;
    }
    CivilTime t{};
    civil_from_days(days, t.year, t.month, t.day);
    t.hour = static_cast<int>(sod / 3600);
    t.minute = static_cast<int>((sod % 3600) / 60);
    t.second = static_cast<int>(sod % 60);
    t.micros = static_cast<int>(rem);
    return t;
}

inline std::string iso8601_utc(int64_t us) {
    CivilTime t = us_to_civil(us);
    char buf[40];
    if (t.micros == 0)
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", t.year, t.month, t.day,
                      t.hour, t.minute, t.second);
    else
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06dZ", t.year, t.month,
                      t.day, t.hour, t.minute, t.second, t.micros);
    return buf;
}

// ---------------------------------------------------------------------------
// Byte sources
// ---------------------------------------------------------------------------

class ByteSource {
public:
    virtual ~ByteSource() = default;
    // Pulls up to n bytes into dst. Returns the number read; 0 means end of stream.
    virtual size_t read(uint8_t* dst, size_t n) = 0;
};

class MemorySource final : public ByteSource {
public:
    explicit MemorySource(std::vector<uint8_t> bytes) : bytes_(std::move(bytes)) {}
    size_t read(uint8_t* dst, size_t n) override {
        size_t avail = bytes_.size() - pos_;
        size_t take = std::min(n, avail);
        std::copy_n(bytes_.data() + pos_, take, dst);
        pos_ += take;
        return take;
    }

private:
    std::vector<uint8_t> bytes_;
    size_t pos_ = 0;
};

class FileSource final : public ByteSource {
public:
    explicit FileSource(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) throw XtfError("cannot open input file: " + path);
    }
    size_t read(uint8_t* dst, size_t n) override {
        in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        return static_cast<size_t>(in_.gcount());
    }

private:
    std::ifstream in_;
};

class IStreamSource final : public ByteSource {
public:
    explicit IStreamSource(std::istream& in) : in_(in) {}
    size_t read(uint8_t* dst, size_t n) override {
        in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        return static_cast<size_t>(in_.gcount());
    }

private:
    std::istream& in_;
};

// ---------------------------------------------------------------------------
// File header
// ---------------------------------------------------------------------------

inline ChannelSide side_from_type(uint8_t type) {
    if (type == 1) return ChannelSide::Port;
    if (type == 2) return ChannelSide::Starboard;
    return ChannelSide::Other;
}

inline uint8_t type_from_side(ChannelSide side) {
    switch (side) {
        case ChannelSide::Port: return 1;
        case ChannelSide::Starboard: return 2;
        default: return 0;
    }
}

// Parses the 1024-byte file header. Consumes exactly kFileHeaderBytes.
inline XtfFileHeader parse_file_header(std::span<const uint8_t> bytes) {
    if (bytes.size() < kFileHeaderBytes)
        throw NeedMoreData("file header needs " + std::to_string(kFileHeaderBytes) +
                           " bytes, have " + std::to_string(bytes.size()));
    ByteReader r(bytes);
    XtfFileHeader h;
    h.format_version = r.u8();
    if (h.format_version != kXtfFileFormat)
        throw UnrecognizedFormat("bad format byte " + std::to_string(h.format_version) +
                                 ", expected " + std::to_string(kXtfFileFormat));
    h.system_type = r.u8();
    r.skip(16);  // recording program name + version
    h.sonar_name = r.text(16);
    h.sonar_type = r.u16();
    r.seek(164);
    h.nav_units = r.u16();
    uint16_t n_sonar = r.u16();
    if (n_sonar == 0) throw EmptyChannelLayout("header declares zero sonar channels");
    if (n_sonar > kMaxChannels)
        throw UnrecognizedFormat("more than " + std::to_string(kMaxChannels) +
                                 " channels not supported");
    for (uint16_t i = 0; i < n_sonar; ++i) {
        r.seek(kChanInfoOffset + i * kChanInfoBytes);
        ChannelInfo ci;
        ci.type_byte = r.u8();
        ci.side = side_from_type(ci.type_byte);
        r.u8();  // sub-channel
        r.u16();  // correction flags
        r.u16();  // unipolar
        uint16_t bps = r.u16();
        if (bps != 1 && bps != 2)
            throw UnsupportedSampleWidth("channel " + std::to_string(i) + " bytes_per_sample=" +
                                         std::to_string(bps) + " (only 1 or 2 decoded)");
        ci.bytes_per_sample = static_cast<uint8_t>(bps);
        ci.samples_per_ping_hint = r.u32();
        ci.name = r.text(16);
        r.f32();  // volt scale
        ci.frequency_khz = r.f32();
        r.f32();  // horizontal beam angle
        ci.tilt_angle_deg = r.f32();
        h.channels.push_back(std::move(ci));
    }
    return h;
}

inline std::vector<uint8_t> encode_file_header(const XtfFileHeader& h) {
    if (h.channels.empty()) throw XtfError("cannot encode a header with no channels");
    if (h.channels.size() > kMaxChannels)
        throw XtfError("at most " + std::to_string(kMaxChannels) + " channels supported");
    ByteWriter w;
    w.u8(h.format_version);
    w.u8(h.system_type);
    w.text("seascan", 8);
    w.text("1.0", 8);
    w.text(h.sonar_name, 16);
    w.u16(h.sonar_type);
    w.pad_to(164);
    w.u16(h.nav_units);
    w.u16(static_cast<uint16_t>(h.channels.size()));
    w.pad_to(kChanInfoOffset);
    for (const auto& ci : h.channels) {
        size_t base = w.size();
        w.u8(ci.type_byte ? ci.type_byte : type_from_side(ci.side));
        w.u8(0);                          // sub-channel
        w.u16(0);                         // correction flags
        w.u16(0);                         // unipolar
        w.u16(ci.bytes_per_sample);
        w.u32(ci.samples_per_ping_hint);
        w.text(ci.name, 16);
        w.f32(0.f);                       // volt scale
        w.f32(ci.frequency_khz);
        w.f32(0.f);                       // horizontal beam angle
        w.f32(ci.tilt_angle_deg);
        w.pad_to(base + kChanInfoBytes);
    }
    w.pad_to(kFileHeaderBytes);
    return w.take();
}

// ---------------------------------------------------------------------------
// Packet encoding (shared layout knowledge; the synth module writes files
// through these, and parser tests build corrupt streams from them)
// ---------------------------------------------------------------------------

namespace detail {

inline void encode_packet_common(ByteWriter& w, uint8_t header_type, uint16_t chans,
                                 uint32_t total_bytes) {
    w.u16(kPacketMagic);
    w.u8(header_type);
    w.u8(0);  // sub-channel
    w.u16(chans);
    w.u32(0);  // reserved
    w.u32(total_bytes);
}

inline void encode_timestamp_fields(ByteWriter& w, int64_t us) {
    CivilTime t = us_to_civil(us);
    w.u16(static_cast<uint16_t>(t.year));
    w.u8(static_cast<uint8_t>(t.month));
    w.u8(static_cast<uint8_t>(t.day));
    w.u8(static_cast<uint8_t>(t.hour));
    w.u8(static_cast<uint8_t>(t.minute));
    w.u8(static_cast<uint8_t>(t.second));
    w.u8(static_cast<uint8_t>(t.micros / 10000));  // hundredths
}

}  // namespace detail

// One sonar record carrying all channels of one transmit cycle. Timestamps are
// stored at centisecond resolution, the format's native granularity.
inline std::vector<uint8_t> encode_ping_packet(const XtfFileHeader& hdr, const PingBatch& batch) {
    if (batch.empty()) throw XtfError("empty ping batch");
    size_t total = kPingHeaderBytes;
    for (const auto& p : batch) {
        const auto& ci = hdr.channels.at(p.channel);
        total += kChanHeaderBytes + p.samples.size() * ci.bytes_per_sample;
    }
    const SonarPing& first = batch.front();
    ByteWriter w;
    detail::encode_packet_common(w, kHeaderTypeSonar, static_cast<uint16_t>(batch.size()),
                                 static_cast<uint32_t>(total));
    detail::encode_timestamp_fields(w, first.timestamp_us);
    CivilTime ct = us_to_civil(first.timestamp_us);
    int jday = static_cast<int>(days_from_civil(ct.year, ct.month, ct.day) -
                                days_from_civil(ct.year, 1, 1) + 1);
    w.u16(static_cast<uint16_t>(jday));
    w.u32(first.ping_number);  // event number
    w.u32(first.ping_number);
    w.f32(first.sound_velocity_mps / 2.f);  // stored one-way by convention
    w.f32(0.f);                             // ocean tide
    w.u32(0);
    for (int i = 0; i < 7; ++i) w.f32(0.f);  // CTD block
    w.f32(first.sound_velocity_mps);         // computed (two-way) sound velocity
    w.pad_to(128);                           // mag + aux + speed/gyro block unused
    const NavFix* fix = first.nav ? &*first.nav : nullptr;
    w.f64(fix ? fix->latitude : 0.0);   // ship Y
    w.f64(fix ? fix->longitude : 0.0);  // ship X
    w.pad_to(152);
    w.f32(0.f);  // sensor speed
    w.f32(0.f);  // KP
    w.f64(fix ? fix->latitude : 0.0);   // sensor Y
    w.f64(fix ? fix->longitude : 0.0);  // sensor X
    w.pad_to(184);
    w.f32(0.f);  // layback
    w.f32(0.f);  // cable tension
    w.f32(0.f);  // sensor depth
    w.f32(first.sensor_altitude_m.value_or(0.f));
    w.f32(0.f);  // aux altitude
    w.f32(0.f);  // pitch
    w.f32(first.roll_angle_deg);
    w.f32(fix ? fix->heading_deg : 0.f);
    w.f32(0.f);  // heave
    w.f32(0.f);  // yaw
    w.u32(0);    // attitude time tag
    w.f32(0.f);  // DOT
    int64_t day_us = first.timestamp_us - civil_to_us({ct.year, ct.month, ct.day, 0, 0, 0, 0});
    w.u32(static_cast<uint32_t>(day_us / 1000));  // nav fix milliseconds of day
    w.pad_to(kPingHeaderBytes);
    for (const auto& p : batch) {
        const auto& ci = hdr.channels.at(p.channel);
        size_t base = w.size();
        w.u16(p.channel);
        w.u16(0);  // downsample method
        w.f32(p.slant_range_max_m);
        w.f32(0.f);  // ground range
        w.f32(0.f);  // time delay
        w.f32(2.f * p.slant_range_max_m / p.sound_velocity_mps);  // time duration
        w.f32(0.f);  // seconds per ping
        w.pad_to(base + 42);
        w.u32(static_cast<uint32_t>(p.samples.size()));
        w.pad_to(base + kChanHeaderBytes);
        if (ci.bytes_per_sample == 1) {
            for (uint16_t s : p.samples) w.u8(static_cast<uint8_t>(s));
        } else {
            for (uint16_t s : p.samples) w.u16(s);
        }
    }
    return w.take();
}

inline std::vector<uint8_t> encode_attitude_packet(const AttitudeRecord& a) {
    ByteWriter w;
    detail::encode_packet_common(w, kHeaderTypeAttitude, 0, kAttitudeBytes);
    w.u32(0);
    w.u32(0);  // reserved
    w.u32(static_cast<uint32_t>(a.timestamp_us % 1000000));  // epoch microseconds part
    w.u32(0);                                                // source epoch
    w.f32(a.pitch_deg);
    w.f32(a.roll_deg);
    w.f32(a.heave_m);
    w.f32(a.yaw_deg);
    w.u32(0);  // time tag
    w.f32(a.heading_deg);
    detail::encode_timestamp_fields(w, a.timestamp_us);
    w.pad_to(kAttitudeBytes);
    return w.take();
}

// Arbitrary packet with an unknown header type (test fixtures use this to
// exercise the skip path).
inline std::vector<uint8_t> encode_unknown_packet(uint8_t header_type, size_t payload_bytes) {
    ByteWriter w;
    detail::encode_packet_common(w, header_type, 0,
                                 static_cast<uint32_t>(kPacketCommonBytes + payload_bytes));
    for (size_t i = 0; i < payload_bytes; ++i) w.u8(static_cast<uint8_t>(i * 7 + 1));
    return w.take();
}

// ---------------------------------------------------------------------------
// Streaming reader
// ---------------------------------------------------------------------------

// Decodes sonar and attitude records; every other packet type is skipped with
// a counted warning. A bad magic number at a record boundary triggers a
// byte-wise scan for the next magic, so a corrupted span costs data but never
// kills the stream.
class XtfReader {
public:
    struct Stats {
        uint64_t packets = 0;
        uint64_t ping_batches = 0;
        uint64_t skipped_unknown = 0;
        uint64_t resyncs = 0;
        uint64_t bytes_skipped = 0;
    };

    using WarnFn =
        std::function<void(std::string_view event, std::string_view detail, uint64_t offset)>;

    explicit XtfReader(ByteSource& src) : src_(src) {}

    void set_warn(WarnFn fn) { warn_ = std::move(fn); }

    const XtfFileHeader& header() {
        if (!header_) {
            if (!fill(kFileHeaderBytes))
                throw NeedMoreData("stream ended inside the file header");
            header_ = parse_file_header(
                std::span<const uint8_t>(buf_.data() + head_, kFileHeaderBytes));
            consume(kFileHeaderBytes);
        }
        return *header_;
    }

    // Next decoded packet, or nullopt at end of stream.
    std::optional<XtfPacket> next() {
        header();
        for (;;) {
            if (!fill(2)) {
                if (buffered() > 0) warn("trailing_bytes", std::to_string(buffered()), offset());
                return std::nullopt;
            }
            if (peek_u16() != kPacketMagic) {
                if (!resync()) return std::nullopt;
                continue;
            }
            if (!fill(kPacketCommonBytes))
                throw TruncatedPacket("stream ended inside a packet header", offset());
            ByteReader r(std::span<const uint8_t>(buf_.data() + head_, kPacketCommonBytes));
            r.skip(2);
            uint8_t header_type = r.u8();
            r.skip(7);
            uint32_t nbytes = r.u32();
            if (nbytes < kPacketCommonBytes || nbytes > kMaxRecordBytes) {
                // Framing is implausible: treat the magic as a false positive.
                warn("bad_record_length", std::to_string(nbytes), offset());
                consume(2);
                stats_.bytes_skipped += 2;
                if (!resync()) return std::nullopt;
                continue;
            }
            if (!fill(nbytes))
                throw TruncatedPacket("stream ended inside a packet body", offset());
            std::span<const uint8_t> record(buf_.data() + head_, nbytes);
            uint64_t record_offset = offset();
            consume(nbytes);
            stats_.packets++;
            if (header_type == kHeaderTypeSonar) {
                auto batch = decode_ping(record, record_offset);
                if (!batch) continue;  // malformed interior, warned and skipped
                stats_.ping_batches++;
                return XtfPacket(std::move(*batch));
            }
            if (header_type == kHeaderTypeAttitude) return XtfPacket(decode_attitude(record));
            stats_.skipped_unknown++;
            warn("skipped_packet_type", std::to_string(header_type), record_offset);
        }
    }

    const Stats& stats() const { return stats_; }
    uint64_t offset() const { return stream_offset_; }

private:
    size_t buffered() const { return buf_.size() - head_; }

    uint16_t peek_u16() const {
        return static_cast<uint16_t>(buf_[head_] | (buf_[head_ + 1] << 8));
    }

    bool fill(size_t need) {
        while (buffered() < need) {
            if (head_ > (1u << 20) && head_ > buf_.size() / 2) {
                buf_.erase(buf_.begin(), buf_.begin() + static_cast<ptrdiff_t>(head_));
                head_ = 0;
            }
            size_t old = buf_.size();
            size_t want = std::max<size_t>(need - buffered(), 64 * 1024);
            buf_.resize(old + want);
            size_t got = src_.read(buf_.data() + old, want);
            buf_.resize(old + got);
            if (got == 0) return false;
        }
        return true;
    }

    void consume(size_t n) {
        head_ += n;
        stream_offset_ += n;
    }

    // Scans forward for the packet magic. Returns false on end of stream.
    bool resync() {
        uint64_t start = offset();
        uint64_t skipped = 0;
        for (;;) {
            while (buffered() >= 2) {
                if (peek_u16() == kPacketMagic) {
                    stats_.resyncs++;
                    stats_.bytes_skipped += skipped;
                    warn("resync", std::to_string(skipped) + " bytes skipped", start);
                    return true;
                }
                consume(1);
                skipped++;
            }
            if (!fill(2)) {
                skipped += buffered();
                stats_.bytes_skipped += skipped;
                if (skipped) warn("resync_failed", std::to_string(skipped) + " bytes dropped", start);
                return false;
            }
        }
    }

    std::optional<PingBatch> decode_ping(std::span<const uint8_t> record, uint64_t rec_offset) {
        const XtfFileHeader& hdr = *header_;
        if (record.size() < kPingHeaderBytes) {
            warn("short_ping_record", std::to_string(record.size()), rec_offset);
            return std::nullopt;
        }
        ByteReader r(record);
        r.skip(4);
        uint16_t nchans = r.u16();
        r.skip(8);
        CivilTime t{};
        t.year = r.u16();
        t.month = r.u8();
        t.day = r.u8();
        t.hour = r.u8();
        t.minute = r.u8();
        t.second = r.u8();
        t.micros = r.u8() * 10000;
        r.u16();  // julian day
        r.u32();  // event number
        uint32_t ping_number = r.u32();
        float sv_one_way = r.f32();
        r.seek(72);
        float sv_computed = r.f32();
        r.seek(160);
        double sensor_lat = r.f64();
        double sensor_lon = r.f64();
        r.seek(196);
        float altitude = r.f32();
        r.f32();  // aux altitude
        r.f32();  // pitch
        float roll = r.f32();
        float heading = r.f32();

        SonarPing proto;
        proto.ping_number = ping_number;
        proto.timestamp_us = civil_to_us(t);
        proto.sound_velocity_mps = sv_computed > 0.f ? sv_computed : 2.f * sv_one_way;
        if (altitude > 0.f) proto.sensor_altitude_m = altitude;
        proto.roll_angle_deg = roll;
        // (0,0) is the de-facto "no fix" placeholder.
        if (sensor_lat != 0.0 || sensor_lon != 0.0) {
            NavFix fix;
            fix.latitude = sensor_lat;
            fix.longitude = sensor_lon;
            fix.heading_deg = heading;
            fix.fix_time_us = proto.timestamp_us;
            proto.nav = fix;
        }

        PingBatch batch;
        size_t pos = kPingHeaderBytes;
        for (uint16_t c = 0; c < nchans; ++c) {
            if (pos + kChanHeaderBytes > record.size()) {
                warn("short_channel_header", std::to_string(c), rec_offset);
                return std::nullopt;
            }
            ByteReader cr(record.subspan(pos, kChanHeaderBytes));
            uint16_t channel_number = cr.u16();
            cr.u16();
            float slant = cr.f32();
            cr.seek(42);
            uint32_t nsamples = cr.u32();
            if (channel_number >= hdr.channels.size()) {
                warn("bad_channel_number", std::to_string(channel_number), rec_offset);
                return std::nullopt;
            }
            const auto& ci = hdr.channels[channel_number];
            size_t data_bytes = static_cast<size_t>(nsamples) * ci.bytes_per_sample;
            pos += kChanHeaderBytes;
            if (pos + data_bytes > record.size()) {
                warn("short_sample_data", std::to_string(nsamples), rec_offset);
                return std::nullopt;
            }
            SonarPing p = proto;
            p.channel = channel_number;
            p.slant_range_max_m = slant;
            p.tilt_angle_deg = ci.tilt_angle_deg;
            p.samples.resize(nsamples);
            if (ci.bytes_per_sample == 1) {
                for (uint32_t i = 0; i < nsamples; ++i) p.samples[i] = record[pos + i];
            } else {
                for (uint32_t i = 0; i < nsamples; ++i)
                    p.samples[i] = static_cast<uint16_t>(record[pos + 2 * i] |
                                                         (record[pos + 2 * i + 1] << 8));
            }
            pos += data_bytes;
            p.degenerate = p.sensor_altitude_m && !(p.slant_range_max_m > *p.sensor_altitude_m);
            batch.push_back(std::move(p));
        }
        return batch;
    }

    AttitudeRecord decode_attitude(std::span<const uint8_t> record) {
        AttitudeRecord a;
        ByteReader r(record);
        r.seek(30);
        a.pitch_deg = r.f32();
        a.roll_deg = r.f32();
        a.heave_m = r.f32();
        a.yaw_deg = r.f32();
        r.u32();
        a.heading_deg = r.f32();
        CivilTime t{};
        t.year = r.u16();
        t.month = r.u8();
        t.day = r.u8();
        t.hour = r.u8();
        t.minute = r.u8();
        t.second = r.u8();
        t.micros = r.u8() * 10000;
        a.timestamp_us = civil_to_us(t);
        return a;
    }

    void warn(std::string_view event, std::string_view detail, uint64_t off) {
        if (warn_) warn_(event, detail, off);
    }

    ByteSource& src_;
    std::optional<XtfFileHeader> header_;
    std::vector<uint8_t> buf_;
    size_t head_ = 0;
    uint64_t stream_offset_ = 0;
    Stats stats_;
    WarnFn warn_;
};

// ---------------------------------------------------------------------------
// Navigation interpolation
// ---------------------------------------------------------------------------

namespace detail {

// Shortest-arc difference in (-180, 180].
inline double heading_delta(double from_deg, double to_deg) {
    double d = std::fmod(to_deg - from_deg, 360.0);
    if (d > 180.0) d -= 360.0;
    if (d <= -180.0) d += 360.0;
    return d;
}

inline double wrap_heading(double deg) {
    double h = std::fmod(deg, 360.0);
    if (h < 0) h += 360.0;
    return h;
}

}  // namespace detail

// Interpolates one fix at time t from a time-sorted fix list. Returns the fix
// and whether it was extrapolated (t outside the fix span).
inline std::pair<NavFix, bool> interpolate_fix(const std::vector<NavFix>& fixes, int64_t t_us) {
    if (fixes.size() < 2) throw InsufficientNav("need at least two navigation fixes");
    if (t_us <= fixes.front().fix_time_us) {
        NavFix f = fixes.front();
        bool extrapolated = t_us < fixes.front().fix_time_us;
        f.fix_time_us = t_us;
        return {f, extrapolated};
    }
    if (t_us >= fixes.back().fix_time_us) {
        NavFix f = fixes.back();
        bool extrapolated = t_us > fixes.back().fix_time_us;
        f.fix_time_us = t_us;
        return {f, extrapolated};
    }
    auto it = std::lower_bound(fixes.begin(), fixes.end(), t_us,
                               [](const NavFix& f, int64_t t) { return f.fix_time_us < t; });
    const NavFix& b = *it;
    const NavFix& a = *(it - 1);
    double alpha = static_cast<double>(t_us - a.fix_time_us) /
                   static_cast<double>(b.fix_time_us - a.fix_time_us);
    NavFix out;
    out.latitude = a.latitude + alpha * (b.latitude - a.latitude);
    out.longitude = a.longitude + alpha * (b.longitude - a.longitude);
    out.heading_deg = static_cast<float>(detail::wrap_heading(
        a.heading_deg + alpha * detail::heading_delta(a.heading_deg, b.heading_deg)));
    out.fix_time_us = t_us;
    return {out, false};
}

// Fills every missing NavFix by time-linear interpolation (circular for
// heading). Pings outside the fix span take the nearest fix and are flagged
// extrapolated. Throws InsufficientNav when fewer than two pings carry a fix.
inline void interpolate_nav(std::vector<SonarPing>& pings) {
    std::vector<NavFix> fixes;
    for (const auto& p : pings)
        if (p.nav && !p.nav_extrapolated) fixes.push_back(*p.nav);
    std::sort(fixes.begin(), fixes.end(),
              [](const NavFix& a, const NavFix& b) { return a.fix_time_us < b.fix_time_us; });
    fixes.erase(std::unique(fixes.begin(), fixes.end(),
                            [](const NavFix& a, const NavFix& b) {
                                return a.fix_time_us == b.fix_time_us;
                            }),
                fixes.end());
    if (fixes.size() < 2) throw InsufficientNav("need at least two navigation fixes");
    for (auto& p : pings) {
        if (p.nav && !p.nav_extrapolated) continue;
        auto [fix, extrapolated] = interpolate_fix(fixes, p.timestamp_us);
        p.nav = fix;
        p.nav_extrapolated = extrapolated;
    }
}

}  // namespace seascan

#endif  // SEASCAN_XTF_HPP

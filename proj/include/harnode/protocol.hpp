#pragma once

// Wire formats for everything a node and the ingest server exchange over UDP.
// All multi-byte fields are little-endian. Floats are IEEE-754 binary32.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "harnode/error.hpp"

namespace harnode::protocol {

inline constexpr std::uint16_t kDefaultSyncPort = 12300;
inline constexpr std::uint16_t kDefaultDataPort = 12301;
inline constexpr std::uint16_t kDefaultControlPort = 12302;

inline constexpr std::size_t kSampleBytes = 36;
inline constexpr std::size_t kMaxSamplesPerPacket = 30;
inline constexpr std::size_t kV1HeaderBytes = 2;
inline constexpr std::size_t kV2HeaderBytes = 14;
inline constexpr std::size_t kSyncRequestBytes = 10;
inline constexpr std::size_t kSyncResponseBytes = 25;
inline constexpr std::size_t kControlBytes = 13;

/// One 9-axis IMU reading. Units: m/s^2, deg/s, uT.
struct SensorSample {
    float ax = 0, ay = 0, az = 0;
    float gx = 0, gy = 0, gz = 0;
    float mx = 0, my = 0, mz = 0;

    std::array<float, 9> axes() const { return {ax, ay, az, gx, gy, gz, mx, my, mz}; }
    static SensorSample from_axes(const std::array<float, 9>& a);
    bool all_finite() const;
    bool operator==(const SensorSample&) const = default;
};

/// The original 1082-byte layout: id, count, samples. No timing information.
struct DataPacketV1 {
    std::uint8_t node_id = 0;
    std::vector<SensorSample> samples;
    bool operator==(const DataPacketV1&) const = default;
};

/// Adds a per-node sequence number and the corrected timestamp of sample 0.
struct DataPacketV2 {
    std::uint8_t node_id = 0;
    std::uint32_t seq = 0;
    std::uint64_t t_first_us = 0;
    std::vector<SensorSample> samples;
    bool operator==(const DataPacketV2&) const = default;
};

using DataPacket = std::variant<DataPacketV1, DataPacketV2>;

constexpr std::size_t v1_length(std::size_t count) { return kV1HeaderBytes + kSampleBytes * count; }
constexpr std::size_t v2_length(std::size_t count) { return kV2HeaderBytes + kSampleBytes * count; }

static_assert(v1_length(30) == 1082);
static_assert(v2_length(30) == 1094);

std::vector<std::uint8_t> encode_data_packet(const DataPacket& packet);
DataPacket decode_data_packet(std::span<const std::uint8_t> datagram);

std::uint8_t node_id_of(const DataPacket& packet);
const std::vector<SensorSample>& samples_of(const DataPacket& packet);

/// node_id lets the server attribute sync activity to a node.
struct SyncRequest {
    std::uint8_t node_id = 0;
    std::uint64_t t1_us = 0;
    bool operator==(const SyncRequest&) const = default;
};

struct SyncResponse {
    std::uint64_t t1_us = 0;
    std::uint64_t t2_us = 0;
    std::uint64_t t3_us = 0;
    bool operator==(const SyncResponse&) const = default;
};

using SyncMessage = std::variant<SyncRequest, SyncResponse>;

std::vector<std::uint8_t> encode_sync(const SyncMessage& msg);
SyncMessage decode_sync(std::span<const std::uint8_t> datagram);

enum class ControlKind : std::uint8_t {
    StartRecording = 1,
    StopRecording = 2,
    Identify = 3,
};

struct ControlMessage {
    ControlKind kind = ControlKind::StartRecording;
    std::uint32_t session_id = 0;
    std::uint64_t issued_at_us = 0;
    bool operator==(const ControlMessage&) const = default;
};

std::vector<std::uint8_t> encode_control(const ControlMessage& msg);
ControlMessage decode_control(std::span<const std::uint8_t> datagram);

}  // namespace harnode::protocol

#pragma once

// Simulated HARNode fleet. A NodeProcess carries one node's firmware logic
// (clock, sync loop, sampling grid, packetization); the runners move its
// datagrams either through a deterministic virtual network straight into a
// ServerCore (accelerated) or over real UDP sockets in wall-clock time.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "harnode/body.hpp"
#include "harnode/clocksync.hpp"
#include "harnode/gait.hpp"
#include "harnode/protocol.hpp"
#include "harnode/schedule.hpp"
#include "harnode/server.hpp"

namespace harnode::sim {

struct NetworkModel {
    std::int64_t delay_min_us = 1000;
    std::int64_t delay_max_us = 10000;
    double loss_probability = 0.0;  // data packets only
    /// One delay draw per sync exchange used for both legs; otherwise the
    /// legs draw independently.
    bool symmetric_sync = true;
    std::int64_t server_processing_us = 0;
};

struct NodeConfig {
    std::uint8_t node_id = 0;
    BodyPosition position;
    std::int64_t sampling_interval_us = 6000;
    std::size_t samples_per_packet = 30;
    int packet_version = 2;
    clocksync::DriftClockParams drift;  // t0_true_us is filled in by the runner
    std::int64_t resync_interval_us = clocksync::kDefaultResyncIntervalUs;
};

struct FleetConfig {
    std::uint64_t seed = 1;
    std::vector<NodeConfig> nodes;
    NetworkModel network;
    std::string server_host = "127.0.0.1";
    std::uint16_t sync_port = protocol::kDefaultSyncPort;
    std::uint16_t data_port = protocol::kDefaultDataPort;
    std::uint16_t control_port = protocol::kDefaultControlPort;
    std::uint16_t http_port = 8080;
    Schedule schedule;
    std::int64_t start_us = 0;
    std::int64_t duration_us = 0;
    /// Start a server session for each scheduled subject.
    bool manage_sessions = true;
    std::int64_t session_margin_us = 500'000;
    std::optional<std::string> label_file;
    GaitProfile gait = default_gait_profile();
    bool keep_packet_log = false;
};

/// count nodes on distinct positions: the eleven locations at front, cycling
/// count > 11 through the orientations; drift uniform in +-max_drift, node clocks
/// reading 0..2 s at the run start.
std::vector<NodeConfig> make_nodes(std::size_t count, std::uint64_t seed, double max_drift = 5e-6,
                                   double jitter_std_us = 10.0);

/// Parses a fleet config document; relative times are anchored at start_us.
/// Throws ConfigError (duplicate node ids, bad names, missing fields).
FleetConfig parse_fleet_config(const nlohmann::json& doc, std::int64_t start_us);
FleetConfig load_fleet_config(const std::filesystem::path& path, std::int64_t start_us);
nlohmann::json fleet_config_to_json(const FleetConfig& config);
void check_unique_ids(const std::vector<NodeConfig>& nodes);

class NodeProcess {
public:
    NodeProcess(const NodeConfig& config, std::uint64_t seed);

    const NodeConfig& config() const { return config_; }
    const clocksync::SyncState& sync_state() const { return sync_; }
    const clocksync::DriftClock& clock() const { return clock_; }

    // Sync burst: begin_burst, then request/response pairs until burst_complete.
    void begin_burst();
    bool burst_complete() const { return burst_count_ == clocksync::kBurstSize; }
    std::size_t exchanges_in_burst() const { return burst_count_; }
    std::vector<std::uint8_t> make_sync_request(std::int64_t t_true_us);
    /// Returns true when this response completed the burst and the offset was stepped.
    /// A response whose measured round trip is negative (clock read noise
    /// exceeding the path delay) is discarded and the request must be re-sent.
    bool on_sync_response(std::span<const std::uint8_t> datagram, std::int64_t t_true_us);
    bool awaiting_response() const { return pending_t1_.has_value(); }
    std::uint64_t exchanges_discarded() const { return exchanges_discarded_; }
    std::uint64_t bursts_completed() const { return bursts_completed_; }

    /// Aligns the sampling grid to the node clock; requires a completed sync.
    void start_sampling(std::int64_t t_true_us);
    bool sampling() const { return sampling_; }
    /// True instant of the last sample of the next packet.
    std::int64_t next_packet_due_true_us() const;
    /// True instant of the first sample of the next packet.
    std::int64_t next_packet_first_true_us() const;

    /// Emits the next packet. sample_at(t_true) supplies the physical signal.
    std::vector<std::uint8_t> emit_packet(const std::function<protocol::SensorSample(std::int64_t)>& sample_at);
    std::uint32_t packets_emitted() const { return next_seq_; }

    /// Estimated offset in force at a true instant.
    std::int64_t offset_at(std::int64_t t_true_us) const;
    /// |estimated - actual| offset at a true instant.
    double offset_error_us(std::int64_t t_true_us) const;

    void on_control(const protocol::ControlMessage& msg);
    std::vector<std::uint32_t> sessions_noted() const { return sessions_noted_; }
    std::uint64_t identify_count() const { return identify_count_; }

private:
    std::int64_t sample_true_time(std::int64_t index) const;

    NodeConfig config_;
    clocksync::DriftClock clock_;
    clocksync::SyncState sync_;
    std::array<clocksync::SyncExchange, clocksync::kBurstSize> burst_{};
    std::size_t burst_count_ = 0;
    std::optional<std::int64_t> pending_t1_;
    std::uint64_t bursts_completed_ = 0;
    std::uint64_t exchanges_discarded_ = 0;
    std::vector<std::pair<std::int64_t, std::int64_t>> offset_changes_;  // (true time, offset)

    bool sampling_ = false;
    std::int64_t grid_origin_node_us_ = 0;
    std::int64_t next_sample_index_ = 0;
    std::uint32_t next_seq_ = 0;

    std::vector<std::uint32_t> sessions_noted_;
    std::uint64_t identify_count_ = 0;
};

struct TransmittedPacket {
    std::int64_t send_us = 0;
    std::uint8_t node_id = 0;
    bool dropped = false;
    std::vector<std::uint8_t> bytes;
};

struct NodeRunStats {
    std::uint8_t node_id = 0;
    std::uint64_t packets_sent = 0;
    std::uint64_t packets_dropped = 0;
    std::uint64_t sync_bursts = 0;
    std::vector<double> offset_errors_us;  // one per emitted packet
    std::vector<std::int64_t> packet_send_times_us;
    std::vector<std::uint32_t> sessions_noted;
    std::uint64_t identify_count = 0;
};

struct FleetRunResult {
    std::vector<TransmittedPacket> log;  // only when keep_packet_log
    std::uint64_t log_digest = 0;        // over (send time, node, dropped, bytes) in send order
    std::vector<NodeRunStats> nodes;
    std::vector<std::uint32_t> session_ids;
    std::int64_t end_us = 0;
};

/// Settable time source for driving a ServerCore in virtual time.
class VirtualClock {
public:
    explicit VirtualClock(std::int64_t start_us = 0) : now_(start_us) {}
    std::int64_t now() const { return now_.load(); }
    void set(std::int64_t t) { now_.store(t); }
    server::TimeSource source() {
        return [this] { return now_.load(); };
    }

private:
    std::atomic<std::int64_t> now_;
};

/// Discrete-event run in virtual time. The server must read `clock` as its
/// time source. Byte-identical packet logs for identical inputs.
FleetRunResult run_fleet_accelerated(const FleetConfig& config, server::ServerCore& server, VirtualClock& clock);

/// Session hooks for real-time runs, e.g. HTTP calls to a remote server.
struct SessionController {
    std::function<void(const SubjectSchedule&)> start;
    std::function<void(const SubjectSchedule&)> stop;
};

struct RealtimeOptions {
    std::int64_t duration_us = 60'000'000;
    const std::atomic<bool>* cancel = nullptr;
    std::optional<SessionController> sessions;
    /// Listen for broadcast control messages on config.control_port.
    bool listen_control = true;
};

/// Wall-clock run over UDP against config.server_host. Schedule times in
/// config are absolute wall-clock microseconds.
FleetRunResult run_fleet_realtime(const FleetConfig& config, const RealtimeOptions& options);

/// Physical signal for one node: the scheduled subject's profile and activity.
class SignalModel {
public:
    SignalModel(const FleetConfig& config);
    protocol::SensorSample sample(const BodyPosition& position, std::int64_t t_true_us) const;

private:
    const Schedule& schedule_;
    std::uint64_t seed_;
    GaitProfile idle_;
    std::map<std::uint32_t, std::array<GaitProfile, 2>> profiles_;
};

}  // namespace harnode::sim

#pragma once

// Ingest service. ServerCore holds all protocol logic and state and takes
// datagrams plus receive timestamps; UdpServer and ControlApi put it on the
// network. The split lets the accelerated simulator drive the exact same
// core in virtual time.

#include <array>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "harnode/body.hpp"
#include "harnode/protocol.hpp"

namespace harnode::server {

using TimeSource = std::function<std::int64_t()>;

/// System clock in microseconds since the Unix epoch.
std::int64_t wall_clock_us();

struct NodeStatus {
    std::uint8_t node_id = 0;
    std::optional<BodyPosition> position;
    std::int64_t last_seen_us = 0;
    double packet_rate_hz = 0;
    std::int64_t last_seq = -1;
    std::uint64_t loss_count = 0;
    std::uint64_t packets_received = 0;
    /// t2 - t1 of the node's most recent sync request: its clock offset as
    /// seen by the server, including one-way delay.
    std::optional<std::int64_t> last_sync_offset_us;
    std::optional<std::int64_t> sync_age_us;
    bool stale = false;
};

struct RecordRow {
    std::int64_t t_server_us = 0;
    std::uint8_t node_id = 0;
    std::int64_t seq = -1;  // -1 for v1 packets
    std::array<float, 9> values{};
};

struct SubjectInfo {
    std::uint32_t subject_id = 0;
    Footedness footedness = Footedness::Right;
};

struct Session {
    std::uint32_t session_id = 0;
    std::int64_t started_at_us = 0;
    std::optional<std::int64_t> stopped_at_us;
    std::map<std::uint8_t, BodyPosition> positions;
    std::filesystem::path directory;
    std::optional<SubjectInfo> subject;
    std::optional<std::string> label_file;
    std::uint64_t rows_written = 0;
};

struct ServerConfig {
    std::filesystem::path storage_root = "sessions";
    std::int64_t sampling_interval_us = 6000;
    std::int64_t rate_window_us = 5'000'000;
    std::int64_t stale_after_us = 15'000'000;
    std::string config_hash;  // echoed into manifests
};

struct ServerCounters {
    std::uint64_t malformed_data = 0;
    std::uint64_t malformed_sync = 0;
    std::uint64_t duplicate_packets = 0;
    std::uint64_t data_packets = 0;
    std::uint64_t sync_requests = 0;
};

/// Broadcast (node unset) or unicast control delivery.
using ControlSink = std::function<void(const protocol::ControlMessage&, std::optional<std::uint8_t> node)>;

std::filesystem::path session_directory(const std::filesystem::path& root, std::uint32_t session_id);
void write_manifest(const Session& session, const ServerConfig& config);
Session read_manifest(const std::filesystem::path& session_dir);
std::string csv_header();
std::string format_row(const RecordRow& row);
/// Parses a per-node session CSV; throws InputError on malformed content.
std::vector<RecordRow> read_node_csv(const std::filesystem::path& path);

/// Appends rows to per-node CSV files on a dedicated thread; append() only
/// enqueues.
class SessionWriter {
public:
    explicit SessionWriter(std::filesystem::path directory);
    ~SessionWriter();
    SessionWriter(const SessionWriter&) = delete;
    SessionWriter& operator=(const SessionWriter&) = delete;

    void append(std::uint8_t node_id, std::vector<RecordRow> rows);
    /// Blocks until everything queued so far is on disk.
    void flush();
    std::uint64_t rows_written() const { return rows_written_.load(); }

private:
    void run();

    std::filesystem::path directory_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable drained_;
    std::deque<std::pair<std::uint8_t, std::vector<RecordRow>>> queue_;
    bool busy_ = false;
    bool stopping_ = false;
    std::atomic<std::uint64_t> rows_written_{0};
    std::thread worker_;
};

enum class SessionEventKind { Started, Stopped };

struct SessionEvent {
    SessionEventKind kind;
    Session session;
};

class ServerCore {
public:
    ServerCore(ServerConfig config, TimeSource now, ControlSink control = {});
    ~ServerCore();

    const ServerConfig& config() const { return config_; }
    std::int64_t now() const { return now_(); }
    /// Call before any session is started.
    void set_control_sink(ControlSink control) { control_ = std::move(control); }

    /// Returns the response datagram, or nothing for a malformed request.
    std::optional<std::vector<std::uint8_t>> handle_sync_request(std::span<const std::uint8_t> datagram,
                                                                 std::int64_t recv_time_us);

    /// Total over arbitrary input; malformed datagrams are counted and dropped.
    void ingest_datagram(std::span<const std::uint8_t> datagram, std::int64_t recv_time_us);

    Session start_session(const std::map<std::uint8_t, BodyPosition>& positions,
                          std::optional<SubjectInfo> subject = std::nullopt,
                          std::optional<std::string> label_file = std::nullopt);
    Session stop_session();
    std::optional<Session> active_session() const;
    std::vector<Session> sessions() const;
    std::optional<Session> find_session(std::uint32_t id) const;

    void set_position(std::uint8_t node_id, const BodyPosition& position);
    void identify(std::uint8_t node_id);

    std::vector<NodeStatus> snapshot_status() const;
    ServerCounters counters() const;
    /// t3 - t2 of every answered request, microseconds.
    std::vector<std::int64_t> responder_latencies() const;

    /// Makes all persisted rows visible on disk.
    void flush();

    void on_session_event(std::function<void(const SessionEvent&)> listener);

private:
    struct NodeState {
        NodeStatus status;
        std::deque<std::int64_t> recent_arrivals;
        std::int64_t last_sync_request_at = 0;
    };

    NodeState& node_locked(std::uint8_t id);
    void refresh_rate_locked(NodeState& node, std::int64_t now) const;
    void emit(const SessionEvent& event);

    ServerConfig config_;
    TimeSource now_;
    ControlSink control_;

    mutable std::mutex mutex_;
    std::map<std::uint8_t, NodeState> nodes_;
    std::map<std::uint8_t, BodyPosition> assigned_positions_;
    ServerCounters counters_;
    std::vector<std::int64_t> latencies_;
    std::vector<Session> finished_sessions_;
    std::optional<Session> active_;
    std::unique_ptr<SessionWriter> writer_;
    std::uint32_t next_session_id_ = 1;

    std::mutex listener_mutex_;
    std::vector<std::function<void(const SessionEvent&)>> listeners_;
};

struct UdpPorts {
    std::string bind_address = "0.0.0.0";
    std::uint16_t sync = protocol::kDefaultSyncPort;
    std::uint16_t data = protocol::kDefaultDataPort;
    std::uint16_t control = protocol::kDefaultControlPort;
    /// Destination for StartRecording/StopRecording.
    std::string broadcast_address = "255.255.255.255";
};

class UdpSocket;

/// Binds the sync and data ports and serves them on one thread each;
/// control messages go out on their own socket.
class UdpServer {
public:
    UdpServer(ServerCore& core, UdpPorts ports);
    ~UdpServer();

    /// Throws ConfigError when a port cannot be bound.
    void start();
    void stop();

    /// ControlSink bound to this server's sockets.
    ControlSink control_sink();

    std::uint16_t sync_port() const;
    std::uint16_t data_port() const;

private:
    void sync_loop();
    void data_loop();
    void send_control(const protocol::ControlMessage& msg, std::optional<std::uint8_t> node);

    ServerCore& core_;
    UdpPorts ports_;
    std::unique_ptr<UdpSocket> sync_socket_;
    std::unique_ptr<UdpSocket> data_socket_;
    std::unique_ptr<UdpSocket> control_socket_;
    std::mutex endpoints_mutex_;
    std::map<std::uint8_t, std::pair<std::uint32_t, std::uint16_t>> node_endpoints_;  // ipv4, port
    std::atomic<bool> running_{false};
    std::thread sync_thread_;
    std::thread data_thread_;
};

/// HTTP control API and server-sent event stream.
class ControlApi {
public:
    ControlApi(ServerCore& core, std::string bind_address, std::uint16_t port,
               std::int64_t status_period_ms = 1000, std::optional<std::filesystem::path> results_dir = {});
    ~ControlApi();

    void start();  // throws ConfigError on bind failure
    void stop();
    std::uint16_t port() const { return port_; }

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
    std::uint16_t port_;
};

}  // namespace harnode::server

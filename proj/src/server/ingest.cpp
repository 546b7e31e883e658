#include <algorithm>
#include <chrono>

#include <spdlog/spdlog.h>

#include "harnode/server.hpp"

namespace harnode::server {

std::int64_t wall_clock_us() {
    using namespace std::chrono;
    return duration_cast<microseconds>(system_clock::now().time_since_epoch()).count();
}

ServerCore::ServerCore(ServerConfig config, TimeSource now, ControlSink control)
    : config_(std::move(config)), now_(std::move(now)), control_(std::move(control)) {
    if (!now_) now_ = wall_clock_us;
}

ServerCore::~ServerCore() {
    if (writer_) writer_->flush();
}

ServerCore::NodeState& ServerCore::node_locked(std::uint8_t id) {
    auto [it, inserted] = nodes_.try_emplace(id);
    if (inserted) {
        it->second.status.node_id = id;
        if (auto pos = assigned_positions_.find(id); pos != assigned_positions_.end()) {
            it->second.status.position = pos->second;
        }
        spdlog::debug("registered node {}", id);
    }
    return it->second;
}

std::optional<std::vector<std::uint8_t>> ServerCore::handle_sync_request(std::span<const std::uint8_t> datagram,
                                                                         std::int64_t recv_time_us) {
    protocol::SyncRequest request;
    try {
        auto msg = protocol::decode_sync(datagram);
        if (!std::holds_alternative<protocol::SyncRequest>(msg)) throw MalformedPacket("response on request path");
        request = std::get<protocol::SyncRequest>(msg);
    } catch (const MalformedPacket& e) {
        std::lock_guard lock(mutex_);
        ++counters_.malformed_sync;
        spdlog::debug("dropped sync datagram: {}", e.what());
        return std::nullopt;
    }

    {
        std::lock_guard lock(mutex_);
        ++counters_.sync_requests;
        auto& node = node_locked(request.node_id);
        node.status.last_sync_offset_us = recv_time_us - static_cast<std::int64_t>(request.t1_us);
        node.last_sync_request_at = recv_time_us;
    }

    protocol::SyncResponse response;
    response.t1_us = request.t1_us;
    response.t2_us = static_cast<std::uint64_t>(recv_time_us);
    response.t3_us = std::max(response.t2_us, static_cast<std::uint64_t>(now_()));
    auto bytes = protocol::encode_sync(response);
    {
        std::lock_guard lock(mutex_);
        latencies_.push_back(static_cast<std::int64_t>(response.t3_us - response.t2_us));
    }
    return bytes;
}

void ServerCore::refresh_rate_locked(NodeState& node, std::int64_t now) const {
    auto& arrivals = node.recent_arrivals;
    while (!arrivals.empty() && arrivals.front() < now - config_.rate_window_us) arrivals.pop_front();
    if (arrivals.size() < 2) {
        node.status.packet_rate_hz = 0;
        return;
    }
    const double span_s = static_cast<double>(arrivals.back() - arrivals.front()) * 1e-6;
    node.status.packet_rate_hz = span_s > 0 ? static_cast<double>(arrivals.size() - 1) / span_s : 0.0;
}

void ServerCore::ingest_datagram(std::span<const std::uint8_t> datagram, std::int64_t recv_time_us) {
    protocol::DataPacket packet;
    try {
        packet = protocol::decode_data_packet(datagram);
    } catch (const MalformedPacket& e) {
        std::lock_guard lock(mutex_);
        ++counters_.malformed_data;
        spdlog::debug("dropped data datagram: {}", e.what());
        return;
    }

    const auto node_id = protocol::node_id_of(packet);
    const auto& samples = protocol::samples_of(packet);
    const auto count = static_cast<std::int64_t>(samples.size());
    const auto dt = config_.sampling_interval_us;

    std::vector<RecordRow> rows;
    rows.reserve(samples.size());
    std::int64_t seq = -1;
    std::int64_t t0 = 0;
    if (const auto* v2 = std::get_if<protocol::DataPacketV2>(&packet)) {
        seq = v2->seq;
        t0 = static_cast<std::int64_t>(v2->t_first_us);
    } else {
        // No timestamp on the wire: anchor the last sample at arrival.
        t0 = recv_time_us - (count - 1) * dt;
    }
    for (std::int64_t i = 0; i < count; ++i) {
        rows.push_back({t0 + i * dt, node_id, seq, samples[static_cast<std::size_t>(i)].axes()});
    }

    std::lock_guard lock(mutex_);
    auto& node = node_locked(node_id);
    if (seq >= 0) {
        if (node.status.last_seq >= 0 && seq <= node.status.last_seq) {
            ++counters_.duplicate_packets;
            return;
        }
        if (node.status.last_seq >= 0) {
            node.status.loss_count += static_cast<std::uint64_t>(seq - node.status.last_seq - 1);
        }
        node.status.last_seq = seq;
    }
    ++counters_.data_packets;
    ++node.status.packets_received;
    node.status.last_seen_us = recv_time_us;
    node.recent_arrivals.push_back(recv_time_us);
    refresh_rate_locked(node, recv_time_us);

    if (active_ && writer_) writer_->append(node_id, std::move(rows));
}

std::vector<NodeStatus> ServerCore::snapshot_status() const {
    const auto now = now_();
    std::lock_guard lock(mutex_);
    std::vector<NodeStatus> out;
    out.reserve(nodes_.size());
    for (const auto& [id, node] : nodes_) {
        NodeState copy = node;
        refresh_rate_locked(copy, now);
        NodeStatus s = copy.status;
        s.stale = now - s.last_seen_us > config_.stale_after_us;
        if (node.last_sync_request_at != 0) s.sync_age_us = now - node.last_sync_request_at;
        out.push_back(std::move(s));
    }
    return out;
}

ServerCounters ServerCore::counters() const {
    std::lock_guard lock(mutex_);
    return counters_;
}

std::vector<std::int64_t> ServerCore::responder_latencies() const {
    std::lock_guard lock(mutex_);
    return latencies_;
}

void ServerCore::set_position(std::uint8_t node_id, const BodyPosition& position) {
    std::lock_guard lock(mutex_);
    assigned_positions_[node_id] = position;
    if (auto it = nodes_.find(node_id); it != nodes_.end()) it->second.status.position = position;
}

void ServerCore::identify(std::uint8_t node_id) {
    if (control_) control_({protocol::ControlKind::Identify, 0, static_cast<std::uint64_t>(now_())}, node_id);
}

}  // namespace harnode::server

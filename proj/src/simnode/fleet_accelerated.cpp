#include <algorithm>
#include <random>

#include <spdlog/spdlog.h>

#include "harnode/error.hpp"
#include "harnode/simnode.hpp"

namespace harnode::sim {

namespace {

enum class EventKind { BurstStart, SyncSend, SyncAtServer, SyncAtNode, PacketDue, DataAtServer, ControlAtNode,
                       SessionStart, SessionStop };

struct Event {
    std::int64_t t = 0;
    std::uint64_t order = 0;
    EventKind kind = EventKind::BurstStart;
    std::size_t index = 0;  // node or subject
    std::int64_t aux = 0;   // return-leg delay for sync
    std::vector<std::uint8_t> bytes;
    protocol::ControlMessage control;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        return a.t != b.t ? a.t > b.t : a.order > b.order;
    }
};

class EventQueue {
public:
    void push(Event e) {
        e.order = next_order_++;
        heap_.push_back(std::move(e));
        std::push_heap(heap_.begin(), heap_.end(), Later{});
    }
    bool empty() const { return heap_.empty(); }
    std::int64_t next_time() const { return heap_.front().t; }
    Event pop() {
        std::pop_heap(heap_.begin(), heap_.end(), Later{});
        Event e = std::move(heap_.back());
        heap_.pop_back();
        return e;
    }

private:
    std::vector<Event> heap_;
    std::uint64_t next_order_ = 0;
};

Event event_at(std::int64_t t, EventKind kind, std::size_t index) {
    Event e;
    e.t = t;
    e.kind = kind;
    e.index = index;
    return e;
}

std::uint64_t digest_step(std::uint64_t h, std::uint64_t v) { return hash_combine(h, v); }

}  // namespace

FleetRunResult run_fleet_accelerated(const FleetConfig& config, server::ServerCore& server, VirtualClock& clock) {
    check_unique_ids(config.nodes);
    const SignalModel signal(config);
    const std::int64_t end = config.start_us + config.duration_us;

    std::vector<NodeProcess> nodes;
    nodes.reserve(config.nodes.size());
    for (const auto& nc : config.nodes) {
        auto c = nc;
        c.drift.t0_true_us = config.start_us;
        nodes.emplace_back(c, config.seed);
    }
    std::map<std::uint8_t, std::size_t> by_id;
    for (std::size_t i = 0; i < nodes.size(); ++i) by_id[nodes[i].config().node_id] = i;

    std::mt19937_64 net_rng(hash_combine(config.seed, 0x4E7ULL));
    std::uniform_int_distribution<std::int64_t> delay(config.network.delay_min_us, config.network.delay_max_us);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    FleetRunResult result;
    result.nodes.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) result.nodes[i].node_id = nodes[i].config().node_id;
    std::vector<std::int64_t> burst_started(nodes.size(), 0);

    EventQueue queue;
    clock.set(config.start_us);

    server.set_control_sink([&](const protocol::ControlMessage& msg, std::optional<std::uint8_t> target) {
        const auto now = clock.now();
        auto deliver = [&](std::size_t i) {
            Event e;
            e.t = now + delay(net_rng);
            e.kind = EventKind::ControlAtNode;
            e.index = i;
            e.control = msg;
            queue.push(std::move(e));
        };
        if (!target) {
            for (std::size_t i = 0; i < nodes.size(); ++i) deliver(i);
        } else if (auto it = by_id.find(*target); it != by_id.end()) {
            deliver(it->second);
        }
    });

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        queue.push(event_at(config.start_us + static_cast<std::int64_t>(i) * 997, EventKind::BurstStart, i));
    }
    bool own_session = false;
    if (config.manage_sessions) {
        for (std::size_t s = 0; s < config.schedule.subjects.size(); ++s) {
            const auto& subj = config.schedule.subjects[s];
            if (subj.segments.empty()) continue;
            queue.push(event_at(subj.start_us() - config.session_margin_us, EventKind::SessionStart, s));
            queue.push(event_at(subj.end_us() + config.session_margin_us, EventKind::SessionStop, s));
        }
    }

    std::map<std::uint8_t, BodyPosition> positions;
    for (const auto& n : nodes) positions[n.config().node_id] = n.config().position;

    while (!queue.empty() && queue.next_time() <= end) {
        Event ev = queue.pop();
        const std::int64_t t = ev.t;
        clock.set(t);
        switch (ev.kind) {
            case EventKind::BurstStart: {
                nodes[ev.index].begin_burst();
                burst_started[ev.index] = t;
                queue.push(event_at(t, EventKind::SyncSend, ev.index));
                break;
            }
            case EventKind::SyncSend: {
                Event e;
                e.bytes = nodes[ev.index].make_sync_request(t);
                const auto out = delay(net_rng);
                e.aux = config.network.symmetric_sync ? out : delay(net_rng);
                e.t = t + out;
                e.kind = EventKind::SyncAtServer;
                e.index = ev.index;
                queue.push(std::move(e));
                break;
            }
            case EventKind::SyncAtServer: {
                const auto depart = t + config.network.server_processing_us;
                clock.set(depart);
                auto response = server.handle_sync_request(ev.bytes, t);
                if (!response) break;
                Event e;
                e.t = depart + ev.aux;
                e.kind = EventKind::SyncAtNode;
                e.index = ev.index;
                e.bytes = std::move(*response);
                queue.push(std::move(e));
                break;
            }
            case EventKind::SyncAtNode: {
                auto& node = nodes[ev.index];
                const bool stepped = node.on_sync_response(ev.bytes, t);
                if (!node.burst_complete()) {
                    queue.push(event_at(t, EventKind::SyncSend, ev.index));
                    break;
                }
                if (!stepped) break;
                ++result.nodes[ev.index].sync_bursts;
                queue.push(event_at(burst_started[ev.index] + node.config().resync_interval_us, EventKind::BurstStart, ev.index));
                if (!node.sampling()) {
                    node.start_sampling(t);
                    queue.push(event_at(node.next_packet_due_true_us(), EventKind::PacketDue, ev.index));
                }
                break;
            }
            case EventKind::PacketDue: {
                auto& node = nodes[ev.index];
                auto& stats = result.nodes[ev.index];
                const auto first_true = node.next_packet_first_true_us();
                stats.offset_errors_us.push_back(node.offset_error_us(first_true));
                const auto& position = node.config().position;
                auto bytes = node.emit_packet([&](std::int64_t ts) { return signal.sample(position, ts); });
                const bool dropped =
                    config.network.loss_probability > 0 && unit(net_rng) < config.network.loss_probability;
                ++stats.packets_sent;
                stats.packet_send_times_us.push_back(t);
                if (dropped) ++stats.packets_dropped;

                auto& h = result.log_digest;
                h = digest_step(h, static_cast<std::uint64_t>(t));
                h = digest_step(h, (static_cast<std::uint64_t>(node.config().node_id) << 1) | (dropped ? 1 : 0));
                for (auto b : bytes) h = digest_step(h, b);
                if (config.keep_packet_log) result.log.push_back({t, node.config().node_id, dropped, bytes});

                if (!dropped) {
                    Event e;
                    e.t = t + delay(net_rng);
                    e.kind = EventKind::DataAtServer;
                    e.index = ev.index;
                    e.bytes = std::move(bytes);
                    queue.push(std::move(e));
                }
                queue.push(event_at(node.next_packet_due_true_us(), EventKind::PacketDue, ev.index));
                break;
            }
            case EventKind::DataAtServer:
                server.ingest_datagram(ev.bytes, t);
                break;
            case EventKind::ControlAtNode:
                nodes[ev.index].on_control(ev.control);
                break;
            case EventKind::SessionStart: {
                const auto& subj = config.schedule.subjects[ev.index];
                try {
                    const auto session = server.start_session(
                        positions, server::SubjectInfo{subj.subject_id, subj.footedness}, config.label_file);
                    result.session_ids.push_back(session.session_id);
                    own_session = true;
                } catch (const SessionAlreadyActive& e) {
                    spdlog::warn("subject {}: {}", subj.subject_id, e.what());
                }
                break;
            }
            case EventKind::SessionStop:
                if (own_session) {
                    server.stop_session();
                    own_session = false;
                }
                break;
        }
    }

    while (!queue.empty()) {
        Event ev = queue.pop();
        if (ev.kind != EventKind::DataAtServer) continue;
        clock.set(ev.t);
        server.ingest_datagram(ev.bytes, ev.t);
    }
    clock.set(std::max(end, clock.now()));
    if (own_session) server.stop_session();
    server.flush();
    server.set_control_sink({});

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        result.nodes[i].sessions_noted = nodes[i].sessions_noted();
        result.nodes[i].identify_count = nodes[i].identify_count();
    }
    result.end_us = end;
    return result;
}

}  // namespace harnode::sim

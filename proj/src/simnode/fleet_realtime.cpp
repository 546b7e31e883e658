#include <algorithm>
#include <queue>
#include <random>
#include <thread>

#include <spdlog/spdlog.h>

#include "harnode/error.hpp"
#include "harnode/net.hpp"
#include "harnode/simnode.hpp"

namespace harnode::sim {

using server::Datagram;
using server::Endpoint;
using server::UdpSocket;
using server::wall_clock_us;

namespace {

constexpr int kExchangeAttempts = 5;
constexpr auto kExchangeTimeout = std::chrono::milliseconds(300);
constexpr std::int64_t kBurstRetryUs = 1'000'000;

enum class Due { Packet, Burst, SessionStart, SessionStop };

struct Pending {
    std::int64_t t;
    std::uint64_t order;
    Due kind;
    std::size_t index;
    bool operator>(const Pending& o) const { return t != o.t ? t > o.t : order > o.order; }
};

struct RealtimeNode {
    NodeProcess process;
    UdpSocket socket;
};

void handle_node_datagram(RealtimeNode& node, const Datagram& d) {
    if (d.bytes.size() == protocol::kControlBytes) {
        try {
            node.process.on_control(protocol::decode_control(d.bytes));
        } catch (const MalformedPacket&) {
        }
    }
}

/// One blocking three-exchange burst; false when the server did not answer.
bool run_burst(RealtimeNode& node, const Endpoint& sync_ep) {
    node.process.begin_burst();
    while (!node.process.burst_complete()) {
        bool answered = false;
        for (int attempt = 0; attempt < kExchangeAttempts && !answered; ++attempt) {
            node.socket.send_to(sync_ep, node.process.make_sync_request(wall_clock_us()));
            const auto deadline = std::chrono::steady_clock::now() + kExchangeTimeout;
            while (!answered) {
                const auto left =
                    std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
                if (left.count() <= 0) break;
                auto d = node.socket.receive(left);
                if (!d) break;
                const auto t4 = wall_clock_us();
                if (d->bytes.size() == protocol::kSyncResponseBytes) {
                    const auto before = node.process.exchanges_in_burst();
                    node.process.on_sync_response(d->bytes, t4);
                    answered = node.process.exchanges_in_burst() != before;
                    if (!answered && !node.process.awaiting_response()) break;
                } else {
                    handle_node_datagram(node, *d);
                }
            }
        }
        if (!answered) return false;
    }
    return true;
}

}  // namespace

FleetRunResult run_fleet_realtime(const FleetConfig& config, const RealtimeOptions& options) {
    check_unique_ids(config.nodes);
    const SignalModel signal(config);
    const Endpoint sync_ep = Endpoint::resolve(config.server_host, config.sync_port);
    const Endpoint data_ep = Endpoint::resolve(config.server_host, config.data_port);

    const std::int64_t t0 = wall_clock_us();
    const std::int64_t end = t0 + options.duration_us;

    std::vector<RealtimeNode> nodes;
    nodes.reserve(config.nodes.size());
    for (const auto& nc : config.nodes) {
        auto c = nc;
        c.drift.t0_true_us = t0;
        RealtimeNode node{NodeProcess(c, config.seed), UdpSocket()};
        node.socket.bind("0.0.0.0", 0);
        nodes.push_back(std::move(node));
    }

    std::optional<UdpSocket> control;
    if (options.listen_control) {
        try {
            UdpSocket s;
            s.bind("0.0.0.0", config.control_port, true);
            control = std::move(s);
        } catch (const ConfigError& e) {
            spdlog::warn("control listener disabled: {}", e.what());
        }
    }

    std::mt19937_64 rng(hash_combine(config.seed, 0x4E7ULL));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    FleetRunResult result;
    result.nodes.resize(nodes.size());
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> due;
    std::uint64_t order = 0;

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        result.nodes[i].node_id = nodes[i].process.config().node_id;
        due.push({t0, order++, Due::Burst, i});
    }
    if (options.sessions) {
        for (std::size_t s = 0; s < config.schedule.subjects.size(); ++s) {
            const auto& subj = config.schedule.subjects[s];
            if (subj.segments.empty()) continue;
            due.push({subj.start_us() - config.session_margin_us, order++, Due::SessionStart, s});
            due.push({subj.end_us() + config.session_margin_us, order++, Due::SessionStop, s});
        }
    }

    auto cancelled = [&] { return options.cancel && options.cancel->load(); };
    auto drain_incoming = [&] {
        if (control) {
            while (auto d = control->try_receive()) {
                if (d->bytes.size() != protocol::kControlBytes) continue;
                try {
                    const auto msg = protocol::decode_control(d->bytes);
                    for (auto& n : nodes) n.process.on_control(msg);
                } catch (const MalformedPacket&) {
                }
            }
        }
        for (auto& n : nodes) {
            while (auto d = n.socket.try_receive()) handle_node_datagram(n, *d);
        }
    };

    while (!due.empty() && !cancelled()) {
        const Pending next = due.top();
        if (next.t > end) break;
        const auto wait = next.t - wall_clock_us();
        if (wait > 0) {
            drain_incoming();
            std::this_thread::sleep_for(std::chrono::microseconds(std::min<std::int64_t>(wait, 20'000)));
            continue;
        }
        due.pop();
        const auto now = wall_clock_us();
        switch (next.kind) {
            case Due::Burst: {
                auto& node = nodes[next.index];
                if (!run_burst(node, sync_ep)) {
                    spdlog::warn("node {}: no sync response", node.process.config().node_id);
                    due.push({now + kBurstRetryUs, order++, Due::Burst, next.index});
                    break;
                }
                ++result.nodes[next.index].sync_bursts;
                due.push({now + node.process.config().resync_interval_us, order++, Due::Burst, next.index});
                if (!node.process.sampling()) {
                    node.process.start_sampling(wall_clock_us());
                    due.push({node.process.next_packet_due_true_us(), order++, Due::Packet, next.index});
                }
                break;
            }
            case Due::Packet: {
                auto& node = nodes[next.index];
                auto& stats = result.nodes[next.index];
                stats.offset_errors_us.push_back(node.process.offset_error_us(node.process.next_packet_first_true_us()));
                const auto& position = node.process.config().position;
                auto bytes = node.process.emit_packet([&](std::int64_t ts) { return signal.sample(position, ts); });
                const bool dropped =
                    config.network.loss_probability > 0 && unit(rng) < config.network.loss_probability;
                const auto send_at = wall_clock_us();
                ++stats.packets_sent;
                stats.packet_send_times_us.push_back(send_at);
                if (dropped) {
                    ++stats.packets_dropped;
                } else {
                    node.socket.send_to(data_ep, bytes);
                }
                auto& h = result.log_digest;
                h = hash_combine(h, static_cast<std::uint64_t>(node.process.config().node_id) << 1 | (dropped ? 1 : 0));
                for (auto b : bytes) h = hash_combine(h, b);
                if (config.keep_packet_log) {
                    result.log.push_back({send_at, node.process.config().node_id, dropped, std::move(bytes)});
                }
                due.push({node.process.next_packet_due_true_us(), order++, Due::Packet, next.index});
                break;
            }
            case Due::SessionStart:
                try {
                    options.sessions->start(config.schedule.subjects[next.index]);
                } catch (const std::exception& e) {
                    spdlog::warn("session start failed: {}", e.what());
                }
                break;
            case Due::SessionStop:
                try {
                    options.sessions->stop(config.schedule.subjects[next.index]);
                } catch (const std::exception& e) {
                    spdlog::warn("session stop failed: {}", e.what());
                }
                break;
        }
    }
    drain_incoming();

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        result.nodes[i].sessions_noted = nodes[i].process.sessions_noted();
        result.nodes[i].identify_count = nodes[i].process.identify_count();
    }
    result.end_us = wall_clock_us();
    return result;
}

}  // namespace harnode::sim

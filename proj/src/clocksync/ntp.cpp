#include "harnode/clocksync.hpp"

namespace harnode::clocksync {

OffsetDelay compute_offset_delay(const SyncExchange& e) {
    if (e.t4_us < e.t1_us) throw InvalidExchange("t4 precedes t1");
    if (e.t3_us < e.t2_us) throw InvalidExchange("t3 precedes t2");
    const std::int64_t twice = (e.t2_us - e.t1_us) + (e.t3_us - e.t4_us);
    const std::int64_t delay = (e.t4_us - e.t1_us) - (e.t3_us - e.t2_us);
    if (delay < 0) throw InvalidExchange("negative round-trip delay");
    // Integer division truncates toward zero, which is the rounding we want.
    return {twice / 2, static_cast<std::uint64_t>(delay)};
}

std::size_t select_exchange_index(const std::array<SyncExchange, kBurstSize>& burst) {
    std::size_t best = 0;
    std::uint64_t best_delay = compute_offset_delay(burst[0]).delay_us;
    for (std::size_t i = 1; i < burst.size(); ++i) {
        const auto d = compute_offset_delay(burst[i]).delay_us;
        if (d < best_delay) {
            best = i;
            best_delay = d;
        }
    }
    return best;
}

SyncExchange select_exchange(const std::array<SyncExchange, kBurstSize>& burst) {
    return burst[select_exchange_index(burst)];
}

SyncState::SyncState(std::int64_t resync_interval_us, std::size_t history_capacity)
    : resync_interval_us_(resync_interval_us), history_capacity_(history_capacity) {
    if (history_capacity_ == 0) throw InvalidArgument("history capacity must be positive");
}

std::int64_t SyncState::offset_us() const {
    if (!synchronized()) throw Unsynchronized("no accepted sync exchange yet");
    return offset_us_;
}

void SyncState::apply(const SyncExchange& accepted, std::int64_t now_server_us) {
    const auto od = compute_offset_delay(accepted);
    offset_us_ = od.offset_us;
    last_sync_at_us_ = now_server_us;
    if (history_.size() == history_capacity_) history_.pop_front();
    history_.push_back({accepted, od.offset_us, od.delay_us, now_server_us});
}

bool SyncState::resync_due(std::int64_t now_server_us) const {
    return !synchronized() || now_server_us - *last_sync_at_us_ >= resync_interval_us_;
}

std::int64_t SyncState::node_to_server(std::int64_t t_node_us) const { return t_node_us + offset_us(); }

std::int64_t SyncState::server_to_node(std::int64_t t_server_us) const { return t_server_us - offset_us(); }

SyncState apply_sync(SyncState state, const SyncExchange& accepted, std::int64_t now_server_us) {
    state.apply(accepted, now_server_us);
    return state;
}

std::int64_t node_to_server_time(const SyncState& state, std::int64_t t_node_us) {
    return state.node_to_server(t_node_us);
}

std::int64_t server_to_node_time(const SyncState& state, std::int64_t t_server_us) {
    return state.server_to_node(t_server_us);
}

}  // namespace harnode::clocksync

#pragma once

// NTP-style offset estimation and the drifting node-clock model.
//
// Sign convention: offset = server_time - node_time, so a node maps its own
// reading to server time by adding the offset.

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>

#include "harnode/error.hpp"

namespace harnode::clocksync {

inline constexpr std::int64_t kDefaultResyncIntervalUs = 60'000'000;
inline constexpr std::size_t kDefaultHistoryCapacity = 64;
inline constexpr std::size_t kBurstSize = 3;

/// The four timestamps of one request/response exchange. t1 and t4 are read
/// from the node clock, t2 and t3 from the server clock.
struct SyncExchange {
    std::int64_t t1_us = 0;
    std::int64_t t2_us = 0;
    std::int64_t t3_us = 0;
    std::int64_t t4_us = 0;
};

struct OffsetDelay {
    std::int64_t offset_us = 0;
    std::uint64_t delay_us = 0;
};

/// offset = ((t2-t1)+(t3-t4))/2 rounded toward zero; delay = (t4-t1)-(t3-t2).
/// Throws InvalidExchange when t4 < t1, t3 < t2 or the delay is negative.
OffsetDelay compute_offset_delay(const SyncExchange& e);

/// Index (0-based) of the minimal-delay exchange; earliest wins ties.
std::size_t select_exchange_index(const std::array<SyncExchange, kBurstSize>& burst);
SyncExchange select_exchange(const std::array<SyncExchange, kBurstSize>& burst);

struct HistoryEntry {
    SyncExchange exchange;
    std::int64_t offset_us = 0;
    std::uint64_t delay_us = 0;
    std::int64_t accepted_at_us = 0;
};

class SyncState {
public:
    explicit SyncState(std::int64_t resync_interval_us = kDefaultResyncIntervalUs,
                       std::size_t history_capacity = kDefaultHistoryCapacity);

    bool synchronized() const { return last_sync_at_us_.has_value(); }
    std::int64_t offset_us() const;
    std::optional<std::int64_t> last_sync_at_us() const { return last_sync_at_us_; }
    std::int64_t resync_interval_us() const { return resync_interval_us_; }
    const std::deque<HistoryEntry>& history() const { return history_; }
    std::size_t history_capacity() const { return history_capacity_; }

    /// Steps the offset to the accepted exchange's estimate.
    void apply(const SyncExchange& accepted, std::int64_t now_server_us);

    bool resync_due(std::int64_t now_server_us) const;

    std::int64_t node_to_server(std::int64_t t_node_us) const;
    std::int64_t server_to_node(std::int64_t t_server_us) const;

private:
    std::int64_t offset_us_ = 0;
    std::optional<std::int64_t> last_sync_at_us_;
    std::int64_t resync_interval_us_;
    std::size_t history_capacity_;
    std::deque<HistoryEntry> history_;
};

/// Value-returning form of SyncState::apply.
SyncState apply_sync(SyncState state, const SyncExchange& accepted, std::int64_t now_server_us);
std::int64_t node_to_server_time(const SyncState& state, std::int64_t t_node_us);
std::int64_t server_to_node_time(const SyncState& state, std::int64_t t_server_us);

struct DriftClockParams {
    std::int64_t t0_true_us = 0;
    std::int64_t initial_offset_us = 0;
    double drift_rate = 0.0;      // node seconds per true second, minus one
    double jitter_std_us = 0.0;   // Gaussian read noise
};

inline constexpr double kMaxDriftRate = 1e-4;

/// A free-running oscillator: linear rate error plus read jitter. Reads are
/// clamped so the reported time never goes backwards.
class DriftClock {
public:
    DriftClock(const DriftClockParams& params, std::uint64_t seed);

    const DriftClockParams& params() const { return params_; }

    /// Noise-free node time at a true instant.
    std::int64_t ideal(std::int64_t t_true_us) const;
    /// True instant at which the noise-free node clock shows t_node_us.
    std::int64_t true_time_of(std::int64_t t_node_us) const;

    /// Node time with jitter; monotone across calls in true time.
    std::int64_t read(std::int64_t t_true_us);

private:
    DriftClockParams params_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> jitter_;
    std::int64_t last_read_;
    bool has_read_ = false;
};

std::int64_t read_clock(DriftClock& clock, std::int64_t t_true_us);

}  // namespace harnode::clocksync

#include <algorithm>
#include <cmath>

#include "harnode/error.hpp"
#include "harnode/simnode.hpp"

namespace harnode::sim {

NodeProcess::NodeProcess(const NodeConfig& config, std::uint64_t seed)
    : config_(config),
      clock_(config.drift, hash_combine(seed, 0xC10C0000ULL + config.node_id)),
      sync_(config.resync_interval_us) {
    if (config_.samples_per_packet == 0 || config_.samples_per_packet > 255) {
        throw ConfigError("samples_per_packet must be 1..255");
    }
    if (config_.sampling_interval_us <= 0) throw ConfigError("sampling interval must be positive");
    if (config_.packet_version != 1 && config_.packet_version != 2) throw ConfigError("packet_version must be 1 or 2");
}

void NodeProcess::begin_burst() {
    burst_count_ = 0;
    pending_t1_.reset();
}

std::vector<std::uint8_t> NodeProcess::make_sync_request(std::int64_t t_true_us) {
    const auto t1 = clock_.read(t_true_us);
    pending_t1_ = t1;
    return protocol::encode_sync(protocol::SyncRequest{config_.node_id, static_cast<std::uint64_t>(t1)});
}

bool NodeProcess::on_sync_response(std::span<const std::uint8_t> datagram, std::int64_t t_true_us) {
    if (!pending_t1_ || burst_complete()) return false;
    protocol::SyncMessage msg;
    try {
        msg = protocol::decode_sync(datagram);
    } catch (const MalformedPacket&) {
        return false;
    }
    const auto* resp = std::get_if<protocol::SyncResponse>(&msg);
    if (!resp || static_cast<std::int64_t>(resp->t1_us) != *pending_t1_) return false;

    const auto t4 = clock_.read(t_true_us);
    const clocksync::SyncExchange exchange{*pending_t1_, static_cast<std::int64_t>(resp->t2_us),
                                           static_cast<std::int64_t>(resp->t3_us), t4};
    pending_t1_.reset();
    if ((exchange.t4_us - exchange.t1_us) < (exchange.t3_us - exchange.t2_us)) {
        ++exchanges_discarded_;
        return false;
    }
    burst_[burst_count_++] = exchange;
    if (!burst_complete()) return false;

    sync_.apply(clocksync::select_exchange(burst_), t_true_us);
    offset_changes_.emplace_back(t_true_us, sync_.offset_us());
    ++bursts_completed_;
    return true;
}

void NodeProcess::start_sampling(std::int64_t t_true_us) {
    if (!sync_.synchronized()) throw Unsynchronized("node " + std::to_string(config_.node_id));
    const auto dt = config_.sampling_interval_us;
    const auto now_node = clock_.ideal(t_true_us);
    grid_origin_node_us_ = (now_node / dt + 1) * dt;
    next_sample_index_ = 0;
    sampling_ = true;
}

std::int64_t NodeProcess::sample_true_time(std::int64_t index) const {
    return clock_.true_time_of(grid_origin_node_us_ + index * config_.sampling_interval_us);
}

std::int64_t NodeProcess::next_packet_first_true_us() const { return sample_true_time(next_sample_index_); }

std::int64_t NodeProcess::next_packet_due_true_us() const {
    return sample_true_time(next_sample_index_ + static_cast<std::int64_t>(config_.samples_per_packet) - 1);
}

std::vector<std::uint8_t> NodeProcess::emit_packet(
    const std::function<protocol::SensorSample(std::int64_t)>& sample_at) {
    if (!sampling_) throw InvalidArgument("node is not sampling");
    const auto n = static_cast<std::int64_t>(config_.samples_per_packet);
    std::vector<protocol::SensorSample> samples;
    samples.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) samples.push_back(sample_at(sample_true_time(next_sample_index_ + i)));

    const auto first_node = grid_origin_node_us_ + next_sample_index_ * config_.sampling_interval_us;
    const auto t_first = first_node + offset_at(sample_true_time(next_sample_index_));
    next_sample_index_ += n;

    if (config_.packet_version == 1) {
        ++next_seq_;
        return protocol::encode_data_packet(protocol::DataPacketV1{config_.node_id, std::move(samples)});
    }
    return protocol::encode_data_packet(protocol::DataPacketV2{
        config_.node_id, next_seq_++, static_cast<std::uint64_t>(std::max<std::int64_t>(t_first, 0)),
        std::move(samples)});
}

std::int64_t NodeProcess::offset_at(std::int64_t t_true_us) const {
    auto it = std::upper_bound(offset_changes_.begin(), offset_changes_.end(), t_true_us,
                               [](std::int64_t t, const auto& change) { return t < change.first; });
    if (it == offset_changes_.begin()) return 0;
    return std::prev(it)->second;
}

double NodeProcess::offset_error_us(std::int64_t t_true_us) const {
    const auto actual = t_true_us - clock_.ideal(t_true_us);
    return std::abs(static_cast<double>(offset_at(t_true_us) - actual));
}

void NodeProcess::on_control(const protocol::ControlMessage& msg) {
    switch (msg.kind) {
        case protocol::ControlKind::StartRecording:
            sessions_noted_.push_back(msg.session_id);
            break;
        case protocol::ControlKind::StopRecording:
            break;
        case protocol::ControlKind::Identify:
            ++identify_count_;
            break;
    }
}

SignalModel::SignalModel(const FleetConfig& config)
    : schedule_(config.schedule),
      seed_(hash_combine(config.seed, 0x516A1ULL)),
      idle_(with_activity(config.gait, Activity::Walking)) {
    for (const auto& subject : config.schedule.subjects) {
        const auto base = subject_profile(config.gait, subject.subject_id, subject.footedness, config.seed);
        profiles_[subject.subject_id] = {with_activity(base, Activity::Walking),
                                         with_activity(base, Activity::TowardsStairs)};
    }
}

protocol::SensorSample SignalModel::sample(const BodyPosition& position, std::int64_t t_true_us) const {
    const auto* subject = schedule_.subject_at(t_true_us);
    if (!subject) return generate_sample(idle_, position, t_true_us, seed_);
    const auto& pair = profiles_.at(subject->subject_id);
    const auto activity = schedule_.activity_at(t_true_us);
    return generate_sample(pair[static_cast<std::size_t>(activity)], position, t_true_us,
                           hash_combine(seed_, subject->subject_id));
}

}  // namespace harnode::sim

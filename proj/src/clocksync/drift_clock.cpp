#include <cmath>
#include <string>

#include "harnode/clocksync.hpp"

namespace harnode::clocksync {

DriftClock::DriftClock(const DriftClockParams& params, std::uint64_t seed)
    : params_(params), rng_(seed), jitter_(0.0, params.jitter_std_us > 0 ? params.jitter_std_us : 1.0) {
    if (std::abs(params_.drift_rate) > kMaxDriftRate) {
        throw InvalidArgument("drift_rate " + std::to_string(params_.drift_rate) + " exceeds 1e-4");
    }
    if (params_.jitter_std_us < 0) throw InvalidArgument("negative jitter");
    last_read_ = params_.initial_offset_us;
}

std::int64_t DriftClock::ideal(std::int64_t t_true_us) const {
    const auto elapsed = static_cast<double>(t_true_us - params_.t0_true_us);
    return params_.initial_offset_us + std::llround(elapsed * (1.0 + params_.drift_rate));
}

std::int64_t DriftClock::true_time_of(std::int64_t t_node_us) const {
    const auto local = static_cast<double>(t_node_us - params_.initial_offset_us);
    return params_.t0_true_us + std::llround(local / (1.0 + params_.drift_rate));
}

std::int64_t DriftClock::read(std::int64_t t_true_us) {
    if (t_true_us < params_.t0_true_us) throw InvalidArgument("clock read before its creation");
    std::int64_t t = ideal(t_true_us);
    if (params_.jitter_std_us > 0) t += std::llround(jitter_(rng_));
    if (has_read_ && t < last_read_) t = last_read_;
    last_read_ = t;
    has_read_ = true;
    return t;
}

std::int64_t read_clock(DriftClock& clock, std::int64_t t_true_us) { return clock.read(t_true_us); }

}  // namespace harnode::clocksync

#include "harnode/gait.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace harnode::sim {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct SiteTemplate {
    Location location;
    std::array<double, 3> accel;  // fundamental amplitude, m/s^2
    std::array<double, 3> gyro;   // fundamental amplitude, deg/s
    double contrast;
    double phase;
    double mag_tilt;
};

// Site noise scales with vertical motion amplitude relative to this value.
constexpr double kReferenceVerticalAccel = 3.0;

// Right-footed wearer: the right (dominant) side carries the stronger
// approach signature.
constexpr std::array<SiteTemplate, kLocationCount> kSites = {{
    {Location::LeftFoot, {3.0, 1.5, 6.0}, {220, 40, 60}, 0.60, 0.0, 0.35},
    {Location::RightFoot, {3.0, 1.5, 6.0}, {220, 40, 60}, 1.00, std::numbers::pi, 0.35},
    {Location::LeftShin, {2.2, 1.2, 4.5}, {160, 30, 40}, 0.50, 0.3, 0.25},
    {Location::RightShin, {2.2, 1.2, 4.5}, {160, 30, 40}, 0.75, std::numbers::pi + 0.3, 0.25},
    {Location::LeftThigh, {1.6, 1.0, 3.2}, {110, 20, 30}, 0.30, 0.6, 0.18},
    {Location::RightThigh, {1.6, 1.0, 3.2}, {110, 20, 30}, 0.80, std::numbers::pi + 0.6, 0.18},
    {Location::Waist, {1.0, 1.2, 2.2}, {18, 14, 10}, 0.35, 0.0, 0.05},
    {Location::Head, {0.7, 0.6, 1.4}, {10, 12, 8}, 0.20, 0.2, 0.04},
    {Location::Chest, {0.8, 0.7, 1.6}, {12, 10, 8}, 0.20, 0.1, 0.04},
    {Location::LeftWrist, {2.0, 1.8, 2.2}, {90, 60, 40}, 0.25, std::numbers::pi, 0.30},
    {Location::RightWrist, {2.0, 1.8, 2.2}, {90, 60, 40}, 0.45, 0.0, 0.30},
}};

double unit_uniform(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

double hashed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return unit_uniform(mix64(hash_combine(hash_combine(hash_combine(seed, a), b), c)));
}

double hashed_gaussian(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    const std::uint64_t h = hash_combine(hash_combine(hash_combine(seed, a), b), c);
    const double u1 = 1.0 - unit_uniform(mix64(h));  // (0, 1]
    const double u2 = unit_uniform(mix64(h ^ 0xA5A5A5A5A5A5A5A5ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

// Three slow sinusoids, 0.03-0.25 Hz, unit-ish amplitude.
double wander(std::uint64_t seed, std::uint64_t site, std::uint64_t axis, double t_s) {
    constexpr std::array<double, 3> kWeights = {0.8, 0.45, 0.25};
    double v = 0;
    for (std::uint64_t j = 0; j < kWeights.size(); ++j) {
        const double freq = 0.03 + 0.22 * hashed_uniform(seed, 1000 + site, axis, 2 * j);
        const double phase = kTwoPi * hashed_uniform(seed, 1000 + site, axis, 2 * j + 1);
        v += kWeights[j] * std::sin(kTwoPi * freq * t_s + phase);
    }
    return v;
}

std::pair<double, double> orient(Orientation o, double x, double y) {
    switch (o) {
        case Orientation::Front: return {x, y};
        case Orientation::Back: return {-x, -y};
        case Orientation::Left: return {y, -x};
        case Orientation::Right: return {-y, x};
    }
    return {x, y};
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) { return mix64(a ^ (mix64(b) + 0x632BE59BD9B4E019ULL)); }

GaitProfile default_gait_profile() {
    GaitProfile p;
    for (const auto& t : kSites) {
        SiteModel& s = p.sites[static_cast<std::size_t>(t.location)];
        s.contrast = t.contrast;
        s.gait_phase = t.phase;
        s.mag_tilt = t.mag_tilt;
        s.noise_gain = t.accel[2] / kReferenceVerticalAccel;
        for (std::size_t k = 0; k < 3; ++k) {
            AxisModel& a = s.motion[k];
            a.a1 = t.accel[k];
            a.a2 = 0.4 * t.accel[k];
            a.phase1 = 0.7 * static_cast<double>(k);
            a.phase2 = 1.3 * static_cast<double>(k) + 0.4;
            a.shift = 0.35 * t.accel[k];
            a.tremor = 0.25 * t.accel[k];
            AxisModel& g = s.motion[3 + k];
            g.a1 = t.gyro[k];
            g.a2 = 0.3 * t.gyro[k];
            g.phase1 = 0.5 + 0.9 * static_cast<double>(k);
            g.phase2 = 0.2 + 1.1 * static_cast<double>(k);
            g.shift = 0.12 * t.gyro[k];
            g.tremor = 0.2 * t.gyro[k];
        }
        s.motion[0].bias = 0.4;
        s.motion[1].bias = -0.3;
        s.motion[2].bias = kGravity;
    }
    p.noise_std = {0.3, 0.3, 0.3, 4.0, 4.0, 4.0, 0.6, 0.6, 0.6};
    return p;
}

GaitProfile subject_profile(const GaitProfile& base, std::uint32_t subject_id, Footedness footedness,
                            std::uint64_t seed) {
    GaitProfile p = base;
    const std::uint64_t s = hash_combine(seed, 0x5B1EC7ULL + subject_id);
    auto u = [&](std::uint64_t a, std::uint64_t b) { return hashed_uniform(s, a, b, 0); };

    p.step_frequency_hz *= 0.92 + 0.16 * u(1, 0);
    p.heading_rad = kTwoPi * u(2, 0);
    const double effect = 0.8 + 0.4 * u(3, 0);
    p.stairs_frequency_drop *= effect;
    p.stairs_amplitude_gain *= effect;
    for (std::size_t site = 0; site < kLocationCount; ++site) {
        SiteModel& m = p.sites[site];
        const double scale = 0.85 + 0.3 * u(10 + site, 0);
        for (std::size_t k = 0; k < m.motion.size(); ++k) {
            AxisModel& a = m.motion[k];
            a.a1 *= scale;
            a.a2 *= scale;
            a.shift *= effect;
            a.tremor *= effect;
            const double spread = k < 3 ? 0.25 : 0.03;
            a.bias += spread * a.a1 * (2.0 * u(100 + site, k) - 1.0);
        }
    }
    if (footedness == Footedness::Left) {
        auto swap_sites = [&](Location l, Location r) {
            std::swap(p.sites[static_cast<std::size_t>(l)], p.sites[static_cast<std::size_t>(r)]);
        };
        swap_sites(Location::LeftFoot, Location::RightFoot);
        swap_sites(Location::LeftShin, Location::RightShin);
        swap_sites(Location::LeftThigh, Location::RightThigh);
        swap_sites(Location::LeftWrist, Location::RightWrist);
    }
    return p;
}

GaitProfile with_activity(GaitProfile profile, Activity activity) {
    profile.activity = activity;
    return profile;
}

protocol::SensorSample generate_sample(const GaitProfile& profile, const BodyPosition& position, std::int64_t t_us,
                                       std::uint64_t seed) {
    const auto site = static_cast<std::size_t>(position.location);
    const SiteModel& m = profile.sites[site];
    const double t_s = static_cast<double>(t_us) * 1e-6;
    bool towards = profile.activity == Activity::TowardsStairs;
    if (profile.artifact_probability > 0) {
        const auto slot = static_cast<std::uint64_t>(std::floor(t_s / profile.artifact_slot_s));
        if (hashed_uniform(seed, 2000 + site, slot, 0) < profile.artifact_probability) towards = !towards;
    }
    const double e = towards ? m.contrast : 0.0;

    double cadence = 0.0;
    if (profile.activity == Activity::TowardsStairs) {
        for (const auto& s : profile.sites) cadence = std::max(cadence, s.contrast);
    }
    const double freq = profile.step_frequency_hz * (1.0 - profile.stairs_frequency_drop * cadence);
    const double theta = kTwoPi * freq * t_s + m.gait_phase;
    const double gain = 1.0 + profile.stairs_amplitude_gain * e;

    std::array<double, 9> v{};
    for (std::size_t k = 0; k < m.motion.size(); ++k) {
        const AxisModel& a = m.motion[k];
        const double gait = a.a1 * std::sin(theta + a.phase1) + a.a2 * std::sin(2.0 * theta + a.phase2);
        const double tremor = a.tremor * e * std::sin(profile.tremor_harmonic * theta);
        const double drift = profile.wander_scale * a.shift * wander(seed, site, k, t_s);
        v[k] = a.bias + a.shift * e + gain * gait + tremor + drift;
    }

    const double heading = profile.heading_rad + profile.wander_scale * 0.6 * wander(seed, site, 6, t_s);
    const double tilt = m.mag_tilt * std::sin(theta);
    const double h = profile.mag_horizontal_ut;
    const double z = profile.mag_vertical_ut;
    v[6] = h * std::cos(heading);
    v[7] = h * std::sin(heading) * std::cos(tilt) + z * std::sin(tilt);
    v[8] = z * std::cos(tilt) - h * std::sin(heading) * std::sin(tilt);

    const auto pos_index = static_cast<std::uint64_t>(position.index());
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (profile.noise_std[k] > 0) {
            v[k] += m.noise_gain * profile.noise_std[k] * hashed_gaussian(seed, pos_index, static_cast<std::uint64_t>(t_us), k);
        }
    }

    for (std::size_t triad = 0; triad < 3; ++triad) {
        auto [x, y] = orient(position.orientation, v[3 * triad], v[3 * triad + 1]);
        v[3 * triad] = x;
        v[3 * triad + 1] = y;
    }

    std::array<float, 9> out{};
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = static_cast<float>(v[k]);
    return protocol::SensorSample::from_axes(out);
}

}  // namespace harnode::sim

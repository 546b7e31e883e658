#pragma once

// Synthetic two-class gait signals. Every sample is a pure function of
// (profile, position, time, seed): harmonics of the step frequency, a
// class-dependent modulation scaled by the site's contrast, slow per-site
// nuisance wander, per-site artifact episodes that mimic the other activity,
// and counter-based Gaussian noise.

#include <array>
#include <cstdint>

#include "harnode/body.hpp"
#include "harnode/protocol.hpp"

namespace harnode::sim {

inline constexpr double kGravity = 9.81;

struct AxisModel {
    double bias = 0;      // static offset
    double a1 = 0;        // fundamental amplitude
    double a2 = 0;        // second harmonic amplitude
    double phase1 = 0;    // radians
    double phase2 = 0;
    double shift = 0;     // TowardsStairs bias shift at contrast 1
    double tremor = 0;    // TowardsStairs high-harmonic amplitude at contrast 1
};

struct SiteModel {
    std::array<AxisModel, 6> motion{};  // ax, ay, az, gx, gy, gz
    double contrast = 0;                // 0..1
    double gait_phase = 0;              // radians, left/right anti-phase
    double mag_tilt = 0;                // radians of gait-coupled field rotation
    double noise_gain = 1;              // multiplies the profile's noise on this site
};

struct GaitProfile {
    Activity activity = Activity::Walking;
    double step_frequency_hz = 1.8;
    double stairs_frequency_drop = 0.10;  // whole-body cadence slowdown, scaled by the largest site contrast
    double stairs_amplitude_gain = 0.20;  // relative amplitude increase at contrast 1
    int tremor_harmonic = 6;
    std::array<SiteModel, kLocationCount> sites{};
    std::array<double, 9> noise_std{};
    double wander_scale = 1.0;       // multiplies the slow nuisance terms; 0 disables them
    /// Chance that a site shows the other activity's signature during one
    /// artifact slot, independently per site.
    double artifact_probability = 0.0;
    double artifact_slot_s = 1.5;
    double mag_horizontal_ut = 22.0;
    double mag_vertical_ut = -42.0;
    double heading_rad = 0.0;
};

/// Contrast ordering: feet > shins > thighs > waist > wrists > head, chest.
/// The default assumes a right-footed wearer.
GaitProfile default_gait_profile();

/// Per-subject variation of the base profile (step frequency, amplitudes,
/// effect size, biases). Left-footed subjects are mirrored left to right.
GaitProfile subject_profile(const GaitProfile& base, std::uint32_t subject_id, Footedness footedness,
                            std::uint64_t seed);

GaitProfile with_activity(GaitProfile profile, Activity activity);

protocol::SensorSample generate_sample(const GaitProfile& profile, const BodyPosition& position,
                                       std::int64_t t_us, std::uint64_t seed);

/// splitmix64 finalizer; used for counter-based randomness and seed derivation.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);

}  // namespace harnode::sim

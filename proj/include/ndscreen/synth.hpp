#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "ndscreen/session.hpp"

namespace ndscreen {

// Synthetic cohorts stand in for real recordings in tests and demos. The
// profile magnitudes below are plausibility placeholders, not clinical
// estimates of any population.

struct AuProfile {
    /// Stationary probability that the AU is active in a frame.
    double activation = 0.1;
    double mean_intensity = 2.0;
    double sd_intensity = 0.6;
};

struct GroupProfile {
    double blink_rate_per_min = 15.0;
    /// Typical per-axis head speed, m/s.
    double head_speed_scale = 0.02;
    /// Stationary std of head rotation around the subject's rest pose, degrees.
    double pose_drift_std = 3.0;
    std::array<AuProfile, kNumAus> au{};
    /// Mean offset added to each AnU channel before noise.
    std::array<double, kNumAnus> anu_offset{};
    double anu_noise_std = 0.15;
    double response_time_mean = 20.0;
    double response_time_std = 4.0;
};

struct GeneratorConfig {
    std::uint64_t seed = 0;
    std::map<Group, std::size_t> subjects;
    /// 0 makes every group share the baseline profile.
    double separation = 0.0;
    double frame_rate = 30.0;
    std::size_t frames_per_segment = 150;
    /// Frames between consecutive segments (and before the first one).
    std::size_t gap_frames = 5;
    double dropout = 0.0;
};

void validate(const GeneratorConfig& cfg);
/// Keys: seed, subjects {control, asd, adhd, comorbid}, separation,
/// frame_rate, frames_per_segment, gap_frames, dropout.
GeneratorConfig generator_config_from_json(std::string_view text);
std::string generator_config_to_json(const GeneratorConfig& cfg);

/// Group sizes 18 / 22 / 4 / 11.
std::map<Group, std::size_t> reference_group_sizes();

GroupProfile baseline_profile();
GroupProfile group_profile(Group group, double separation);

/// Landmarks of generated subjects stay within this cube (meters).
inline constexpr Vec3 kHeadCubeCentre{0.0, 0.0, 0.8};
inline constexpr double kHeadCubeHalfSide = 0.25;

SessionRecording generate_subject(const GeneratorConfig& cfg, Group group, std::string subject_id,
                                  std::uint64_t subject_seed);

/// Subjects are named S001, S002, ... with groups dealt in a seeded shuffle.
/// Subject i uses seed mix_seed(cfg.seed, i).
Cohort generate(const GeneratorConfig& cfg);

}  // namespace ndscreen

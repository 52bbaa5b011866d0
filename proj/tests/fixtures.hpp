#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ndscreen/features.hpp"
#include "ndscreen/rng.hpp"
#include "ndscreen/session.hpp"

namespace fixtures {

using namespace ndscreen;

// Landmark offsets that cancel pairwise, so the centroid is exactly `c`.
inline FrameRecord frame_at(std::uint64_t index, Vec3 c, bool tracked = true) {
    static constexpr std::array<Vec3, kNumLandmarks> kOffsets{{
        {-0.04, 0.03, 0.0}, {0.04, -0.03, 0.0}, {-0.01, 0.03, 0.0}, {0.01, -0.03, 0.0},
        {0.0, 0.01, -0.02}, {0.0, -0.01, 0.02}, {-0.015, -0.02, -0.02}, {0.015, 0.02, 0.02},
    }};
    FrameRecord f;
    f.frame_index = index;
    for (std::size_t l = 0; l < kNumLandmarks; ++l) f.landmarks[l] = c + kOffsets[l];
    f.tracked = tracked;
    return f;
}

inline FrameRecord still_frame(std::uint64_t index) { return frame_at(index, {0.0, 0.0, 0.8}); }

// 12 contiguous segments of `seg_len` frames, still head, zero intensities.
inline SessionRecording still_session(const std::string& id, Group group, std::size_t seg_len = 21,
                                      double f = 30.0) {
    SessionRecording s;
    s.manifest.subject_id = id;
    s.manifest.group = group;
    s.manifest.frame_rate = f;
    for (std::size_t k = 0; k < kNumSegments; ++k) {
        s.manifest.segments[k] = {k * seg_len, (k + 1) * seg_len};
        s.manifest.response_times[k] = static_cast<double>(k + 1);
    }
    for (std::size_t i = 0; i < kNumSegments * seg_len; ++i) s.frames.push_back(still_frame(i));
    return s;
}

// Random but valid frames.
inline FrameRecord random_frame(Rng& rng, std::uint64_t index, Vec3 c) {
    FrameRecord f = frame_at(index, c);
    for (double& v : f.au_intensity) v = rng.uniform(0.0, 5.0);
    for (double& v : f.anu_intensity) v = rng.uniform(-1.0, 1.0);
    f.au45_active = rng.bernoulli(0.2);
    f.head_rotation = {rng.uniform(-30.0, 30.0), rng.uniform(-60.0, 60.0), rng.uniform(-20.0, 20.0)};
    f.tracked = rng.bernoulli(0.85);
    return f;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("ndscreen_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fixtures

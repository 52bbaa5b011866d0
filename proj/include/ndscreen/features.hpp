#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ndscreen/matrix.hpp"
#include "ndscreen/session.hpp"

namespace ndscreen {

inline constexpr std::size_t kAuBins = 10;
inline constexpr std::size_t kAnuBins = 10;
inline constexpr std::size_t kPoseBins = 18;
inline constexpr std::size_t kSpeedBins = 10;

inline constexpr std::size_t kAuDims = kNumAus * kAuBins + 2;  // + blink count, blink duration
inline constexpr std::size_t kAnuDims = kNumAnus * kAnuBins;
inline constexpr std::size_t kPoseDims = 3 * kPoseBins;
inline constexpr std::size_t kSpeedDims = kSpeedBins;
inline constexpr std::size_t kSegmentDims = kAuDims + kAnuDims + kPoseDims + kSpeedDims + 1;
inline constexpr std::size_t kFeatureDims = kNumSegments * kSegmentDims + kNumSegments;

static_assert(kAuDims == 62 && kAnuDims == 120 && kPoseDims == 54 && kSpeedDims == 10);
static_assert(kSegmentDims == 247 && kFeatureDims == 2976);

/// Pose histogram centres run from -kPoseCentreSpan to +kPoseCentreSpan degrees.
inline constexpr double kPoseCentreSpan = 45.0;
/// Speed histogram covers [0, kSpeedMax] m/s; faster samples land in the last bin.
inline constexpr double kSpeedMax = 0.5;
/// Trailing moving-average window for head speed, in samples.
inline constexpr std::size_t kSpeedWindow = 20;

/// Offsets of each family inside one segment block.
inline constexpr std::size_t kAuOffset = 0;
inline constexpr std::size_t kAnuOffset = kAuOffset + kAuDims;
inline constexpr std::size_t kPoseOffset = kAnuOffset + kAnuDims;
inline constexpr std::size_t kSpeedOffset = kPoseOffset + kPoseDims;
inline constexpr std::size_t kDistanceOffset = kSpeedOffset + kSpeedDims;
inline constexpr std::size_t kResponseOffset = kNumSegments * kSegmentDims;

struct SegmentFeatures {
    std::array<double, kAuDims> f_au{};
    std::array<double, kAnuDims> f_an{};
    std::array<double, kPoseDims> f_hp{};
    std::array<double, kSpeedDims> f_sp{};
    double f_cd = 0.0;

    friend bool operator==(const SegmentFeatures&, const SegmentFeatures&) = default;
};

struct MedianPose {
    double pitch = 0.0;
    double yaw = 0.0;
    double roll = 0.0;

    double axis(std::size_t k) const { return k == 0 ? pitch : (k == 1 ? yaw : roll); }
    friend bool operator==(const MedianPose&, const MedianPose&) = default;
};

/// Canonical dimension names, in vector order. Segments are 1-based
/// ("seg01".."seg12"), bins 0-based.
const std::vector<std::string>& feature_names();

struct FeatureVector {
    std::vector<double> values;

    const std::vector<std::string>& names() const { return feature_names(); }
};

/// Bin index for a uniform histogram on [lo, hi]; values outside are clamped
/// to the end bins and `hi` itself falls in the last bin.
std::size_t uniform_bin(double value, double lo, double hi, std::size_t bins);

/// Wraps an angle difference into [-180, 180).
double wrap_degrees(double angle);

/// The 17 interior edges of the pose histogram, midway between centres
/// c_k = -45 + k * 90/17. A value equal to an edge falls in the upper bin.
const std::array<double, kPoseBins - 1>& pose_bin_edges();
std::size_t pose_bin(double deviation);

// Per-family extractors. All return raw counts (or seconds / meters) before
// frame-count normalization. Frames with tracked == false are skipped.

std::array<double, kAuDims> au_features(Segment segment, double frame_rate);
std::array<double, kAnuDims> anu_features(Segment segment);
MedianPose median_pose(const SessionRecording& session);
std::array<double, kPoseDims> headpose_features(Segment segment, const MedianPose& median);
std::vector<Vec3> centroid_track(Segment segment);
/// ||C_i - C_{i-1}|| * f for consecutive track entries.
std::vector<double> raw_speeds(std::span<const Vec3> track, double frame_rate);
/// Trailing mean over the last min(window, available) samples.
std::vector<double> smooth_speeds(std::span<const double> raw, std::size_t window = kSpeedWindow);
std::array<double, kSpeedDims> speed_features(Segment segment, double frame_rate);
double cumulative_distance(Segment segment);

SegmentFeatures segment_features(Segment segment, double frame_rate, const MedianPose& median);

/// The 2976-dimensional session descriptor: every segment family divided by
/// that segment's total frame count, then the 12 unscaled response times.
FeatureVector assemble(const SessionRecording& session);

/// A featurized cohort, rows sorted by subject_id.
struct FeatureTable {
    std::vector<std::string> subject_ids;
    std::vector<Group> groups;
    std::vector<std::string> names;
    Matrix values;
};

FeatureTable featurize_cohort(const Cohort& cohort, unsigned jobs = 1);

/// CSV with header `subject_id,group,<names...>`. Lines starting with '#'
/// carry metadata and are skipped by the reader.
std::string write_feature_csv(const FeatureTable& table, std::string_view comment = {});
FeatureTable read_feature_csv(std::string_view text);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace ndscreen

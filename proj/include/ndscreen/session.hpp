#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ndscreen {

inline constexpr std::size_t kNumSegments = 12;
inline constexpr std::size_t kNumAus = 6;
inline constexpr std::size_t kNumAnus = 12;
inline constexpr std::size_t kNumLandmarks = 8;
/// Smallest admissible segment: one more than the speed smoothing window.
inline constexpr std::size_t kMinSegmentFrames = 21;

/// AU ids in canonical order; au_intensity[k] belongs to kAuIds[k].
inline constexpr std::array<int, kNumAus> kAuIds{1, 2, 4, 12, 15, 20};
inline constexpr std::array<std::string_view, kNumAnus> kAnuIds{
    "L1", "L2", "L3", "L4", "L5", "L6", "R1", "R2", "R3", "R4", "R5", "R6"};

inline constexpr double kAuMin = 0.0;
inline constexpr double kAuMax = 5.0;
inline constexpr double kAnuMin = -1.0;
inline constexpr double kAnuMax = 1.0;

enum class Group { control, asd, adhd, comorbid };

inline constexpr std::array<Group, 4> kAllGroups{Group::control, Group::asd, Group::adhd,
                                                 Group::comorbid};

/// "control" | "asd" | "adhd" | "comorbid"
std::string_view to_string(Group g) noexcept;
Group parse_group(std::string_view s);

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
double norm(Vec3 v);

/// Head rotation in degrees, each component in [-180, 180).
struct Rotation {
    double pitch = 0.0;
    double yaw = 0.0;
    double roll = 0.0;

    double axis(std::size_t k) const { return k == 0 ? pitch : (k == 1 ? yaw : roll); }
    friend bool operator==(const Rotation&, const Rotation&) = default;
};

struct FrameRecord {
    std::uint64_t frame_index = 0;
    std::array<double, kNumAus> au_intensity{};
    bool au45_active = false;
    std::array<double, kNumAnus> anu_intensity{};
    Rotation head_rotation;
    /// Stable landmarks in camera space (meters): 4 eye corners, 4 nose points.
    std::array<Vec3, kNumLandmarks> landmarks{};
    bool tracked = true;

    friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

/// Half-open frame-index interval [start, end).
struct SegmentSpan {
    std::uint64_t start = 0;
    std::uint64_t end = 0;

    std::uint64_t length() const { return end - start; }
    friend bool operator==(const SegmentSpan&, const SegmentSpan&) = default;
};

struct SessionManifest {
    std::string subject_id;
    Group group = Group::control;
    double frame_rate = 0.0;
    std::array<SegmentSpan, kNumSegments> segments{};
    std::array<double, kNumSegments> response_times{};

    friend bool operator==(const SessionManifest&, const SessionManifest&) = default;
};

struct SessionRecording {
    SessionManifest manifest;
    std::vector<FrameRecord> frames;

    friend bool operator==(const SessionRecording&, const SessionRecording&) = default;
};

struct Cohort {
    std::vector<SessionRecording> sessions;
};

/// A view on the frames of one story segment.
using Segment = std::span<const FrameRecord>;

// Parsing and validation. Parse failures throw ParseError (with line
// number), range and rule failures throw ValidationError.

FrameRecord parse_frame_line(std::string_view line, std::size_t line_number);
std::vector<FrameRecord> parse_frames(std::istream& in);
std::vector<FrameRecord> parse_frames(std::string_view text);
std::string serialize_frame(const FrameRecord& frame);
void write_frames(std::ostream& out, std::span<const FrameRecord> frames);

SessionManifest parse_manifest(std::string_view doc);
std::string serialize_manifest(const SessionManifest& manifest);
void validate_manifest(const SessionManifest& manifest);
void validate_frame(const FrameRecord& frame);

/// Full recording checks: manifest rules, monotone frame indices, and every
/// segment inside [0, frame count).
void validate_recording(const SessionRecording& session);

/// Frames whose frame_index falls in each manifest segment, in order.
/// Throws RangeError when a segment ends past the last frame.
std::array<Segment, kNumSegments> slice_segments(const SessionRecording& session);

// Cohort index: JSON array of {subject_id, manifest_path, frames_path}.
// Relative paths resolve against the index file's directory.

struct CohortEntry {
    std::string subject_id;
    std::filesystem::path manifest_path;
    std::filesystem::path frames_path;
};

std::vector<CohortEntry> load_cohort_index(const std::filesystem::path& index_path);
SessionRecording load_session(const CohortEntry& entry);
Cohort load_cohort(const std::filesystem::path& index_path);

/// Writes manifests, frame streams, and `cohort.json` under `dir`.
/// Returns the index path.
std::filesystem::path write_cohort(const Cohort& cohort, const std::filesystem::path& dir);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace ndscreen

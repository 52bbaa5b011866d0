#include "ndscreen/session.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ndscreen/error.hpp"

namespace ndscreen {

using json = nlohmann::json;

namespace {

// Throws ParseError unless `obj[key]` exists.
const json& require(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(line, std::string("missing key '") + key + "'");
    return *it;
}

double require_number(const json& v, const std::string& field, std::size_t line) {
    if (!v.is_number()) throw ParseError(line, "field '" + field + "' must be a number");
    return v.get<double>();
}

bool require_bool(const json& v, const std::string& field, std::size_t line) {
    if (!v.is_boolean()) throw ParseError(line, "field '" + field + "' must be a boolean");
    return v.get<bool>();
}

const json& require_array(const json& v, const std::string& field, std::size_t size,
                          std::size_t line) {
    if (!v.is_array()) throw ParseError(line, "field '" + field + "' must be an array");
    if (v.size() != size)
        throw ParseError(line, "field '" + field + "' must have " + std::to_string(size) +
                                   " entries, got " + std::to_string(v.size()));
    return v;
}

bool in_closed(double v, double lo, double hi) { return v >= lo && v <= hi; }

std::string frame_field_error(const std::string& field, double value, std::uint64_t frame) {
    std::ostringstream os;
    os << "frame " << frame << ": field '" << field << "' out of range (" << value << ")";
    return os.str();
}

bool landmarks_finite(const FrameRecord& f) {
    return std::all_of(f.landmarks.begin(), f.landmarks.end(), [](const Vec3& p) {
        return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
    });
}

}  // namespace

std::string_view to_string(Group g) noexcept {
    switch (g) {
        case Group::control: return "control";
        case Group::asd: return "asd";
        case Group::adhd: return "adhd";
        case Group::comorbid: return "comorbid";
    }
    return "unknown";
}

Group parse_group(std::string_view s) {
    for (Group g : kAllGroups)
        if (to_string(g) == s) return g;
    throw ValidationError("unknown group '" + std::string(s) + "'");
}

double norm(Vec3 v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

void validate_frame(const FrameRecord& f) {
    for (std::size_t k = 0; k < kNumAus; ++k)
        if (!in_closed(f.au_intensity[k], kAuMin, kAuMax))
            throw ValidationError(frame_field_error("au." + std::to_string(kAuIds[k]),
                                                    f.au_intensity[k], f.frame_index));
    for (std::size_t k = 0; k < kNumAnus; ++k)
        if (!in_closed(f.anu_intensity[k], kAnuMin, kAnuMax))
            throw ValidationError(frame_field_error("anu." + std::string(kAnuIds[k]),
                                                    f.anu_intensity[k], f.frame_index));
    static constexpr const char* axes[] = {"rot.pitch", "rot.yaw", "rot.roll"};
    for (std::size_t k = 0; k < 3; ++k) {
        const double a = f.head_rotation.axis(k);
        if (!(a >= -180.0 && a < 180.0))
            throw ValidationError(frame_field_error(axes[k], a, f.frame_index));
    }
    if (f.tracked && !landmarks_finite(f))
        throw ValidationError("frame " + std::to_string(f.frame_index) +
                              ": field 'lm' must be finite on tracked frames");
}

FrameRecord parse_frame_line(std::string_view line, std::size_t line_number) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(line_number, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_number, "expected a JSON object");

    FrameRecord f;
    const json& idx = require(obj, "frame", line_number);
    if (!idx.is_number_unsigned())
        throw ParseError(line_number, "field 'frame' must be a non-negative integer");
    f.frame_index = idx.get<std::uint64_t>();

    const json& au = require(obj, "au", line_number);
    if (!au.is_object() || au.size() != kNumAus)
        throw ParseError(line_number, "field 'au' must be an object with 6 entries");
    for (std::size_t k = 0; k < kNumAus; ++k) {
        const std::string key = std::to_string(kAuIds[k]);
        f.au_intensity[k] = require_number(require(au, key.c_str(), line_number), "au." + key,
                                           line_number);
    }

    f.au45_active = require_bool(require(obj, "au45", line_number), "au45", line_number);

    const json& anu = require_array(require(obj, "anu", line_number), "anu", kNumAnus, line_number);
    for (std::size_t k = 0; k < kNumAnus; ++k)
        f.anu_intensity[k] = require_number(anu[k], "anu", line_number);

    const json& rot = require_array(require(obj, "rot", line_number), "rot", 3, line_number);
    f.head_rotation = {require_number(rot[0], "rot", line_number),
                       require_number(rot[1], "rot", line_number),
                       require_number(rot[2], "rot", line_number)};

    f.tracked = require_bool(require(obj, "tracked", line_number), "tracked", line_number);

    // Untracked frames may carry "lm": null.
    const json& lm = require(obj, "lm", line_number);
    if (lm.is_null() && !f.tracked) {
        constexpr double nan = std::numeric_limits<double>::quiet_NaN();
        f.landmarks.fill({nan, nan, nan});
    } else {
        require_array(lm, "lm", kNumLandmarks, line_number);
        for (std::size_t k = 0; k < kNumLandmarks; ++k) {
            const json& p = require_array(lm[k], "lm", 3, line_number);
            f.landmarks[k] = {require_number(p[0], "lm", line_number),
                              require_number(p[1], "lm", line_number),
                              require_number(p[2], "lm", line_number)};
        }
    }

    validate_frame(f);
    return f;
}

std::vector<FrameRecord> parse_frames(std::istream& in) {
    std::vector<FrameRecord> frames;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        FrameRecord f = parse_frame_line(line, line_number);
        if (!frames.empty() && f.frame_index <= frames.back().frame_index)
            throw ParseError(line_number, "frame index " + std::to_string(f.frame_index) +
                                              " not strictly increasing (previous " +
                                              std::to_string(frames.back().frame_index) + ")");
        frames.push_back(f);
    }
    return frames;
}

std::vector<FrameRecord> parse_frames(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_frames(in);
}

std::string serialize_frame(const FrameRecord& f) {
    json obj = json::object();
    obj["frame"] = f.frame_index;
    json au = json::object();
    for (std::size_t k = 0; k < kNumAus; ++k) au[std::to_string(kAuIds[k])] = f.au_intensity[k];
    obj["au"] = std::move(au);
    obj["au45"] = f.au45_active;
    obj["anu"] = f.anu_intensity;
    obj["rot"] = {f.head_rotation.pitch, f.head_rotation.yaw, f.head_rotation.roll};
    if (!f.tracked && !landmarks_finite(f)) {
        obj["lm"] = nullptr;
    } else {
        json lm = json::array();
        for (const Vec3& p : f.landmarks) lm.push_back({p.x, p.y, p.z});
        obj["lm"] = std::move(lm);
    }
    obj["tracked"] = f.tracked;
    return obj.dump();
}

void write_frames(std::ostream& out, std::span<const FrameRecord> frames) {
    for (const FrameRecord& f : frames) out << serialize_frame(f) << '\n';
}

void validate_manifest(const SessionManifest& m) {
    if (m.subject_id.empty()) throw ValidationError("manifest: subject_id must be non-empty");
    if (!(m.frame_rate > 0.0) || !std::isfinite(m.frame_rate))
        throw ValidationError("manifest " + m.subject_id + ": frame_rate must be positive");
    for (std::size_t k = 0; k < kNumSegments; ++k) {
        const SegmentSpan& s = m.segments[k];
        if (s.end <= s.start || s.length() < kMinSegmentFrames)
            throw ValidationError("manifest " + m.subject_id + ": segment " + std::to_string(k + 1) +
                                  " [" + std::to_string(s.start) + "," + std::to_string(s.end) +
                                  ") shorter than " + std::to_string(kMinSegmentFrames) +
                                  " frames");
        if (k > 0 && s.start < m.segments[k - 1].end)
            throw ValidationError("manifest " + m.subject_id + ": segment " + std::to_string(k + 1) +
                                  " overlaps or precedes segment " + std::to_string(k));
        const double rt = m.response_times[k];
        if (!(rt >= 0.0) || !std::isfinite(rt))
            throw ValidationError("manifest " + m.subject_id + ": response_times[" +
                                  std::to_string(k) + "] must be a non-negative number");
    }
}

SessionManifest parse_manifest(std::string_view doc) {
    json obj;
    try {
        obj = json::parse(doc);
    } catch (const json::parse_error& e) {
        throw ParseError(1, std::string("malformed manifest JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(1, "manifest must be a JSON object");

    SessionManifest m;
    const json& id = require(obj, "subject_id", 1);
    if (!id.is_string()) throw ParseError(1, "field 'subject_id' must be a string");
    m.subject_id = id.get<std::string>();

    const json& group = require(obj, "group", 1);
    if (!group.is_string()) throw ParseError(1, "field 'group' must be a string");
    m.group = parse_group(group.get<std::string>());

    m.frame_rate = require_number(require(obj, "frame_rate", 1), "frame_rate", 1);

    const json& segs = require(obj, "segments", 1);
    if (!segs.is_array()) throw ParseError(1, "field 'segments' must be an array");
    if (segs.size() != kNumSegments)
        throw ValidationError("manifest " + m.subject_id + ": segment count must be 12, got " +
                              std::to_string(segs.size()));
    for (std::size_t k = 0; k < kNumSegments; ++k) {
        const json& s = segs[k];
        if (!s.is_array() || s.size() != 2 || !s[0].is_number_unsigned() ||
            !s[1].is_number_unsigned())
            throw ParseError(1, "segments[" + std::to_string(k) +
                                    "] must be [start, end] with non-negative integers");
        m.segments[k] = {s[0].get<std::uint64_t>(), s[1].get<std::uint64_t>()};
    }

    const json& rts = require(obj, "response_times", 1);
    if (!rts.is_array()) throw ParseError(1, "field 'response_times' must be an array");
    if (rts.size() != kNumSegments)
        throw ValidationError("manifest " + m.subject_id +
                              ": response_times count must be 12, got " +
                              std::to_string(rts.size()));
    for (std::size_t k = 0; k < kNumSegments; ++k)
        m.response_times[k] = require_number(rts[k], "response_times", 1);

    validate_manifest(m);
    return m;
}

std::string serialize_manifest(const SessionManifest& m) {
    json obj = json::object();
    obj["subject_id"] = m.subject_id;
    obj["group"] = std::string(to_string(m.group));
    obj["frame_rate"] = m.frame_rate;
    json segs = json::array();
    for (const SegmentSpan& s : m.segments) segs.push_back({s.start, s.end});
    obj["segments"] = std::move(segs);
    obj["response_times"] = m.response_times;
    return obj.dump(2) + "\n";
}

void validate_recording(const SessionRecording& s) {
    validate_manifest(s.manifest);
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
        validate_frame(s.frames[i]);
        if (i > 0 && s.frames[i].frame_index <= s.frames[i - 1].frame_index)
            throw ValidationError("subject " + s.manifest.subject_id + ": frame index " +
                                  std::to_string(s.frames[i].frame_index) +
                                  " not strictly increasing");
    }
    for (std::size_t k = 0; k < kNumSegments; ++k)
        if (s.manifest.segments[k].end > s.frames.size())
            throw RangeError("subject " + s.manifest.subject_id + ": segment " +
                             std::to_string(k + 1) + " ends at " +
                             std::to_string(s.manifest.segments[k].end) + " past frame count " +
                             std::to_string(s.frames.size()));
}

std::array<Segment, kNumSegments> slice_segments(const SessionRecording& s) {
    std::array<Segment, kNumSegments> out;
    const auto& frames = s.frames;
    const auto by_index = [](const FrameRecord& f, std::uint64_t v) { return f.frame_index < v; };
    for (std::size_t k = 0; k < kNumSegments; ++k) {
        const SegmentSpan span = s.manifest.segments[k];
        if (span.end > frames.size())
            throw RangeError("subject " + s.manifest.subject_id + ": segment " +
                             std::to_string(k + 1) + " ends at " + std::to_string(span.end) +
                             " past frame count " + std::to_string(frames.size()));
        auto first = std::lower_bound(frames.begin(), frames.end(), span.start, by_index);
        auto last = std::lower_bound(first, frames.end(), span.end, by_index);
        out[k] = Segment(frames).subspan(static_cast<std::size_t>(first - frames.begin()),
                                         static_cast<std::size_t>(last - first));
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string(), "cannot open for reading");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string(), "cannot open for writing");
    out << text;
    if (!out) throw IoError(path.string(), "write failed");
}

std::vector<CohortEntry> load_cohort_index(const std::filesystem::path& index_path) {
    const std::string text = read_text_file(index_path);
    json arr;
    try {
        arr = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(1, index_path.string() + ": malformed cohort index: " + e.what());
    }
    if (!arr.is_array()) throw ParseError(1, index_path.string() + ": cohort index must be an array");

    const auto base = index_path.parent_path();
    std::vector<CohortEntry> entries;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& e = arr[i];
        for (const char* key : {"subject_id", "manifest_path", "frames_path"})
            if (!e.is_object() || !e.contains(key) || !e[key].is_string())
                throw ParseError(1, index_path.string() + ": entry " + std::to_string(i) +
                                        " needs string '" + key + "'");
        CohortEntry entry{e["subject_id"].get<std::string>(),
                          base / e["manifest_path"].get<std::string>(),
                          base / e["frames_path"].get<std::string>()};
        if (!seen.insert(entry.subject_id).second)
            throw ValidationError("cohort: duplicate subject_id '" + entry.subject_id + "'");
        entries.push_back(std::move(entry));
    }
    return entries;
}

SessionRecording load_session(const CohortEntry& entry) {
    SessionRecording s;
    s.manifest = parse_manifest(read_text_file(entry.manifest_path));
    if (s.manifest.subject_id != entry.subject_id)
        throw ValidationError("cohort: index subject_id '" + entry.subject_id +
                              "' does not match manifest subject_id '" + s.manifest.subject_id +
                              "'");
    std::ifstream in(entry.frames_path, std::ios::binary);
    if (!in) throw IoError(entry.frames_path.string(), "cannot open for reading");
    s.frames = parse_frames(in);
    validate_recording(s);
    return s;
}

Cohort load_cohort(const std::filesystem::path& index_path) {
    Cohort c;
    for (const CohortEntry& e : load_cohort_index(index_path)) c.sessions.push_back(load_session(e));
    return c;
}

std::filesystem::path write_cohort(const Cohort& cohort, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "subjects");
    json index = json::array();
    std::set<std::string> seen;
    for (const SessionRecording& s : cohort.sessions) {
        const std::string& id = s.manifest.subject_id;
        if (!seen.insert(id).second)
            throw ValidationError("cohort: duplicate subject_id '" + id + "'");
        const std::string manifest_rel = "subjects/" + id + ".manifest.json";
        const std::string frames_rel = "subjects/" + id + ".frames.jsonl";
        write_text_file(dir / manifest_rel, serialize_manifest(s.manifest));
        std::ostringstream frames;
        write_frames(frames, s.frames);
        write_text_file(dir / frames_rel, frames.str());
        index.push_back({{"subject_id", id}, {"manifest_path", manifest_rel}, {"frames_path", frames_rel}});
    }
    const auto index_path = dir / "cohort.json";
    write_text_file(index_path, index.dump(2) + "\n");
    return index_path;
}

}  // namespace ndscreen

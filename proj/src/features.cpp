#include "ndscreen/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "ndscreen/error.hpp"
#include "ndscreen/parallel.hpp"

namespace ndscreen {

namespace {

void require_nonempty(Segment segment) {
    if (segment.empty()) throw DegenerateError("empty segment");
}

std::string two_digits(std::size_t v) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02zu", v);
    return buf;
}

std::vector<std::string> build_names() {
    static constexpr const char* axes[] = {"pitch", "yaw", "roll"};
    std::vector<std::string> names;
    names.reserve(kFeatureDims);
    for (std::size_t s = 1; s <= kNumSegments; ++s) {
        const std::string seg = "seg" + two_digits(s) + ".";
        for (int au : kAuIds)
            for (std::size_t b = 0; b < kAuBins; ++b)
                names.push_back(seg + "au" + std::to_string(au) + ".bin" + two_digits(b));
        names.push_back(seg + "au45.count");
        names.push_back(seg + "au45.duration");
        for (std::string_view anu : kAnuIds)
            for (std::size_t b = 0; b < kAnuBins; ++b)
                names.push_back(seg + "anu." + std::string(anu) + ".bin" + two_digits(b));
        for (const char* axis : axes)
            for (std::size_t b = 0; b < kPoseBins; ++b)
                names.push_back(seg + "hp." + axis + ".bin" + two_digits(b));
        for (std::size_t b = 0; b < kSpeedBins; ++b) names.push_back(seg + "sp.bin" + two_digits(b));
        names.push_back(seg + "cd");
    }
    for (std::size_t s = 1; s <= kNumSegments; ++s) names.push_back("rt.seg" + two_digits(s));
    return names;
}

}  // namespace

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = build_names();
    return names;
}

std::size_t uniform_bin(double value, double lo, double hi, std::size_t bins) {
    if (!(value > lo)) return 0;
    if (value >= hi) return bins - 1;
    const auto idx = static_cast<std::size_t>((value - lo) / (hi - lo) * static_cast<double>(bins));
    return std::min(idx, bins - 1);
}

double wrap_degrees(double angle) {
    double d = std::fmod(angle + 180.0, 360.0);
    if (d < 0.0) d += 360.0;
    return d - 180.0;
}

const std::array<double, kPoseBins - 1>& pose_bin_edges() {
    static const auto edges = [] {
        std::array<double, kPoseBins - 1> e{};
        const double half_step = kPoseCentreSpan / static_cast<double>(kPoseBins - 1);
        for (std::size_t k = 0; k < e.size(); ++k)
            e[k] = -kPoseCentreSpan + static_cast<double>(2 * k + 1) * half_step;
        return e;
    }();
    return edges;
}

std::size_t pose_bin(double deviation) {
    const auto& edges = pose_bin_edges();
    return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), deviation) -
                                    edges.begin());
}

std::array<double, kAuDims> au_features(Segment segment, double frame_rate) {
    require_nonempty(segment);
    std::array<double, kAuDims> out{};
    std::size_t blinks = 0;
    std::size_t blink_frames = 0;
    bool in_blink = false;
    for (const FrameRecord& f : segment) {
        if (!f.tracked) continue;
        for (std::size_t a = 0; a < kNumAus; ++a)
            out[a * kAuBins + uniform_bin(f.au_intensity[a], kAuMin, kAuMax, kAuBins)] += 1.0;
        if (f.au45_active) {
            if (!in_blink) ++blinks;
            ++blink_frames;
        }
        in_blink = f.au45_active;
    }
    out[kNumAus * kAuBins] = static_cast<double>(blinks);
    out[kNumAus * kAuBins + 1] =
        blinks == 0 ? 0.0
                    : static_cast<double>(blink_frames) / static_cast<double>(blinks) / frame_rate;
    return out;
}

std::array<double, kAnuDims> anu_features(Segment segment) {
    require_nonempty(segment);
    std::array<double, kAnuDims> out{};
    for (const FrameRecord& f : segment) {
        if (!f.tracked) continue;
        for (std::size_t a = 0; a < kNumAnus; ++a)
            out[a * kAnuBins + uniform_bin(f.anu_intensity[a], kAnuMin, kAnuMax, kAnuBins)] += 1.0;
    }
    return out;
}

MedianPose median_pose(const SessionRecording& session) {
    std::array<std::vector<double>, 3> axes;
    for (const FrameRecord& f : session.frames) {
        if (!f.tracked) continue;
        for (std::size_t k = 0; k < 3; ++k) axes[k].push_back(f.head_rotation.axis(k));
    }
    if (axes[0].empty())
        throw DegenerateError("subject " + session.manifest.subject_id + ": no tracked frames");
    std::array<double, 3> med{};
    for (std::size_t k = 0; k < 3; ++k) {
        auto& v = axes[k];
        const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
        std::nth_element(v.begin(), mid, v.end());
        med[k] = *mid;
    }
    return {med[0], med[1], med[2]};
}

std::array<double, kPoseDims> headpose_features(Segment segment, const MedianPose& median) {
    require_nonempty(segment);
    std::array<double, kPoseDims> out{};
    for (const FrameRecord& f : segment) {
        if (!f.tracked) continue;
        for (std::size_t k = 0; k < 3; ++k) {
            const double dev = wrap_degrees(f.head_rotation.axis(k) - median.axis(k));
            out[k * kPoseBins + pose_bin(dev)] += 1.0;
        }
    }
    return out;
}

std::vector<Vec3> centroid_track(Segment segment) {
    require_nonempty(segment);
    std::vector<Vec3> track;
    track.reserve(segment.size());
    for (const FrameRecord& f : segment) {
        if (!f.tracked) continue;
        Vec3 sum;
        for (const Vec3& p : f.landmarks) sum = sum + p;
        track.push_back(sum * (1.0 / static_cast<double>(kNumLandmarks)));
    }
    return track;
}

std::vector<double> raw_speeds(std::span<const Vec3> track, double frame_rate) {
    std::vector<double> speeds;
    if (track.size() < 2) return speeds;
    speeds.reserve(track.size() - 1);
    for (std::size_t i = 1; i < track.size(); ++i)
        speeds.push_back(norm(track[i] - track[i - 1]) * frame_rate);
    return speeds;
}

std::vector<double> smooth_speeds(std::span<const double> raw, std::size_t window) {
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const std::size_t first = i + 1 >= window ? i + 1 - window : 0;
        double sum = 0.0;
        for (std::size_t j = first; j <= i; ++j) sum += raw[j];
        out[i] = sum / static_cast<double>(i + 1 - first);
    }
    return out;
}

namespace {

std::vector<Vec3> motion_track(Segment segment) {
    auto track = centroid_track(segment);
    if (track.size() < 2)
        throw DegenerateError("segment has " + std::to_string(track.size()) +
                              " tracked frames; head motion needs at least 2");
    return track;
}

}  // namespace

std::array<double, kSpeedDims> speed_features(Segment segment, double frame_rate) {
    const auto track = motion_track(segment);
    std::array<double, kSpeedDims> out{};
    for (double s : smooth_speeds(raw_speeds(track, frame_rate)))
        out[uniform_bin(s, 0.0, kSpeedMax, kSpeedBins)] += 1.0;
    return out;
}

double cumulative_distance(Segment segment) {
    const auto track = motion_track(segment);
    double total = 0.0;
    for (std::size_t i = 1; i < track.size(); ++i) total += norm(track[i] - track[i - 1]);
    return total;
}

SegmentFeatures segment_features(Segment segment, double frame_rate, const MedianPose& median) {
    SegmentFeatures sf;
    sf.f_au = au_features(segment, frame_rate);
    sf.f_an = anu_features(segment);
    sf.f_hp = headpose_features(segment, median);
    sf.f_sp = speed_features(segment, frame_rate);
    sf.f_cd = cumulative_distance(segment);
    return sf;
}

FeatureVector assemble(const SessionRecording& session) {
    const auto segments = slice_segments(session);
    const MedianPose median = median_pose(session);
    const double f = session.manifest.frame_rate;

    FeatureVector fv;
    fv.values.assign(kFeatureDims, 0.0);
    for (std::size_t k = 0; k < kNumSegments; ++k) {
        SegmentFeatures sf;
        try {
            sf = segment_features(segments[k], f, median);
        } catch (const Error& e) {
            throw DegenerateError("subject " + session.manifest.subject_id + ": segment " +
                                  std::to_string(k + 1) + ": " + e.what());
        }
        const double n = static_cast<double>(segments[k].size());
        double* block = fv.values.data() + k * kSegmentDims;
        auto put = [&](std::size_t offset, std::span<const double> src) {
            for (std::size_t i = 0; i < src.size(); ++i) block[offset + i] = src[i] / n;
        };
        put(kAuOffset, sf.f_au);
        put(kAnuOffset, sf.f_an);
        put(kPoseOffset, sf.f_hp);
        put(kSpeedOffset, sf.f_sp);
        block[kDistanceOffset] = sf.f_cd / n;
    }
    std::copy(session.manifest.response_times.begin(), session.manifest.response_times.end(),
              fv.values.begin() + static_cast<std::ptrdiff_t>(kResponseOffset));
    return fv;
}

FeatureTable featurize_cohort(const Cohort& cohort, unsigned jobs) {
    std::vector<std::size_t> order(cohort.sessions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return cohort.sessions[a].manifest.subject_id < cohort.sessions[b].manifest.subject_id;
    });

    FeatureTable table;
    table.names = feature_names();
    table.values = Matrix(order.size(), kFeatureDims);
    for (std::size_t i : order) {
        table.subject_ids.push_back(cohort.sessions[i].manifest.subject_id);
        table.groups.push_back(cohort.sessions[i].manifest.group);
    }
    parallel_for(order.size(), jobs, [&](std::size_t r) {
        const FeatureVector fv = assemble(cohort.sessions[order[r]]);
        std::copy(fv.values.begin(), fv.values.end(), table.values.row(r).begin());
    });
    return table;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string write_feature_csv(const FeatureTable& table, std::string_view comment) {
    std::string out;
    if (!comment.empty()) {
        std::istringstream lines{std::string(comment)};
        for (std::string line; std::getline(lines, line);) out += "# " + line + "\n";
    }
    out += "subject_id,group";
    for (const auto& n : table.names) out += "," + n;
    out += "\n";
    for (std::size_t r = 0; r < table.subject_ids.size(); ++r) {
        out += table.subject_ids[r];
        out += ",";
        out += to_string(table.groups[r]);
        for (double v : table.values.row(r)) {
            out += ",";
            out += format_double(v);
        }
        out += "\n";
    }
    return out;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        cells.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

}  // namespace

FeatureTable read_feature_csv(std::string_view text) {
    FeatureTable table;
    std::vector<double> values;
    bool have_header = false;
    std::size_t line_number = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;

        const auto cells = split_commas(line);
        if (!have_header) {
            if (cells.size() < 3 || cells[0] != "subject_id" || cells[1] != "group")
                throw ParseError(line_number, "feature CSV header must start with subject_id,group");
            for (std::size_t i = 2; i < cells.size(); ++i) table.names.emplace_back(cells[i]);
            have_header = true;
            continue;
        }
        if (cells.size() != table.names.size() + 2)
            throw ParseError(line_number, "expected " + std::to_string(table.names.size() + 2) +
                                              " columns, got " + std::to_string(cells.size()));
        table.subject_ids.emplace_back(cells[0]);
        table.groups.push_back(parse_group(cells[1]));
        for (std::size_t i = 2; i < cells.size(); ++i) {
            double v = 0.0;
            const auto cell = cells[i];
            auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v))
                throw ParseError(line_number, "column " + std::to_string(i + 1) +
                                                  ": not a finite number '" + std::string(cell) + "'");
            values.push_back(v);
        }
    }
    if (!have_header) throw ParseError(line_number, "feature CSV has no header");
    table.values = Matrix(table.subject_ids.size(), table.names.size());
    for (std::size_t r = 0; r < table.values.rows(); ++r)
        for (std::size_t c = 0; c < table.values.cols(); ++c)
            table.values(r, c) = values[r * table.values.cols() + c];
    return table;
}

}  // namespace ndscreen

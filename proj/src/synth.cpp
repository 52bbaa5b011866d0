#include "ndscreen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include <json.hpp>

#include "ndscreen/error.hpp"
#include "ndscreen/rng.hpp"

namespace ndscreen {

namespace {

// Latent trait loadings per group: hyperactivity, inattention, reduced
// expressivity, slow responding.
struct Traits {
    double hyper = 0.0;
    double inattention = 0.0;
    double flat_affect = 0.0;
    double slow = 0.0;
};

Traits traits(Group g) {
    switch (g) {
        case Group::control: return {0.0, 0.0, 0.0, 0.0};
        case Group::asd: return {0.5, 0.5, 1.0, 1.0};
        case Group::adhd: return {1.5, 1.0, 0.0, 0.5};
        case Group::comorbid: return {2.5, 1.5, 1.0, 1.5};
    }
    return {};
}

// Camera-space offsets of the stable landmarks from the head centre.
constexpr std::array<Vec3, kNumLandmarks> kLandmarkLayout{{
    {-0.045, 0.030, 0.000},
    {-0.015, 0.030, 0.000},
    {0.015, 0.030, 0.000},
    {0.045, 0.030, 0.000},
    {0.000, 0.010, -0.020},
    {0.000, -0.010, -0.030},
    {-0.015, -0.020, -0.020},
    {0.015, -0.020, -0.020},
}};

constexpr double kHeadExcursion = 0.12;  // max centre deviation from rest, m
constexpr double kHeadReversion = 1.0;   // 1/s
constexpr double kPoseReversion = 0.5;   // 1/s
constexpr double kLandmarkJitter = 0.0003;
constexpr double kAuEpisodeSeconds = 1.0;

double quantize(double v, double step) { return std::round(v / step) * step; }

double wrap180(double a) {
    double d = std::fmod(a + 180.0, 360.0);
    if (d < 0.0) d += 360.0;
    return d - 180.0;
}

}  // namespace

std::map<Group, std::size_t> reference_group_sizes() {
    return {{Group::control, 18}, {Group::asd, 22}, {Group::adhd, 4}, {Group::comorbid, 11}};
}

void validate(const GeneratorConfig& cfg) {
    if (cfg.frames_per_segment < kMinSegmentFrames)
        throw ConfigError("frames_per_segment must be at least " + std::to_string(kMinSegmentFrames));
    if (!(cfg.frame_rate > 0.0) || !std::isfinite(cfg.frame_rate))
        throw ConfigError("frame_rate must be positive");
    if (!(cfg.separation >= 0.0) || !std::isfinite(cfg.separation))
        throw ConfigError("separation must be non-negative");
    if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
}

GeneratorConfig generator_config_from_json(std::string_view text) {
    using nlohmann::json;
    GeneratorConfig cfg;
    std::string field;
    try {
        const json obj = json::parse(text);
        if (!obj.is_object()) throw ConfigError("generator config must be a JSON object");
        field = "seed";
        cfg.seed = obj.value("seed", cfg.seed);
        field = "subjects";
        if (obj.contains("subjects")) {
            for (const auto& [key, value] : obj["subjects"].items()) {
                field = "subjects." + key;
                cfg.subjects[parse_group(key)] = value.get<std::size_t>();
            }
        }
        field = "separation";
        cfg.separation = obj.value("separation", cfg.separation);
        field = "frame_rate";
        cfg.frame_rate = obj.value("frame_rate", cfg.frame_rate);
        field = "frames_per_segment";
        cfg.frames_per_segment = obj.value("frames_per_segment", cfg.frames_per_segment);
        field = "gap_frames";
        cfg.gap_frames = obj.value("gap_frames", cfg.gap_frames);
        field = "dropout";
        cfg.dropout = obj.value("dropout", cfg.dropout);
    } catch (const json::exception& e) {
        throw ConfigError("generator config field '" + field + "': " + e.what());
    } catch (const ValidationError& e) {
        throw ConfigError("generator config field '" + field + "': " + e.what());
    }
    validate(cfg);
    return cfg;
}

std::string generator_config_to_json(const GeneratorConfig& cfg) {
    nlohmann::json subjects = nlohmann::json::object();
    for (Group g : kAllGroups) {
        auto it = cfg.subjects.find(g);
        subjects[std::string(to_string(g))] = it == cfg.subjects.end() ? 0 : it->second;
    }
    const nlohmann::json obj = {{"seed", cfg.seed},
                                {"subjects", subjects},
                                {"separation", cfg.separation},
                                {"frame_rate", cfg.frame_rate},
                                {"frames_per_segment", cfg.frames_per_segment},
                                {"gap_frames", cfg.gap_frames},
                                {"dropout", cfg.dropout}};
    return obj.dump();
}

GroupProfile baseline_profile() {
    GroupProfile p;
    // AU1, AU2, AU4, AU12, AU15, AU20
    p.au = {{{0.12, 1.8, 0.6}, {0.10, 1.6, 0.6}, {0.08, 1.5, 0.5},
             {0.20, 2.4, 0.7}, {0.06, 1.4, 0.5}, {0.05, 1.2, 0.4}}};
    p.anu_offset.fill(0.0);
    return p;
}

GroupProfile group_profile(Group group, double separation) {
    GroupProfile p = baseline_profile();
    const Traits t = traits(group);
    const double d = separation;
    p.head_speed_scale *= 1.0 + d * t.hyper;
    p.pose_drift_std *= 1.0 + d * t.inattention;
    p.blink_rate_per_min *= 1.0 + 0.5 * d * t.inattention;
    p.response_time_mean *= 1.0 + 0.25 * d * t.slow;
    // Reduced expressivity: fewer inner-brow raises and smiles.
    p.au[0].activation /= 1.0 + d * t.flat_affect;
    p.au[3].activation /= 1.0 + d * t.flat_affect;
    // Lip-corner animation units (L6, R6) sit lower.
    p.anu_offset[5] -= 0.15 * d * t.flat_affect;
    p.anu_offset[11] -= 0.15 * d * t.flat_affect;
    return p;
}

SessionRecording generate_subject(const GeneratorConfig& cfg, Group group, std::string subject_id,
                                  std::uint64_t subject_seed) {
    validate(cfg);
    Rng rng(subject_seed);
    GroupProfile prof = group_profile(group, cfg.separation);

    // Between-subject variability.
    prof.head_speed_scale *= std::exp(0.2 * rng.normal());
    prof.pose_drift_std *= std::exp(0.2 * rng.normal());
    prof.blink_rate_per_min *= std::exp(0.2 * rng.normal());
    prof.response_time_mean *= std::exp(0.1 * rng.normal());

    const double f = cfg.frame_rate;
    const double dt = 1.0 / f;
    const Vec3 rest{std::clamp(rng.normal(0.0, 0.02), -0.05, 0.05),
                    std::clamp(rng.normal(0.0, 0.02), -0.05, 0.05),
                    kHeadCubeCentre.z + std::clamp(rng.normal(0.0, 0.02), -0.05, 0.05)};
    const Rotation rest_pose{rng.normal(0.0, 5.0), rng.normal(0.0, 5.0), rng.normal(0.0, 3.0)};

    SessionRecording s;
    s.manifest.subject_id = std::move(subject_id);
    s.manifest.group = group;
    s.manifest.frame_rate = f;
    std::uint64_t cursor = cfg.gap_frames;
    for (std::size_t k = 0; k < kNumSegments; ++k) {
        s.manifest.segments[k] = {cursor, cursor + cfg.frames_per_segment};
        cursor += cfg.frames_per_segment + cfg.gap_frames;
        s.manifest.response_times[k] =
            quantize(std::max(0.5, rng.normal(prof.response_time_mean, prof.response_time_std)), 0.01);
    }
    const std::size_t total = static_cast<std::size_t>(cursor);

    const double head_sigma = prof.head_speed_scale / f;
    const double pose_sigma = prof.pose_drift_std * std::sqrt(2.0 * kPoseReversion);
    const double au_off = 1.0 / (kAuEpisodeSeconds * f);
    const double blink_start = prof.blink_rate_per_min / 60.0 / f;

    std::array<double, 3> head{0.0, 0.0, 0.0};
    std::array<double, 3> pose{0.0, 0.0, 0.0};
    std::array<bool, kNumAus> au_active{};
    std::size_t blink_left = 0;

    s.frames.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        FrameRecord fr;
        fr.frame_index = i;

        for (std::size_t a = 0; a < 3; ++a) {
            head[a] += -kHeadReversion * head[a] * dt + head_sigma * rng.normal();
            head[a] = std::clamp(head[a], -kHeadExcursion, kHeadExcursion);
            pose[a] += -kPoseReversion * pose[a] * dt + pose_sigma * std::sqrt(dt) * rng.normal();
        }
        const Vec3 centre{rest.x + head[0], rest.y + head[1], rest.z + head[2]};
        for (std::size_t l = 0; l < kNumLandmarks; ++l) {
            const Vec3 p = centre + kLandmarkLayout[l];
            fr.landmarks[l] = {quantize(p.x + kLandmarkJitter * rng.normal(), 1e-5),
                               quantize(p.y + kLandmarkJitter * rng.normal(), 1e-5),
                               quantize(p.z + kLandmarkJitter * rng.normal(), 1e-5)};
        }
        fr.head_rotation = {quantize(wrap180(rest_pose.pitch + pose[0]), 1e-3),
                            quantize(wrap180(rest_pose.yaw + pose[1]), 1e-3),
                            quantize(wrap180(rest_pose.roll + pose[2]), 1e-3)};
        if (fr.head_rotation.pitch >= 180.0) fr.head_rotation.pitch = -180.0;
        if (fr.head_rotation.yaw >= 180.0) fr.head_rotation.yaw = -180.0;
        if (fr.head_rotation.roll >= 180.0) fr.head_rotation.roll = -180.0;

        for (std::size_t a = 0; a < kNumAus; ++a) {
            const AuProfile& ap = prof.au[a];
            const double p_on = ap.activation * au_off / std::max(1e-9, 1.0 - ap.activation);
            au_active[a] = au_active[a] ? !rng.bernoulli(au_off) : rng.bernoulli(p_on);
            const double v = au_active[a] ? rng.normal(ap.mean_intensity, ap.sd_intensity)
                                          : std::abs(rng.normal(0.0, 0.1));
            fr.au_intensity[a] = quantize(std::clamp(v, kAuMin, kAuMax), 1e-4);
        }

        if (blink_left == 0 && rng.bernoulli(blink_start))
            blink_left = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(rng.uniform(0.1, 0.2) * f)));
        fr.au45_active = blink_left > 0;
        if (blink_left > 0) --blink_left;

        for (std::size_t a = 0; a < kNumAnus; ++a) {
            const double v = prof.anu_offset[a] + prof.anu_noise_std * rng.normal();
            fr.anu_intensity[a] = quantize(std::clamp(v, kAnuMin, kAnuMax), 1e-4);
        }

        fr.tracked = !(cfg.dropout > 0.0 && rng.bernoulli(cfg.dropout));
        s.frames.push_back(fr);
    }
    return s;
}

Cohort generate(const GeneratorConfig& cfg) {
    validate(cfg);
    std::vector<Group> groups;
    for (Group g : kAllGroups) {
        auto it = cfg.subjects.find(g);
        if (it != cfg.subjects.end()) groups.insert(groups.end(), it->second, g);
    }
    Rng deal(mix_seed(cfg.seed, 0xC0FFEEULL));
    for (std::size_t i = groups.size(); i > 1; --i) std::swap(groups[i - 1], groups[deal.index(i)]);

    Cohort cohort;
    cohort.sessions.reserve(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "S%03zu", i + 1);
        cohort.sessions.push_back(generate_subject(cfg, groups[i], id, mix_seed(cfg.seed, i)));
    }
    return cohort;
}

}  // namespace ndscreen

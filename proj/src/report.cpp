#include "ndscreen/report.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ndscreen/features.hpp"

namespace ndscreen {

using nlohmann::json;

namespace {

json groups_json(const std::vector<Group>& groups) {
    json arr = json::array();
    for (Group g : groups) arr.push_back(std::string(to_string(g)));
    return arr;
}

json stage_json(const StageSpec& s) {
    return {{"name", s.name},
            {"positive", {{"name", s.positive_name}, {"groups", groups_json(s.positive_groups)}}},
            {"negative", {{"name", s.negative_name}, {"groups", groups_json(s.negative_groups)}}},
            {"excluded", groups_json(s.excluded_groups)}};
}

json report_json(const LosoReport& r) {
    json confusion = json::array();
    for (const auto& row : r.confusion.rows)
        confusion.push_back({{"class", row.name}, {"correct", row.correct}, {"incorrect", row.incorrect}});

    json subjects = json::array();
    for (const auto& p : r.per_subject)
        subjects.push_back({{"subject_id", p.subject_id},
                            {"group", std::string(to_string(p.group))},
                            {"true", p.truth},
                            {"predicted", p.predicted}});

    json folds = json::array();
    for (const auto& f : r.folds)
        folds.push_back({{"held_out", f.held_out},
                         {"selected", f.selected},
                         {"selected_names", f.selected_names},
                         {"selection_scores", f.selection_scores},
                         {"C", f.C},
                         {"gamma", f.gamma},
                         {"grid_accuracy", f.grid_accuracy},
                         {"converged", f.converged}});

    json top = json::array();
    for (const auto& t : r.top_features)
        top.push_back({{"index", t.index},
                       {"name", t.name},
                       {"frequency", t.frequency},
                       {"mean_step", t.mean_step}});

    json out = {{"stage", stage_json(r.stage)},
                {"leaky", r.leaky},
                {"confusion", confusion},
                {"total", r.confusion.total()},
                {"accuracy", r.accuracy},
                {"accuracy_percent", format_percent(r.accuracy)},
                {"per_subject", subjects},
                {"folds", folds},
                {"top_features", top}};
    if (r.leaky) out["banner"] = std::string(kLeakageBanner);
    return out;
}

std::string comment_block(std::string_view prefix, std::string_view run_config) {
    return std::string(prefix) + "run_config: " + std::string(run_config) + "\n";
}

std::string escape_xml(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// SVG comments may not contain "--".
std::string sanitize_comment(std::string_view s) {
    std::string out(s);
    for (std::size_t p = out.find("--"); p != std::string::npos; p = out.find("--", p)) out[p + 1] = ' ';
    return out;
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

}  // namespace

std::string format_percent(double accuracy) { return fmt("%.1f", accuracy * 100.0) + "%"; }

std::string report_to_json(std::span<const StageOutcome> outcomes, std::string_view run_config) {
    json stages = json::array();
    for (const auto& o : outcomes) {
        if (o.report) {
            stages.push_back(report_json(*o.report));
        } else {
            stages.push_back({{"stage", stage_json(o.stage)}, {"error", o.error}});
        }
    }
    json out = {{"run_config", json::parse(run_config)}, {"stages", stages}};
    return out.dump(2) + "\n";
}

std::string confusion_text_table(const LosoReport& r) {
    std::size_t width = std::string_view("Classifier").size();
    for (const auto& row : r.confusion.rows) width = std::max(width, row.name.size());

    std::ostringstream os;
    if (r.leaky) os << "*** " << kLeakageBanner << " ***\n";
    os << "Classification results: " << r.confusion.rows.at(0).name << " vs "
       << r.confusion.rows.at(1).name << " (" << r.stage.name << ")\n";
    auto pad = [&](std::string_view s) { return std::string(s) + std::string(width - s.size(), ' '); };
    os << pad("Classifier") << " | Correct | Incorrect\n";
    os << std::string(width, '-') << "-+---------+----------\n";
    for (const auto& row : r.confusion.rows) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " | %7zu | %9zu\n", row.correct, row.incorrect);
        os << pad(row.name) << buf;
    }
    std::size_t correct = 0;
    for (const auto& row : r.confusion.rows) correct += row.correct;
    os << "Accuracy: " << format_percent(r.accuracy) << " (" << correct << "/" << r.confusion.total()
       << ")\n";
    return os.str();
}

std::string scatter_csv(const LosoReport& r, std::string_view run_config) {
    std::string out = comment_block("# ", run_config);
    if (r.leaky) out += "# " + std::string(kLeakageBanner) + "\n";
    out += "subject_id,group";
    for (const auto& n : r.scatter.feature_names) out += "," + n;
    out += "\n";
    for (std::size_t s = 0; s < r.scatter.subject_ids.size(); ++s) {
        out += r.scatter.subject_ids[s] + "," + std::string(to_string(r.scatter.groups[s]));
        for (double v : r.scatter.values[s]) out += "," + format_double(v);
        out += "\n";
    }
    return out;
}

std::string scatter_svg(const LosoReport& r, std::string_view run_config) {
    constexpr double W = 480, H = 400, margin = 60;
    const auto& sc = r.scatter;
    const std::size_t dims = sc.feature_names.size();

    auto range_of = [&](std::size_t d) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& v : sc.values) {
            lo = std::min(lo, v[d]);
            hi = std::max(hi, v[d]);
        }
        if (!(hi > lo)) {
            lo -= 0.5;
            hi += 0.5;
        }
        return std::pair{lo, hi};
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    os << "<!-- " << sanitize_comment(comment_block("", run_config)) << " -->\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
       << escape_xml(r.confusion.rows.at(0).name + " vs " + r.confusion.rows.at(1).name) << "</text>\n";
    if (r.leaky)
        os << "<text x=\"" << W / 2 << "\" y=\"36\" text-anchor=\"middle\" font-size=\"11\" fill=\"red\">"
           << kLeakageBanner << "</text>\n";
    os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << W - 2 * margin
       << "\" height=\"" << H - 2 * margin << "\" fill=\"none\" stroke=\"black\"/>\n";
    if (dims > 0)
        os << "<text x=\"" << W / 2 << "\" y=\"" << H - 20 << "\" text-anchor=\"middle\" font-size=\"11\">"
           << escape_xml(sc.feature_names[0]) << "</text>\n";
    if (dims > 1)
        os << "<text x=\"15\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 15 "
           << H / 2 << ")\">" << escape_xml(sc.feature_names[1]) << "</text>\n";
    if (dims > 2)
        os << "<text x=\"" << W - margin << "\" y=\"" << margin - 8
           << "\" text-anchor=\"end\" font-size=\"10\">size: " << escape_xml(sc.feature_names[2])
           << "</text>\n";

    if (dims > 0) {
        const auto [x0, x1] = range_of(0);
        const auto [y0, y1] = dims > 1 ? range_of(1) : std::pair{0.0, 1.0};
        const auto [s0, s1] = dims > 2 ? range_of(2) : std::pair{0.0, 1.0};
        const std::string& positive = r.confusion.rows.at(0).name;
        for (std::size_t s = 0; s < sc.values.size(); ++s) {
            const auto& v = sc.values[s];
            const double px = margin + (v[0] - x0) / (x1 - x0) * (W - 2 * margin);
            const double py = H - margin - (dims > 1 ? (v[1] - y0) / (y1 - y0) : 0.5) * (H - 2 * margin);
            const double radius = dims > 2 ? 3.0 + 6.0 * (v[2] - s0) / (s1 - s0) : 5.0;
            os << "<circle cx=\"" << fmt("%.2f", px) << "\" cy=\"" << fmt("%.2f", py) << "\" r=\""
               << fmt("%.2f", radius) << "\" fill=\"" << (sc.classes[s] == positive ? "#1f77b4" : "#d62728")
               << "\" fill-opacity=\"0.7\"><title>" << escape_xml(sc.subject_ids[s]) << "</title></circle>\n";
        }
    }
    os << "<text x=\"" << margin << "\" y=\"" << H - 35 << "\" font-size=\"10\" fill=\"#1f77b4\">"
       << escape_xml(r.confusion.rows.at(0).name) << "</text>\n";
    os << "<text x=\"" << margin + 100 << "\" y=\"" << H - 35 << "\" font-size=\"10\" fill=\"#d62728\">"
       << escape_xml(r.confusion.rows.at(1).name) << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace ndscreen

#include "ndscreen/commands.hpp"

#include <algorithm>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "ndscreen/features.hpp"
#include "ndscreen/report.hpp"
#include "ndscreen/session.hpp"
#include "ndscreen/synth.hpp"

namespace ndscreen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view stage_flag(StageSelection s) {
    switch (s) {
        case StageSelection::one: return "1";
        case StageSelection::two: return "2";
        case StageSelection::both: return "both";
    }
    return "both";
}

int report_error(const Error& e, std::ostream& err) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
}

std::string comment_lines(std::string_view prefix, std::string_view text) {
    return std::string(prefix) + std::string(text) + "\n";
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::config:
        case ErrorKind::protocol: return kExitConfig;
        case ErrorKind::io: return kExitIo;
        default: return kExitValidation;
    }
}

std::string run_config_to_json(const RunConfig& cfg) {
    PipelineConfig p = cfg.pipeline;
    if (cfg.seed) p.selection.fold_seed = *cfg.seed;
    json obj = {{"pipeline", json::parse(pipeline_config_to_json(p))},
                {"seed", p.selection.fold_seed},
                {"stage", std::string(stage_flag(cfg.stage))},
                {"paper_mode", p.paper_mode}};
    if (!cfg.cohort.empty()) obj["cohort"] = cfg.cohort.generic_string();
    if (!cfg.features.empty()) obj["features"] = cfg.features.generic_string();
    return obj.dump();
}

int cmd_validate(const fs::path& cohort, std::ostream& out, std::ostream& err) {
    std::vector<CohortEntry> entries;
    try {
        entries = load_cohort_index(cohort);
    } catch (const Error& e) {
        return report_error(e, err);
    }
    std::size_t failed = 0;
    bool io_failure = false;
    for (const CohortEntry& entry : entries) {
        try {
            load_session(entry);
            out << "PASS " << entry.subject_id << "\n";
        } catch (const Error& e) {
            ++failed;
            io_failure = io_failure || e.kind() == ErrorKind::io;
            out << "FAIL " << entry.subject_id << ": " << to_string(e.kind()) << ": " << e.what() << "\n";
        }
    }
    out << entries.size() - failed << "/" << entries.size() << " sessions valid\n";
    if (io_failure) return kExitIo;
    return failed == 0 ? kExitOk : kExitValidation;
}

int cmd_featurize(const fs::path& cohort, const fs::path& out_csv, unsigned jobs, std::ostream& out,
                  std::ostream& err) {
    try {
        const FeatureTable table = featurize_cohort(load_cohort(cohort), jobs);
        const json meta = {{"cohort", cohort.generic_string()}, {"dimensions", table.names.size()}};
        write_text_file(out_csv, write_feature_csv(table, "run_config: " + meta.dump()));
        out << "wrote " << table.subject_ids.size() << " x " << table.names.size() << " features to "
            << out_csv.generic_string() << "\n";
        return kExitOk;
    } catch (const Error& e) {
        return report_error(e, err);
    }
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.cohort.empty() == cfg.features.empty())
            throw ConfigError("evaluate needs exactly one of --cohort or --features");
        PipelineConfig pipeline = cfg.pipeline;
        if (cfg.seed) pipeline.selection.fold_seed = *cfg.seed;
        validate(pipeline);

        const FeatureTable table = cfg.features.empty()
                                       ? featurize_cohort(load_cohort(cfg.cohort), pipeline.jobs)
                                       : read_feature_csv(read_text_file(cfg.features));
        const std::string run_config = run_config_to_json(cfg);
        const auto outcomes = two_stage(table, pipeline, cfg.stage);

        fs::create_directories(cfg.out);
        write_text_file(cfg.out / "report.json", report_to_json(outcomes, run_config));
        int code = kExitOk;
        for (const StageOutcome& o : outcomes) {
            if (!o.report) {
                err << "error: stage " << o.stage.name << ": " << o.error << "\n";
                code = kExitConfig;
                continue;
            }
            const std::string table_text = confusion_text_table(*o.report);
            out << table_text << "\n";
            write_text_file(cfg.out / (o.stage.name + "_table.txt"),
                            comment_lines("# run_config: ", run_config) + table_text);
            write_text_file(cfg.out / (o.stage.name + "_scatter.csv"), scatter_csv(*o.report, run_config));
            write_text_file(cfg.out / (o.stage.name + "_scatter.svg"), scatter_svg(*o.report, run_config));
        }
        return code;
    } catch (const Error& e) {
        return report_error(e, err);
    }
}

int cmd_synth(const fs::path& config, const fs::path& out_dir, std::optional<std::uint64_t> seed,
              std::ostream& out, std::ostream& err) {
    try {
        GeneratorConfig cfg;
        if (!config.empty()) {
            cfg = generator_config_from_json(read_text_file(config));
        } else {
            cfg.subjects = reference_group_sizes();
        }
        if (seed) cfg.seed = *seed;
        validate(cfg);

        const Cohort cohort = generate(cfg);
        const fs::path index = write_cohort(cohort, out_dir);
        write_text_file(out_dir / "generator_config.json", json::parse(generator_config_to_json(cfg)).dump(2) + "\n");

        std::map<Group, std::size_t> counts;
        for (const auto& s : cohort.sessions) ++counts[s.manifest.group];
        out << "seed " << cfg.seed << "\n";
        for (Group g : kAllGroups) out << to_string(g) << " " << counts[g] << "\n";
        out << "total " << cohort.sessions.size() << "\n";
        out << "index " << index.generic_string() << "\n";
        if (cohort.sessions.empty()) err << "warning: configuration has zero subjects; cohort is empty\n";
        return kExitOk;
    } catch (const Error& e) {
        return report_error(e, err);
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Facial-behaviour screening pipeline: validate, featurize, evaluate, synth"};
    app.require_subcommand(1);

    std::string cohort;
    std::string features;
    std::string out_path;
    std::string config;
    std::uint64_t seed = 0;
    std::string stage = "both";
    bool paper_mode = false;
    unsigned jobs = 1;

    auto* validate_cmd = app.add_subcommand("validate", "Check a cohort against the session format");
    validate_cmd->add_option("--cohort", cohort, "Cohort index JSON")->required();

    auto* featurize_cmd = app.add_subcommand("featurize", "Write the feature matrix CSV");
    featurize_cmd->add_option("--cohort", cohort, "Cohort index JSON")->required();
    featurize_cmd->add_option("--out", out_path, "Output CSV path")->required();
    featurize_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Run the two-stage LOSO evaluation");
    auto* cohort_opt = evaluate_cmd->add_option("--cohort", cohort, "Cohort index JSON");
    auto* features_opt = evaluate_cmd->add_option("--features", features, "Feature CSV from featurize");
    cohort_opt->excludes(features_opt);
    evaluate_cmd->add_option("--out", out_path, "Output directory")->required();
    evaluate_cmd->add_option("--config", config, "Pipeline config JSON");
    auto* eval_seed = evaluate_cmd->add_option("--seed", seed, "Fold seed");
    evaluate_cmd->add_option("--stage", stage, "Stages to run")->check(CLI::IsMember({"1", "2", "both"}));
    evaluate_cmd->add_flag("--paper-mode", paper_mode, "Select features once on all subjects (leaky)");
    evaluate_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic cohort");
    synth_cmd->add_option("--config", config, "Generator config JSON");
    synth_cmd->add_option("--out", out_path, "Output directory")->required();
    auto* synth_seed = synth_cmd->add_option("--seed", seed, "Generator seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (validate_cmd->parsed()) return cmd_validate(cohort, out, err);
    if (featurize_cmd->parsed()) return cmd_featurize(cohort, out_path, jobs, out, err);
    if (synth_cmd->parsed())
        return cmd_synth(config, out_path, synth_seed->count() ? std::optional(seed) : std::nullopt, out, err);

    RunConfig run;
    run.cohort = cohort;
    run.features = features;
    run.out = out_path;
    try {
        if (!config.empty()) run.pipeline = pipeline_config_from_json(read_text_file(config));
    } catch (const Error& e) {
        return report_error(e, err);
    }
    if (paper_mode) run.pipeline.paper_mode = true;
    run.pipeline.jobs = jobs;
    if (eval_seed->count()) run.seed = seed;
    run.stage = stage == "1" ? StageSelection::one : stage == "2" ? StageSelection::two : StageSelection::both;
    return cmd_evaluate(run, out, err);
}

}  // namespace ndscreen
